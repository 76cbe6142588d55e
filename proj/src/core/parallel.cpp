#include "core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace gm {

namespace {

// Minimal fork-join pool. Work items are index ranges; the partitioning of
// loops is fixed by the chunk size, not by the worker count.
class Pool {
  public:
    static Pool& instance() {
        static Pool p;
        return p;
    }

    void set_threads(int n) {
        std::lock_guard<std::mutex> lk(config_mutex_);
        n = std::max(1, n);
        if (n == threads_) return;
        stop_workers();
        threads_ = n;
        start_workers();
    }

    int threads() const { return threads_; }

    void run(std::size_t njobs, const std::function<void(std::size_t)>& job) {
        if (njobs == 0) return;
        if (threads_ == 1 || njobs == 1 || in_parallel_) {
            // Nested parallel regions degrade to serial execution.
            for (std::size_t i = 0; i < njobs; ++i) job(i);
            return;
        }
        std::lock_guard<std::mutex> lk(config_mutex_);
        {
            std::lock_guard<std::mutex> lk2(mutex_);
            job_ = &job;
            njobs_ = njobs;
            next_ = 0;
            pending_ = njobs;
            exc_ = nullptr;
        }
        cv_.notify_all();
        // The calling thread participates.
        in_parallel_ = true;
        work_loop();
        in_parallel_ = false;
        std::exception_ptr exc;
        {
            std::unique_lock<std::mutex> lk2(mutex_);
            done_cv_.wait(lk2, [&] { return pending_ == 0; });
            job_ = nullptr;
            exc = exc_;
            exc_ = nullptr;
        }
        if (exc) std::rethrow_exception(exc);
    }

  private:
    Pool() : threads_(1) {}
    ~Pool() { stop_workers(); }

    void start_workers() {
        stop_ = false;
        for (int i = 1; i < threads_; ++i)
            workers_.emplace_back([this] { worker_main(); });
    }

    void stop_workers() {
        {
            std::lock_guard<std::mutex> lk(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
        workers_.clear();
        stop_ = false;
    }

    void worker_main() {
        in_parallel_ = true;
        for (;;) {
            {
                std::unique_lock<std::mutex> lk(mutex_);
                cv_.wait(lk, [&] { return stop_ || (job_ && next_ < njobs_); });
                if (stop_) return;
            }
            work_loop();
        }
    }

    void work_loop() {
        for (;;) {
            std::size_t i = next_.fetch_add(1);
            if (i >= njobs_) return;
            try {
                (*job_)(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mutex_);
                if (!exc_) exc_ = std::current_exception();
            }
            if (pending_.fetch_sub(1) == 1) {
                std::lock_guard<std::mutex> lk(mutex_);
                done_cv_.notify_all();
            }
        }
    }

    int threads_;
    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::mutex config_mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t njobs_ = 0;
    std::atomic<std::size_t> next_{0};
    std::atomic<std::size_t> pending_{0};
    std::exception_ptr exc_ = nullptr;
    bool stop_ = false;
    static thread_local bool in_parallel_;
};

thread_local bool Pool::in_parallel_ = false;

constexpr std::size_t kBlock = 4096;

}  // namespace

void set_threads(int n) { Pool::instance().set_threads(n); }
int thread_count() { return Pool::instance().threads(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    // Group indices into chunks to amortize dispatch.
    std::size_t chunk = std::max<std::size_t>(1, n / (4u * std::max(1, thread_count())));
    parallel_for_chunks(n, chunk, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(1, chunk);
    std::size_t njobs = (n + chunk - 1) / chunk;
    Pool::instance().run(njobs, [&](std::size_t j) {
        std::size_t b = j * chunk;
        std::size_t e = std::min(n, b + chunk);
        fn(b, e);
    });
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = v[0];
        for (std::size_t i = 1; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double block_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    });
    return pairwise_sum(partial);
}

double block_sum_array(const double* v, std::size_t n) {
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        partial[b] = s;
    });
    return pairwise_sum(partial);
}

double max_abs(const double* v, std::size_t n) {
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
        double m = 0.0;
        for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::fabs(v[i]));
        partial[b] = m;
    });
    double m = 0.0;
    for (double x : partial) m = std::max(m, x);
    return m;
}

}  // namespace gm
