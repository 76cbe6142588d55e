#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gm {

// Thread-count never changes results: parallel_for partitions work over
// independent output slots, and all reductions go through fixed-block partial
// sums merged by a fixed-shape pairwise tree. Two runs with --threads 1 and
// --threads 4 must produce bit-identical numbers.

void set_threads(int n);
int thread_count();

// fn(i) for i in [0, n); each index writes only its own outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// chunked variant: fn(begin, end) over disjoint ranges.
void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t, std::size_t)>& fn);

// Pairwise-tree sum of v in a fixed order (serial; v is already small or a
// vector of block partials).
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

// Deterministic sum over n terms: fixed 4096-element blocks summed serially,
// block partials merged pairwise. Blocks may be evaluated in parallel.
double block_sum(std::size_t n, const std::function<double(std::size_t)>& term);
double block_sum_array(const double* v, std::size_t n);

double max_abs(const double* v, std::size_t n);

}  // namespace gm
