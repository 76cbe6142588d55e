#include "core/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "core/common.hpp"

namespace gm {

Fft::Fft(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0)
        fail(ErrorCode::ValidationError, "FFT size must be a power of two, got " + std::to_string(n));
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((1u << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b)
            if (i & (1u << b)) r |= 1u << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    // Twiddles packed per stage: for stage length m, the m/2 factors.
    tw_fwd_.reserve(n);
    tw_inv_.reserve(n);
    for (std::size_t m = 2; m <= n; m <<= 1) {
        for (std::size_t j = 0; j < m / 2; ++j) {
            double ang = 2.0 * M_PI * double(j) / double(m);
            tw_fwd_.emplace_back(std::cos(ang), -std::sin(ang));
            tw_inv_.emplace_back(std::cos(ang), std::sin(ang));
        }
    }
}

void Fft::transform(cplx* a, int sign) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = bitrev_[i];
        if (j > i) std::swap(a[i], a[j]);
    }
    const cplx* tw = (sign < 0) ? tw_fwd_.data() : tw_inv_.data();
    std::size_t toff = 0;
    for (std::size_t m = 2; m <= n; m <<= 1) {
        const std::size_t h = m / 2;
        for (std::size_t k = 0; k < n; k += m) {
            for (std::size_t j = 0; j < h; ++j) {
                cplx w = tw[toff + j];
                cplx t = w * a[k + j + h];
                cplx u = a[k + j];
                a[k + j] = u + t;
                a[k + j + h] = u - t;
            }
        }
        toff += h;
    }
}

const Fft& fft_plan(std::size_t n) {
    static std::map<std::size_t, Fft> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Fft(n)).first;
    return it->second;
}

}  // namespace gm
