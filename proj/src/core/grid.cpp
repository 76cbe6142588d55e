#include "core/grid.hpp"

#include <cmath>

namespace gm {

namespace {
bool pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double fft_wavenumber(std::size_t k, std::size_t n, double period) {
    // signed bucket, Nyquist zeroed
    long s = (k <= n / 2) ? long(k) : long(k) - long(n);
    if (k == n / 2) s = 0;
    return 2.0 * M_PI * double(s) / period;
}
}  // namespace

double PosGrid::wavenumber(std::size_t k) const {
    return fft_wavenumber(k, n, length);
}

PhaseSpaceGrid::PhaseSpaceGrid(std::size_t nr_, std::size_t np_, double length_, double pmax_)
    : nr(nr_), np(np_), length(length_), pmax(pmax_) {
    if (!pow2(nr) || !pow2(np))
        fail(ErrorCode::ValidationError, "grid sizes must be powers of two");
    if (length <= 0.0)
        fail(ErrorCode::ValidationError, "position domain length must be positive");
    if (pmax < 6.0)
        fail(ErrorCode::ValidationError, "pmax must be >= 6 (Gaussian tail mass)");
}

double PhaseSpaceGrid::r_wavenumber(std::size_t k) const {
    return fft_wavenumber(k, nr, length);
}

double PhaseSpaceGrid::p_wavenumber(std::size_t k) const {
    return fft_wavenumber(k, np, 2.0 * pmax);
}

double PhaseSpaceGrid::window(double p1, double p2) const {
    double q = (p1 * p1 + p2 * p2) / (pmax * pmax);
    return std::exp(-17.3 * q * q * q * q);
}

void require_same(const PosGrid& a, const PosGrid& b, const char* what) {
    if (!(a == b)) fail(ErrorCode::GridMismatch, std::string("position grid mismatch in ") + what);
}

void require_same(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b, const char* what) {
    if (!(a == b)) fail(ErrorCode::GridMismatch, std::string("phase-space grid mismatch in ") + what);
}

}  // namespace gm
