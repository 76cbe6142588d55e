#pragma once

#include <cstddef>
#include <vector>

#include "core/common.hpp"

namespace gm {

// Periodic 2D position grid, r in [0, L)^2, spacing dr = L/n.
struct PosGrid {
    std::size_t n = 0;
    double length = 0.0;

    std::size_t size() const { return n * n; }
    double dr() const { return length / double(n); }
    double r(std::size_t i) const { return double(i) * dr(); }
    std::size_t idx(std::size_t i1, std::size_t i2) const { return i1 * n + i2; }
    // wavenumber of FFT bucket k (Nyquist zeroed for derivatives)
    double wavenumber(std::size_t k) const;
    bool operator==(const PosGrid&) const = default;
};

// Tensor phase-space grid: periodic position square times truncated momentum
// square [-pmax, pmax)^2 sampled at half-offset nodes (p = 0 excluded, grid
// symmetric under p -> -p). Layout: ((ir1*nr + ir2)*np + ip1)*np + ip2.
struct PhaseSpaceGrid {
    std::size_t nr = 0;
    std::size_t np = 0;
    double length = 0.0;
    double pmax = 0.0;

    PhaseSpaceGrid() = default;
    PhaseSpaceGrid(std::size_t nr_, std::size_t np_, double length_, double pmax_);

    std::size_t size() const { return nr * nr * np * np; }
    std::size_t psize() const { return np * np; }
    std::size_t rsize() const { return nr * nr; }
    double dr() const { return length / double(nr); }
    double dp() const { return 2.0 * pmax / double(np); }
    double r(std::size_t i) const { return double(i) * dr(); }
    double p(std::size_t i) const { return -pmax + (double(i) + 0.5) * dp(); }
    std::size_t idx(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) const {
        return ((i1 * nr + i2) * np + j1) * np + j2;
    }
    PosGrid pos() const { return PosGrid{nr, length}; }

    double r_wavenumber(std::size_t k) const;  // dual of r, Nyquist zeroed
    double p_wavenumber(std::size_t k) const;  // dual of p (xi), Nyquist zeroed

    // Smooth super-Gaussian momentum window, 1 near p = 0, ~3e-8 at |p| = pmax.
    // Used when placing non-decaying test symbols on the truncated box.
    double window(double p1, double p2) const;

    bool operator==(const PhaseSpaceGrid&) const = default;
};

void require_same(const PosGrid& a, const PosGrid& b, const char* what);
void require_same(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b, const char* what);

// A scalar field on the position grid.
struct PosField {
    PosGrid grid;
    std::vector<double> v;

    PosField() = default;
    explicit PosField(const PosGrid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

// A scalar field on the phase-space grid.
struct PhaseField {
    PhaseSpaceGrid grid;
    std::vector<double> v;

    PhaseField() = default;
    explicit PhaseField(const PhaseSpaceGrid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

struct PosVec2 {
    PosField x, y;
    PosVec2() = default;
    explicit PosVec2(const PosGrid& g) : x(g), y(g) {}
};

struct PosVec3 {
    PosField x, y, z;
    PosVec3() = default;
    explicit PosVec3(const PosGrid& g) : x(g), y(g), z(g) {}
    PosField& comp(int i) { return i == 0 ? x : (i == 1 ? y : z); }
    const PosField& comp(int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

}  // namespace gm
