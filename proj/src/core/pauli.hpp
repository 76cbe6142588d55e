#pragma once

// Pauli decomposition of hermitian 2x2 matrix-valued phase-space symbols.
// Symbols are stored component-wise as four real fields (sigma_0 part plus
// 3-vector part); the 2x2 complex form exists only in the oracle comparators.

#include <array>
#include <complex>

#include "core/fft.hpp"
#include "core/grid.hpp"
#include "core/spectral.hpp"

namespace gm {

// row-major 2x2 complex matrix [m00 m01; m10 m11]
using Mat2 = std::array<cplx, 4>;

// a_s = (1/2) tr(M sigma_s); errors NonHermitian beyond tol (relative)
std::array<double, 4> pauli_decompose(const Mat2& m, double tol_herm = 1e-12);
Mat2 pauli_compose(double a0, const std::array<double, 3>& av);

inline std::array<double, 3> wedge(const std::array<double, 3>& a,
                                   const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Matrix-valued symbol as four real component fields on one grid.
struct PauliField {
    PhaseField s0;
    std::array<PhaseField, 3> sv;

    PauliField() = default;
    explicit PauliField(const PhaseSpaceGrid& g) : s0(g), sv{PhaseField(g), PhaseField(g), PhaseField(g)} {}

    const PhaseSpaceGrid& grid() const { return s0.grid; }
    PhaseField& comp(int s) { return s == 0 ? s0 : sv[s - 1]; }
    const PhaseField& comp(int s) const { return s == 0 ? s0 : sv[s - 1]; }
};

void require_same(const PauliField& a, const PauliField& b, const char* what);

// pointwise wedge of the vector parts of two symbol fields
std::array<PhaseField, 3> wedge(const std::array<PhaseField, 3>& a,
                                const std::array<PhaseField, 3>& b);

// Cached spectral derivatives of all four components (second-order optional).
struct PauliDerivs {
    PhaseDerivs c[4];
    bool second = false;
};
PauliDerivs pauli_derivs(const PauliField& a, bool second_order);
// workspace-reusing variant: allocates d's fields only when missing
void pauli_derivs_into(const PauliField& a, bool second_order, PauliDerivs& d);

// (1/2)(a #^(k) b + b #^(k) a) in Pauli components, k in {0,1,2}.
// Even k: scalar a0#b0 + a.^#b, vector a0#b + b0#a. Odd k: scalar 0, vector
// i(a ^# b) which is real under the stored convention (#^(1) = i * real kernel).
PauliField sym_moyal_pauli(int k, const PauliField& a, const PauliField& b);

// Same, reusing caches; K-truncated Moyal series sum_k eps^k * sym_k(a, b).
PauliField sym_moyal_series(const PauliField& a, const PauliDerivs& ca,
                            const PauliField& b, const PauliDerivs& cb,
                            double eps, int order);
void sym_moyal_series_into(const PauliField& a, const PauliDerivs& ca,
                           const PauliField& b, const PauliDerivs& cb,
                           double eps, int order, PauliField& out);

// {f, g} from cached first derivatives
PhaseField poisson_bracket_cached(const PhaseSpaceGrid& g, const PhaseDerivs& f,
                                  const PhaseDerivs& h);

}  // namespace gm
