#pragma once

// Spectral (FFT) calculus on the periodic position grid and the truncated
// momentum box. All derivatives zero the Nyquist mode. Momentum-direction
// transforms use the matched fft pair with wavenumbers 2*pi*k/(2*pmax); the
// half-cell offset of the p nodes cancels between forward and inverse.

#include "core/grid.hpp"

namespace gm {

// ---- position-grid operators ----
PosField pos_derivative(const PosField& f, int axis);          // axis 0 or 1
PosVec2 pos_gradient(const PosField& f);
PosField pos_laplacian(const PosField& f);
PosField pos_divergence(const PosVec2& v);
// f sampled on the grid, evaluated at r + (d1, d2) by Fourier interpolation
PosField pos_shift(const PosField& f, double d1, double d2);

// ---- phase-space operators; axis: 0=r1, 1=r2, 2=p1, 3=p2 ----
PhaseField phase_derivative(const PhaseField& f, int axis);

// derivative of several fields along one axis in a single parallel pass
void phase_derivative_many(int axis, const std::vector<const PhaseField*>& in,
                           const std::vector<PhaseField*>& out);

// All ten distinct second derivatives plus the four gradients of a field,
// reused heavily by the Moyal order-2 term and the expansion oracle.
struct PhaseDerivs {
    PhaseField d[4];        // first derivatives
    PhaseField dd[4][4];    // dd[i][j], filled for i <= j
    const PhaseField& second(int i, int j) const { return i <= j ? dd[i][j] : dd[j][i]; }
};
PhaseDerivs phase_derivs(const PhaseField& f, bool second_order);

}  // namespace gm
