#pragma once

// Moyal expansion terms #^(0), #^(1), #^(2), the Poisson bracket, and the
// pseudo-differential potential operator Theta_eps(V).
//
// Convention: #^(1) carries a factor i. Stored fields stay real, so
// moyal_term(1, f, g) returns the real kernel (1/2){f, g}; consumers that need
// the true product multiply by i (it always cancels in the symmetrized Pauli
// identities used here).

#include <functional>

#include "core/grid.hpp"

namespace gm {

PhaseField moyal_term(int k, const PhaseField& f1, const PhaseField& f2);
PhaseField poisson_bracket(const PhaseField& f, const PhaseField& g);

// Theta_eps(V) w = (i/eps)(2pi)^-2 \int dV~(r,xi) w(r,p') e^{-i(p-p')xi} dxi dp'
// realized spectrally in p. The r-shifted potentials V(r +- eps xi/2) come from
// Fourier interpolation of a sampled field, or from direct evaluation when the
// potential is analytic. Multiplier tables are built once; apply() is then two
// momentum FFTs per field.
class ThetaOperator {
  public:
    ThetaOperator(const PhaseSpaceGrid& grid, const PosField& V, double eps);
    ThetaOperator(const PhaseSpaceGrid& grid,
                  const std::function<double(double, double)>& V, double eps);

    PhaseField apply(const PhaseField& w) const;
    void apply_add(const PhaseField& w, double coef, PhaseField& out) const;

    const PhaseSpaceGrid& grid() const { return grid_; }
    double eps() const { return eps_; }

  private:
    void check_eps() const;
    PhaseSpaceGrid grid_;
    double eps_;
    std::vector<double> mult_;  // [r-major][xi-bucket] table of dV~/eps
};

}  // namespace gm
