#pragma once

// Momentum-space moment extraction: tensor-product quadrature with uniform
// weights dp^2 on the half-offset nodes (trapezoid on a decaying integrand).
// Sums run in fixed index order per position node, so results do not depend
// on the thread count.

#include <functional>

#include "core/grid.hpp"

namespace gm {

// weight table over the momentum plane, wt[j1*np + j2] = fn(p(j1), p(j2))
std::vector<double> weight_table(const PhaseSpaceGrid& g,
                                 const std::function<double(double, double)>& fn);

PosField moment(const PhaseField& w);  // <w> = \int w dp
PosField moment_weighted(const PhaseField& w, const std::vector<double>& wt);

// <(p/|p|) . w_vec> restricted to the in-plane components
PosField moment_sigma(const PhaseField& w1, const PhaseField& w2);

// asserts decay at the momentum boundary: max over the outermost ring must be
// below rel_tol * max|w| (TailMass otherwise)
void check_tail(const PhaseField& w, double rel_tol = 1e-9);

// Grid radial moments of the Gaussian exp(-|p|^2/2):
//   I0 = <E>, I1 = <|p| E>, I2 = <|p|^2 E>,
//   mu = I1/I0 (continuum sqrt(pi/2)), m2hat = <(mu-|p|)^2 E>/I0 (continuum 2-pi/2).
// The closures use these grid values so the discrete moment constraints hold
// to solver precision; they converge to the continuum constants at O(dp^3).
struct RadialQuadrature {
    double I0 = 0, I1 = 0, I2 = 0;
    double mu = 0, m2hat = 0;
};
RadialQuadrature radial_quadrature(const PhaseSpaceGrid& g);

}  // namespace gm
