#pragma once

// Brute-force references the expansion formulas are tested against: the
// beta-ODE integration of the quantum exponential under truncated Moyal
// products, pointwise 2x2 matrix exponentials with directional derivatives,
// and moment quadrature re-exported from the quadrature module.

#include <cstdint>

#include "core/closure.hpp"
#include "core/pauli.hpp"

namespace gm {

struct OracleConfig {
    int moyal_truncation_order = 2;  // 0, 1 or 2
    int beta_steps = 128;            // RK4 substeps on [0, beta]
};

// g_eps(beta=1) solving d_beta g = (1/2)(h #_eps g + g #_eps h), g(0) = sigma_0,
// with #_eps truncated at cfg.moyal_truncation_order.
PauliField quantum_exp_ode(const PauliField& h, double eps, const OracleConfig& cfg,
                           double beta = 1.0);

// exp(M) for hermitian M via eigendecomposition (independent of the closed
// cosh/sinh route used by gexp_leading)
Mat2 matrix_exp_pointwise(const Mat2& m);
// directional derivative of exp at M along D (phi-function in the eigenbasis)
Mat2 matrix_exp_frechet(const Mat2& m, const Mat2& d);

// deterministic pseudo-random smooth periodic fields for property tests
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next();
    double uniform();                    // [0, 1)
    double uniform(double lo, double hi);
  private:
    std::uint64_t s_;
};

// trigonometric polynomial with |mode| <= max_mode in every direction
PhaseField random_smooth_field(const PhaseSpaceGrid& g, Rng& rng, double amplitude,
                               int max_mode = 2, int n_terms = 4);
PauliField random_smooth_symbol(const PhaseSpaceGrid& g, Rng& rng, double amplitude,
                                const std::array<double, 3>& vec_offset);

double sup_norm(const PauliField& a);
PauliField pauli_axpy(const PauliField& x, double alpha, const PauliField& y);  // x + alpha*y

// log-log least-squares slope of residual(eps)
double fitted_slope(const std::vector<double>& eps, const std::vector<double>& res);

}  // namespace gm
