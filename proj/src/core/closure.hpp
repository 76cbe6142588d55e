#pragma once

// Entropy-minimization closure machinery: semiclassical expansions of the
// matrix quantum exponential, the semigroup operator, the four explicit
// equilibrium Wigner distributions, Lagrange-multiplier solves and the
// regularized special functions they need.

#include <array>
#include <optional>

#include "core/pauli.hpp"
#include "core/quadrature.hpp"

namespace gm {

// ------------------------------------------------------------------ params

struct PhysicalInputs {
    double mass = 0;         // m
    double v_fermi = 0;      // v_F
    double temperature = 0;  // T
    double tau_c = 0;        // mean free time
    double hbar = 0;
    double r_hat = 0;        // reference length
};

enum class ScalingKind { Diffusive, Hydrodynamic };

struct ModelParams {
    double eps = 0.05;   // semiclassical parameter (>= 0; 0 = classical limit)
    double gamma = 1.0;  // scaled Fermi speed ratio c/eps
    double tau = 0.1;    // diffusive or hydrodynamic relaxation parameter

    double gamma_hat() const;  // gamma * sqrt(pi/2)

    // derived reference scales, populated by from_physical (0 otherwise)
    double p_hat = 0, t_hat = 0, V_hat = 0, r_hat = 0, c = 0;

    void validate() const;
    static ModelParams from_physical(const PhysicalInputs& in, ScalingKind kind,
                                     double tau_override = -1.0);
};

// Gamma = (1/2pi) \int_0^inf e^{-rho^2/2} rho log rho drho, adaptive quadrature
// to < 1e-12 absolute (analytically (ln 2 - gamma_Euler)/(4 pi)).
double gamma_constant();

// omega = 1/log sqrt((n0+|n|)/(n0-|n|)); series branch keeps the products
// omega*x and omega*(1-x) accurate for x = nmag/n0 below 1e-3.
double omega_regularized(double n0, double nmag);
double omega_times_x(double x);  // x/atanh(x), smooth through x = 0

// stable small-argument kernels
double sinhc(double x);              // sinh x / x
double coshm1c(double x);            // (cosh x - 1)/x^2
double xcosh_minus_sinh(double x);   // (x cosh x - sinh x)/x^3  -> 1/3

// ------------------------------------------------ quantum exponential terms

// S_a(beta) applied to a 4-vector (scalar-limit safe)
std::array<double, 4> semigroup_apply(double a0, const std::array<double, 3>& avec,
                                      double beta, const std::array<double, 4>& x0);

// g^(0)(beta) = exp(beta a) pointwise (ExpOverflow above exponent 700)
PauliField gexp_leading(const PauliField& a, double beta);

// g^(1)(beta): first-order semiclassical correction of Exp(beta(a + eps b)).
// Poisson-bracket channels evaluated spectrally; |a_vec| -> 0 handled by the
// analytic limits, DegenerateVectorPart where a limit does not exist.
PauliField gexp_first_order(const PauliField& a, const PauliField& b, double beta,
                            double tol_avec = 1e-6);

// Second-order scalar correction Exp(beta a)^(2) for a smooth periodic scalar
// symbol (spectral derivatives in all four directions).
PhaseField scalar_exp2_correction(const PhaseField& a0, double beta);

// SMS-decoupled expansion through eps^2: scalar a, vectorial eps*b.
// exp2 may be null (scalar part then carries no eps^2 term beyond |b|^2).
PauliField gexp_sms(const PhaseField& a0, const std::array<PhaseField, 3>& bvec,
                    double beta, double eps, const PhaseField* exp2 = nullptr);
// PauliField front-end enforcing the decoupling (NotDecoupled otherwise)
PauliField gexp_sms(const PauliField& a, const PauliField& b, double beta, double eps,
                    const PhaseField* exp2 = nullptr);

// g~[n] = (n/2pi) e^{-|p|^2/2} [1 + (eps^2/24) div((I - p@p) grad log n)]
PhaseField scalar_quantum_maxwellian(const PosField& n, const PhaseSpaceGrid& grid, double eps);
// drifted variant with <g> = n, <p g> = J (flow u = J/n)
PhaseField scalar_quantum_maxwellian_drifted(const PosField& n, const PosVec2& J,
                                             const PhaseSpaceGrid& grid, double eps);

// ------------------------------------------------------------- equilibria

enum class ModelTag { QDE1, QDE2, QHE1, QHE2 };

struct EquilibriumDistribution {
    PauliField g;
    int order = 1;  // expansion order achieved in eps
    ModelTag tag = ModelTag::QDE1;
};

// Regularized spin-direction geometry shared by the hydrodynamic equilibrium
// (om) and the QHE fluxes: the matrix part of Z/Phi as wx*I + c2*n@n and the
// direction-derivative channel zg_k = omega(1-x)/(2 gamma |n|^2) (n ^ d_k n),
// all safe through |n| -> 0 (series below x = 1e-3, zero at x < 1e-12).
struct SpinGeometry {
    PosField wx;        // omega * x
    PosField c2;        // ((1 - x^2) - omega x)/|n|^2
    PosVec3 zg1, zg2;   // k = 1, 2 columns of the derivative channel
    PosField x;         // |n|/n0
};
SpinGeometry spin_geometry(const PosField& n0, const PosVec3& nvec, double gamma);

// omega(1-x) [ (div nhat) nhat - (nhat . grad) nhat ]; zero where the spin
// vector vanishes (the multiplier limit)
PosVec3 spin_direction_bracket(const PosField& n0, const PosVec3& nvec);

EquilibriumDistribution equilibrium_qde1(const PosField& n0, const PosField& nsigma,
                                         const ModelParams& par, const PhaseSpaceGrid& grid);
EquilibriumDistribution equilibrium_qde2(const PosField& n0, const PosField& nsigma,
                                         const ModelParams& par, const PhaseSpaceGrid& grid);
EquilibriumDistribution equilibrium_qhe1(const PosField& n0, const PosVec3& nvec,
                                         const PosVec2& Jvec, const ModelParams& par,
                                         const PhaseSpaceGrid& grid);
EquilibriumDistribution equilibrium_qhe2(const PosField& n0, const PosVec3& nvec,
                                         const PosVec2& Jvec, const ModelParams& par,
                                         const PhaseSpaceGrid& grid);

// ------------------------------------------------- multiplier constraint solve

struct DiffusiveMultipliers {
    PosField A;
    PosField B;
    int newton_iterations = 0;  // max over grid points, last outer pass
    int outer_iterations = 0;
};

// Newton solve of <g_pm(A,B)> = n_pm per grid point, with the nonlocal eps^2
// correction refreshed in an outer loop (it enters at the truncated order).
DiffusiveMultipliers solve_multipliers_diffusive(const PosField& n_plus, const PosField& n_minus,
                                                 const ModelParams& par, const PhaseSpaceGrid& grid);

// Equilibrium assembled from solved multipliers (round-trips the band densities).
PauliField sms_equilibrium_from_multipliers(const PosField& A, const PosField& B,
                                            const ModelParams& par, const PhaseSpaceGrid& grid);

}  // namespace gm
