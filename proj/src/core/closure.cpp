#include "core/closure.hpp"

#include <cmath>
#include <limits>

#include "core/parallel.hpp"
#include "core/spectral.hpp"

namespace gm {

namespace {
constexpr double kBoltzmann = 1.380649e-23;
constexpr double kExpGuard = 700.0;
constexpr double kPolGuard = 1e-6;  // |n_sigma| must stay below (1-kPolGuard)*n0

void require_positive(const PosField& n, const char* what) {
    for (double x : n.v)
        if (!(x > 0.0)) fail(ErrorCode::NonPositiveDensity, std::string(what) + " must be positive");
}
}  // namespace

double ModelParams::gamma_hat() const { return gamma * std::sqrt(M_PI / 2.0); }

void ModelParams::validate() const {
    if (!(eps >= 0.0) || !std::isfinite(eps))
        fail(ErrorCode::ValidationError, "epsilon must be finite and >= 0");
    if (!(gamma > 0.0)) fail(ErrorCode::ValidationError, "gamma must be positive");
    if (!(tau > 0.0)) fail(ErrorCode::ValidationError, "tau must be positive");
}

ModelParams ModelParams::from_physical(const PhysicalInputs& in, ScalingKind kind,
                                       double tau_override) {
    if (!(in.mass > 0 && in.v_fermi > 0 && in.temperature > 0 && in.tau_c > 0 &&
          in.hbar > 0 && in.r_hat > 0))
        fail(ErrorCode::ValidationError, "physical inputs must all be positive");
    ModelParams p;
    p.p_hat = std::sqrt(in.mass * kBoltzmann * in.temperature);
    p.r_hat = in.r_hat;
    p.eps = in.hbar / (in.r_hat * p.p_hat);
    p.c = std::sqrt(in.mass * in.v_fermi * in.v_fermi / (kBoltzmann * in.temperature));
    p.gamma = p.c / p.eps;
    if (kind == ScalingKind::Diffusive) {
        p.tau = 2.0 * p.p_hat * in.v_fermi * in.tau_c / in.hbar;
        double w = 2.0 * p.p_hat * in.v_fermi / in.hbar;  // fast frequency
        p.t_hat = 1.0 / (w * w * in.tau_c);
    } else {
        p.t_hat = in.hbar / (2.0 * in.v_fermi * p.p_hat);
        p.tau = in.tau_c / p.t_hat;
    }
    p.V_hat = 2.0 * in.v_fermi * p.p_hat * p.p_hat * in.r_hat / in.hbar;
    if (tau_override > 0) p.tau = tau_override;
    p.validate();
    return p;
}

// ------------------------------------------------------------ special kernels

double sinhc(double x) {
    double ax = std::fabs(x);
    if (ax < 1e-2) {
        double x2 = x * x;
        return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0));
    }
    return std::sinh(x) / x;
}

double coshm1c(double x) {
    double ax = std::fabs(x);
    if (ax < 1e-2) {
        double x2 = x * x;
        return 0.5 + x2 / 24.0 * (1.0 + x2 / 30.0);
    }
    return (std::cosh(x) - 1.0) / (x * x);
}

double xcosh_minus_sinh(double x) {
    double ax = std::fabs(x);
    if (ax < 2e-2) {
        double x2 = x * x;
        return (1.0 / 3.0) + x2 / 30.0 + x2 * x2 / 840.0;
    }
    return (x * std::cosh(x) - std::sinh(x)) / (x * x * x);
}

double omega_times_x(double x) {
    if (x < 0.0) fail(ErrorCode::DomainError, "omega argument must be nonnegative");
    if (x < 1e-3) {
        double x2 = x * x;
        return 1.0 - x2 / 3.0 - 4.0 * x2 * x2 / 45.0 - 44.0 * x2 * x2 * x2 / 945.0;
    }
    if (x >= 1.0) fail(ErrorCode::DomainError, "omega argument must be below 1");
    return x / std::atanh(x);
}

double omega_regularized(double n0, double nmag) {
    if (!(n0 > 0.0)) fail(ErrorCode::DomainError, "omega needs n0 > 0");
    if (nmag < 0.0 || nmag >= n0)
        fail(ErrorCode::DomainError, "omega needs 0 <= |n| < n0");
    if (nmag == 0.0) return std::numeric_limits<double>::infinity();
    double x = nmag / n0;
    return omega_times_x(x) / x;
}

// ------------------------------------------------------------ gamma constant

namespace {
double gamma_integrand(double rho) {
    if (rho <= 0.0) return 0.0;
    return std::exp(-0.5 * rho * rho) * rho * std::log(rho) / (2.0 * M_PI);
}

double adsimp(double a, double b, double fa, double fm, double fb, double whole,
              double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = gamma_integrand(lm), frm = gamma_integrand(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adsimp(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adsimp(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double gamma_constant() {
    static const double value = [] {
        // panelized so the adaptive refinement sees the mass near rho ~ 1
        double total = 0.0;
        const double edges[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0};
        for (int p = 0; p + 1 < int(sizeof(edges) / sizeof(double)); ++p) {
            double a = edges[p], b = edges[p + 1];
            double fa = gamma_integrand(a), fb = gamma_integrand(b);
            double m = 0.5 * (a + b), fm = gamma_integrand(m);
            double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            total += adsimp(a, b, fa, fm, fb, whole, 2e-14, 40);
        }
        return total;
    }();
    return value;
}

// ------------------------------------------------------- semigroup, leading

std::array<double, 4> semigroup_apply(double a0, const std::array<double, 3>& a,
                                      double beta, const std::array<double, 4>& x0) {
    double am = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    double xi = beta * am;
    double e = std::exp(beta * a0);
    double ch = std::cosh(xi);
    double sb = beta * sinhc(xi);        // sinh(beta am)/am
    double cb = beta * beta * coshm1c(xi);  // (cosh(beta am)-1)/am^2
    double adx = a[0] * x0[1] + a[1] * x0[2] + a[2] * x0[3];
    std::array<double, 4> out;
    out[0] = e * (ch * x0[0] + sb * adx);
    for (int s = 0; s < 3; ++s)
        out[1 + s] = e * (sb * x0[0] * a[s] + x0[1 + s] + cb * adx * a[s]);
    return out;
}

PauliField gexp_leading(const PauliField& a, double beta) {
    PauliField out(a.grid());
    const std::size_t n = a.s0.size();
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double a0 = a.s0.v[i];
            double a1 = a.sv[0].v[i], a2 = a.sv[1].v[i], a3 = a.sv[2].v[i];
            double am = std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
            double xi = beta * am;
            if (beta * a0 + xi > kExpGuard)
                fail(ErrorCode::ExpOverflow, "exponent above overflow guard in gexp_leading");
            double e = std::exp(beta * a0);
            double sb = beta * sinhc(xi);
            out.s0.v[i] = e * std::cosh(xi);
            out.sv[0].v[i] = e * sb * a1;
            out.sv[1].v[i] = e * sb * a2;
            out.sv[2].v[i] = e * sb * a3;
        }
    });
    return out;
}

// ------------------------------------------------------- first-order term

PauliField gexp_first_order(const PauliField& a, const PauliField& b, double beta,
                            double tol_avec) {
    require_same(a, b, "gexp_first_order");
    const auto& grid = a.grid();
    const std::size_t n = a.s0.size();

    PauliDerivs da = pauli_derivs(a, false);
    PhaseField b23 = poisson_bracket_cached(grid, da.c[2], da.c[3]);  // {a_2, a_3}
    PhaseField b31 = poisson_bracket_cached(grid, da.c[3], da.c[1]);  // {a_3, a_1}
    PhaseField b12 = poisson_bracket_cached(grid, da.c[1], da.c[2]);  // {a_1, a_2}
    std::array<PhaseField, 3> C{poisson_bracket_cached(grid, da.c[0], da.c[1]),
                                poisson_bracket_cached(grid, da.c[0], da.c[2]),
                                poisson_bracket_cached(grid, da.c[0], da.c[3])};

    // scales for the degenerate-point policy
    double amax = 0.0, qmax = 0.0;
    {
        std::vector<double> am2(n);
        for (std::size_t i = 0; i < n; ++i) {
            double a1 = a.sv[0].v[i], a2 = a.sv[1].v[i], a3 = a.sv[2].v[i];
            am2[i] = a1 * a1 + a2 * a2 + a3 * a3;
        }
        amax = std::sqrt(max_abs(am2.data(), n));
        qmax = std::max({max_abs(b23.v.data(), n), max_abs(b31.v.data(), n),
                         max_abs(b12.v.data(), n)});
    }
    const double athr = tol_avec * std::max(1.0, amax);
    const double qthr = 1e-12 * std::max(1.0, qmax) * std::max(1.0, amax);

    PauliField out(grid);
    parallel_for_chunks(n, 4096, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double a0 = a.s0.v[i];
            double av[3] = {a.sv[0].v[i], a.sv[1].v[i], a.sv[2].v[i]};
            double bv[3] = {b.sv[0].v[i], b.sv[1].v[i], b.sv[2].v[i]};
            double b0 = b.s0.v[i];
            double am2 = av[0] * av[0] + av[1] * av[1] + av[2] * av[2];
            double am = std::sqrt(am2);
            double xi = beta * am;
            if (beta * a0 + xi > kExpGuard)
                fail(ErrorCode::ExpOverflow, "exponent above overflow guard in gexp_first_order");
            double e = std::exp(beta * a0);
            double ch = std::cosh(xi);
            double sc = sinhc(xi);
            double h2 = xcosh_minus_sinh(xi);
            double adb = av[0] * bv[0] + av[1] * bv[1] + av[2] * bv[2];
            // antisymmetric bracket tensor as its axial components
            double Bx = b23.v[i], By = b31.v[i], Bz = b12.v[i];
            double Q = 2.0 * (Bx * av[0] + By * av[1] + Bz * av[2]);
            // W_s = a_j {a_j, a_s}; with d = (Bx,By,Bz): W = d x a
            double W[3] = {By * av[2] - Bz * av[1], Bz * av[0] - Bx * av[2],
                           Bx * av[1] - By * av[0]};
            double Cv[3] = {C[0].v[i], C[1].v[i], C[2].v[i]};
            double Wxa[3] = {W[1] * av[2] - W[2] * av[1], W[2] * av[0] - W[0] * av[2],
                             W[0] * av[1] - W[1] * av[0]};
            double Cxa[3] = {Cv[1] * av[2] - Cv[2] * av[1], Cv[2] * av[0] - Cv[0] * av[2],
                             Cv[0] * av[1] - Cv[1] * av[0]};
            double b3 = beta * beta * beta;

            out.s0.v[i] = beta * e * (ch * b0 + beta * sc * adb) - e * b3 * h2 * Q / 4.0;

            double sing[3] = {0.0, 0.0, 0.0};
            if (am >= athr) {
                double inv = 1.0 / am2;
                for (int s = 0; s < 3; ++s)
                    sing[s] = beta * beta * e * sc * inv *
                              (-0.25 * Q * av[s] + 0.5 * Wxa[s]);
            } else {
                // the bracket channels have no finite limit unless they vanish
                double num = std::fabs(Q) * am;
                for (int s = 0; s < 3; ++s)
                    num = std::max(num, std::fabs(Wxa[s]));
                if (num > qthr * std::max(am, athr))
                    fail(ErrorCode::DegenerateVectorPart,
                         "vanishing |a_vec| with non-vanishing bracket terms");
            }
            for (int s = 0; s < 3; ++s) {
                double smooth = beta * beta * e * sc * b0 * av[s] + beta * e * sc * bv[s] +
                                b3 * e * h2 * adb * av[s] + 0.5 * b3 * e * h2 * Cxa[s];
                out.sv[s].v[i] = smooth + sing[s];
            }
        }
    });
    return out;
}

// --------------------------------------------------- scalar eps^2 correction

PhaseField scalar_exp2_correction(const PhaseField& a0, double beta) {
    PhaseDerivs d = phase_derivs(a0, true);
    PhaseField out(a0.grid);
    const std::size_t n = a0.size();
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double t1 = 0.0, t2 = 0.0;
            for (int j = 0; j < 2; ++j)
                for (int s = 0; s < 2; ++s) {
                    t1 += d.second(j, s).v[i] * d.second(2 + j, 2 + s).v[i] -
                          d.second(j, 2 + s).v[i] * d.second(2 + j, s).v[i];
                    t2 += d.second(j, s).v[i] * d.d[2 + j].v[i] * d.d[2 + s].v[i] -
                          2.0 * d.second(j, 2 + s).v[i] * d.d[2 + j].v[i] * d.d[s].v[i] +
                          d.second(2 + j, 2 + s).v[i] * d.d[j].v[i] * d.d[s].v[i];
                }
            t1 *= 2.0;
            if (beta * a0.v[i] > kExpGuard)
                fail(ErrorCode::ExpOverflow, "exponent above overflow guard in exp2 correction");
            out.v[i] = -std::exp(beta * a0.v[i]) *
                       (beta * beta * t1 / 16.0 + beta * beta * beta * t2 / 24.0);
        }
    });
    return out;
}

// -------------------------------------------------------------- SMS expansion

PauliField gexp_sms(const PhaseField& a0, const std::array<PhaseField, 3>& bvec,
                    double beta, double eps, const PhaseField* exp2) {
    PauliField out(a0.grid);
    const std::size_t n = a0.size();
    const double e2 = eps * eps;
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            if (beta * a0.v[i] > kExpGuard)
                fail(ErrorCode::ExpOverflow, "exponent above overflow guard in gexp_sms");
            double e = std::exp(beta * a0.v[i]);
            double b2 = bvec[0].v[i] * bvec[0].v[i] + bvec[1].v[i] * bvec[1].v[i] +
                        bvec[2].v[i] * bvec[2].v[i];
            double s0 = e * (1.0 + 0.5 * e2 * beta * beta * b2);
            if (exp2) s0 += e2 * exp2->v[i];
            out.s0.v[i] = s0;
            for (int s = 0; s < 3; ++s) out.sv[s].v[i] = eps * beta * e * bvec[s].v[i];
        }
    });
    return out;
}

PauliField gexp_sms(const PauliField& a, const PauliField& b, double beta, double eps,
                    const PhaseField* exp2) {
    require_same(a, b, "gexp_sms");
    const std::size_t n = a.s0.size();
    double va = 0.0, sb = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        va = std::max({va, std::fabs(a.sv[0].v[i]), std::fabs(a.sv[1].v[i]),
                       std::fabs(a.sv[2].v[i])});
        sb = std::max(sb, std::fabs(b.s0.v[i]));
        scale = std::max({scale, std::fabs(a.s0.v[i]), std::fabs(b.sv[0].v[i]),
                          std::fabs(b.sv[1].v[i]), std::fabs(b.sv[2].v[i])});
    }
    if (va > 1e-12 * std::max(1.0, scale) || sb > 1e-12 * std::max(1.0, scale))
        fail(ErrorCode::NotDecoupled,
             "gexp_sms needs a scalar first symbol and a purely vectorial second symbol");
    return gexp_sms(a.s0, b.sv, beta, eps, exp2);
}

// ------------------------------------------------------- quantum Maxwellians

namespace {
struct LogDerivs {
    PosField l11, l12, l22, lap;
};

LogDerivs log_derivs(const PosField& n) {
    PosField logn(n.grid);
    for (std::size_t i = 0; i < n.size(); ++i) logn.v[i] = std::log(n.v[i]);
    LogDerivs d;
    PosField g1 = pos_derivative(logn, 0);
    PosField g2 = pos_derivative(logn, 1);
    d.l11 = pos_derivative(g1, 0);
    d.l12 = pos_derivative(g1, 1);
    d.l22 = pos_derivative(g2, 1);
    d.lap = d.l11;
    for (std::size_t i = 0; i < n.size(); ++i) d.lap.v[i] += d.l22.v[i];
    return d;
}
}  // namespace

PhaseField scalar_quantum_maxwellian(const PosField& n, const PhaseSpaceGrid& grid, double eps) {
    require_same(n.grid, grid.pos(), "scalar_quantum_maxwellian");
    require_positive(n, "density");
    LogDerivs d = log_derivs(n);
    PhaseField out(grid);
    const std::size_t P = grid.psize(), np = grid.np;
    const double c24 = eps * eps / 24.0;
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double nr = n.v[ir] / (2.0 * M_PI);
        double l11 = d.l11.v[ir], l12 = d.l12.v[ir], l22 = d.l22.v[ir], lap = d.lap.v[ir];
        double* dst = &out.v[ir * P];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double p1 = grid.p(j1);
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double p2 = grid.p(j2);
                double corr = lap - (p1 * p1 * l11 + 2.0 * p1 * p2 * l12 + p2 * p2 * l22);
                dst[j1 * np + j2] =
                    nr * std::exp(-0.5 * (p1 * p1 + p2 * p2)) * (1.0 + c24 * corr);
            }
        }
    });
    return out;
}

PhaseField scalar_quantum_maxwellian_drifted(const PosField& n, const PosVec2& J,
                                             const PhaseSpaceGrid& grid, double eps) {
    require_same(n.grid, grid.pos(), "scalar_quantum_maxwellian_drifted");
    require_positive(n, "density");
    LogDerivs d = log_derivs(n);
    PhaseField out(grid);
    const std::size_t P = grid.psize(), np = grid.np;
    const double c24 = eps * eps / 24.0;
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double nr = n.v[ir] / (2.0 * M_PI);
        double u1 = J.x.v[ir] / n.v[ir], u2 = J.y.v[ir] / n.v[ir];
        double l11 = d.l11.v[ir], l12 = d.l12.v[ir], l22 = d.l22.v[ir], lap = d.lap.v[ir];
        double* dst = &out.v[ir * P];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double q1 = grid.p(j1) - u1;
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double q2 = grid.p(j2) - u2;
                double corr = lap - (q1 * q1 * l11 + 2.0 * q1 * q2 * l12 + q2 * q2 * l22);
                dst[j1 * np + j2] =
                    nr * std::exp(-0.5 * (q1 * q1 + q2 * q2)) * (1.0 + c24 * corr);
            }
        }
    });
    return out;
}

// ------------------------------------------------------------- equilibria

namespace {
void check_polarization(const PosField& n0, const PosField& mag, const char* what) {
    for (std::size_t i = 0; i < n0.size(); ++i)
        if (std::fabs(mag.v[i]) >= (1.0 - kPolGuard) * n0.v[i])
            fail(ErrorCode::PolarizationOverflow,
                 std::string(what) + ": polarization reaches the particle density");
}
}  // namespace

EquilibriumDistribution equilibrium_qde1(const PosField& n0, const PosField& nsigma,
                                         const ModelParams& par, const PhaseSpaceGrid& grid) {
    require_same(n0.grid, grid.pos(), "equilibrium_qde1");
    require_same(n0.grid, nsigma.grid, "equilibrium_qde1");
    require_positive(n0, "n0");
    check_polarization(n0, nsigma, "equilibrium_qde1");
    par.validate();

    const RadialQuadrature rq = radial_quadrature(grid);
    const double eg = par.eps * par.gamma;

    // F vector of (F): needs |n_sigma|, atanh(|n_sigma|/n0), n0 + sqrt(n0^2-ns^2)
    PosField absns(n0.grid), lg(n0.grid), root(n0.grid);
    for (std::size_t i = 0; i < n0.size(); ++i) {
        double m = std::fabs(nsigma.v[i]);
        absns.v[i] = m;
        lg.v[i] = std::atanh(m / n0.v[i]);
        root.v[i] = n0.v[i] + std::sqrt(n0.v[i] * n0.v[i] - nsigma.v[i] * nsigma.v[i]);
    }
    PosVec2 gabs = pos_gradient(absns);
    PosVec2 groot = pos_gradient(root);
    PosField F1(n0.grid), F2(n0.grid);
    for (std::size_t i = 0; i < n0.size(); ++i) {
        F1.v[i] = -0.5 * (gabs.x.v[i] - lg.v[i] * groot.x.v[i]);
        F2.v[i] = -0.5 * (gabs.y.v[i] - lg.v[i] * groot.y.v[i]);
    }

    EquilibriumDistribution eq;
    eq.g = PauliField(grid);
    eq.order = 1;
    eq.tag = ModelTag::QDE1;
    const std::size_t P = grid.psize(), np = grid.np;
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double nn = n0.v[ir], ns = nsigma.v[ir];
        double f1 = F1.v[ir], f2 = F2.v[ir];
        double* g0 = &eq.g.s0.v[ir * P];
        double* g1 = &eq.g.sv[0].v[ir * P];
        double* g2 = &eq.g.sv[1].v[ir * P];
        double* g3 = &eq.g.sv[2].v[ir * P];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double p1 = grid.p(j1);
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double p2 = grid.p(j2);
                double pm2 = p1 * p1 + p2 * p2;
                double pm = std::sqrt(pm2);
                double E = std::exp(-0.5 * pm2) / (2.0 * M_PI);
                double prof = eg * (rq.mu - pm);
                std::size_t j = j1 * np + j2;
                g0[j] = E * (nn + prof * ns);
                double vpar = (ns + prof * nn) / pm;
                g1[j] = E * vpar * p1;
                g2[j] = E * vpar * p2;
                // (F ^ p)/|p|^2 has only the out-of-plane component
                g3[j] = E * par.eps * (f1 * p2 - f2 * p1) / pm2;
            }
        }
    });
    return eq;
}

EquilibriumDistribution equilibrium_qde2(const PosField& n0, const PosField& nsigma,
                                         const ModelParams& par, const PhaseSpaceGrid& grid) {
    require_same(n0.grid, grid.pos(), "equilibrium_qde2");
    require_same(n0.grid, nsigma.grid, "equilibrium_qde2");
    require_positive(n0, "n0");
    par.validate();
    if (par.eps <= 0.0) fail(ErrorCode::NonPositiveEpsilon, "equilibrium_qde2 needs eps > 0");

    const RadialQuadrature rq = radial_quadrature(grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < n0.size(); ++i)
        worst = std::max(worst, std::fabs(nsigma.v[i] / n0.v[i]));
    if (worst > 10.0 * par.eps)
        warn("equilibrium_qde2: |n_sigma/n0| = " + std::to_string(worst) +
             " exceeds 10*eps; the SMS expansion degrades");

    const double eg = par.eps * par.gamma;
    PosField arg(n0.grid);
    for (std::size_t i = 0; i < n0.size(); ++i) {
        double sr = nsigma.v[i] / n0.v[i];
        arg.v[i] = n0.v[i] * (1.0 - 0.5 * (eg * eg * rq.m2hat + sr * sr));
        if (!(arg.v[i] > 0.0))
            fail(ErrorCode::NonPositiveDensity, "equilibrium_qde2: corrected density not positive");
    }
    PhaseField gt = scalar_quantum_maxwellian(arg, grid, par.eps);

    EquilibriumDistribution eq;
    eq.g = PauliField(grid);
    eq.order = 2;
    eq.tag = ModelTag::QDE2;
    const std::size_t P = grid.psize(), np = grid.np;
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double nn = n0.v[ir], sr = nsigma.v[ir] / n0.v[ir];
        const double* gtp = &gt.v[ir * P];
        double* g0 = &eq.g.s0.v[ir * P];
        double* g1 = &eq.g.sv[0].v[ir * P];
        double* g2 = &eq.g.sv[1].v[ir * P];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double p1 = grid.p(j1);
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double p2 = grid.p(j2);
                double pm = std::sqrt(p1 * p1 + p2 * p2);
                double E = std::exp(-0.5 * (p1 * p1 + p2 * p2));
                double bracket = eg * (rq.mu - pm) + sr;
                std::size_t j = j1 * np + j2;
                g0[j] = gtp[j] + nn / (4.0 * M_PI) * E * bracket * bracket;
                double vpar = par.eps * nn / (2.0 * M_PI) * E *
                              (sr / par.eps + par.gamma * (rq.mu - pm)) / pm;
                g1[j] = vpar * p1;
                g2[j] = vpar * p2;
            }
        }
    });
    return eq;
}

SpinGeometry spin_geometry(const PosField& n0, const PosVec3& nv, double gamma) {
    SpinGeometry s;
    s.wx = PosField(n0.grid);
    s.c2 = PosField(n0.grid);
    s.x = PosField(n0.grid);
    s.zg1 = PosVec3(n0.grid);
    s.zg2 = PosVec3(n0.grid);
    PosVec3 d1, d2;
    for (int c = 0; c < 3; ++c) {
        d1.comp(c) = pos_derivative(nv.comp(c), 0);
        d2.comp(c) = pos_derivative(nv.comp(c), 1);
    }
    for (std::size_t i = 0; i < n0.size(); ++i) {
        double nn = n0.v[i];
        double m1 = nv.x.v[i], m2 = nv.y.v[i], m3 = nv.z.v[i];
        double mag2 = m1 * m1 + m2 * m2 + m3 * m3;
        double mag = std::sqrt(mag2);
        double x = mag / nn;
        s.x.v[i] = x;
        double wx = omega_times_x(x);
        s.wx.v[i] = wx;
        // ((1-x^2) - wx)/|n|^2, series through the x -> 0 limit -2/(3 n0^2)
        if (x < 1e-3) {
            double x2 = x * x;
            s.c2.v[i] = (-2.0 / 3.0 + 4.0 * x2 / 45.0 + 44.0 * x2 * x2 / 945.0) / (nn * nn);
        } else {
            s.c2.v[i] = ((1.0 - x * x) - wx) / mag2;
        }
        // omega(1-x)/(2 gamma |n|^2) * (n ^ d_k n); zero where the spin vanishes
        if (x < 1e-12) continue;
        double coef = wx * (1.0 - x) * nn / (2.0 * gamma * mag2 * mag);
        double g1x = m2 * d1.z.v[i] - m3 * d1.y.v[i];
        double g1y = m3 * d1.x.v[i] - m1 * d1.z.v[i];
        double g1z = m1 * d1.y.v[i] - m2 * d1.x.v[i];
        double g2x = m2 * d2.z.v[i] - m3 * d2.y.v[i];
        double g2y = m3 * d2.x.v[i] - m1 * d2.z.v[i];
        double g2z = m1 * d2.y.v[i] - m2 * d2.x.v[i];
        s.zg1.x.v[i] = coef * g1x;
        s.zg1.y.v[i] = coef * g1y;
        s.zg1.z.v[i] = coef * g1z;
        s.zg2.x.v[i] = coef * g2x;
        s.zg2.y.v[i] = coef * g2y;
        s.zg2.z.v[i] = coef * g2z;
    }
    return s;
}

PosVec3 spin_direction_bracket(const PosField& n0, const PosVec3& nv) {
    PosVec3 out(n0.grid);
    PosVec3 d1, d2;
    for (int c = 0; c < 3; ++c) {
        d1.comp(c) = pos_derivative(nv.comp(c), 0);
        d2.comp(c) = pos_derivative(nv.comp(c), 1);
    }
    for (std::size_t i = 0; i < n0.size(); ++i) {
        double m1 = nv.x.v[i], m2 = nv.y.v[i], m3 = nv.z.v[i];
        double mag = std::sqrt(m1 * m1 + m2 * m2 + m3 * m3);
        double x = mag / n0.v[i];
        if (x < 1e-12) continue;
        double omega = omega_times_x(x) / x;
        double nh[3] = {m1 / mag, m2 / mag, m3 / mag};
        // d_k nhat_s = d_k n_s/|n| - nhat_s (nhat . d_k n)/|n|
        double dk[2][3] = {{d1.x.v[i], d1.y.v[i], d1.z.v[i]},
                           {d2.x.v[i], d2.y.v[i], d2.z.v[i]}};
        double dnh[2][3];
        for (int k = 0; k < 2; ++k) {
            double proj = nh[0] * dk[k][0] + nh[1] * dk[k][1] + nh[2] * dk[k][2];
            for (int s = 0; s < 3; ++s) dnh[k][s] = (dk[k][s] - nh[s] * proj) / mag;
        }
        double div_nh = dnh[0][0] + dnh[1][1];
        double coef = omega * (1.0 - x);
        for (int s = 0; s < 3; ++s) {
            double advect = nh[0] * dnh[0][s] + nh[1] * dnh[1][s];
            out.comp(s).v[i] = coef * (div_nh * nh[s] - advect);
        }
    }
    return out;
}

EquilibriumDistribution equilibrium_qhe1(const PosField& n0, const PosVec3& nvec,
                                         const PosVec2& Jvec, const ModelParams& par,
                                         const PhaseSpaceGrid& grid) {
    require_same(n0.grid, grid.pos(), "equilibrium_qhe1");
    require_positive(n0, "n0");
    par.validate();
    PosField mag(n0.grid);
    for (std::size_t i = 0; i < n0.size(); ++i)
        mag.v[i] = std::sqrt(nvec.x.v[i] * nvec.x.v[i] + nvec.y.v[i] * nvec.y.v[i] +
                             nvec.z.v[i] * nvec.z.v[i]);
    check_polarization(n0, mag, "equilibrium_qhe1");

    SpinGeometry geo = spin_geometry(n0, nvec, par.gamma);
    EquilibriumDistribution eq;
    eq.g = PauliField(grid);
    eq.order = 1;
    eq.tag = ModelTag::QHE1;
    const std::size_t P = grid.psize(), np = grid.np;
    const double eg = par.eps * par.gamma;
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double nn = n0.v[ir];
        double u1 = Jvec.x.v[ir] / nn, u2 = Jvec.y.v[ir] / nn;
        double m[3] = {nvec.x.v[ir], nvec.y.v[ir], nvec.z.v[ir]};
        double wx = geo.wx.v[ir], c2 = geo.c2.v[ir];
        double zg1[3] = {geo.zg1.x.v[ir], geo.zg1.y.v[ir], geo.zg1.z.v[ir]};
        double zg2[3] = {geo.zg2.x.v[ir], geo.zg2.y.v[ir], geo.zg2.z.v[ir]};
        double* g0 = &eq.g.s0.v[ir * P];
        double* gs[3] = {&eq.g.sv[0].v[ir * P], &eq.g.sv[1].v[ir * P], &eq.g.sv[2].v[ir * P]};
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double q1 = grid.p(j1) - u1;
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double q2 = grid.p(j2) - u2;
                double E = nn / (2.0 * M_PI) * std::exp(-0.5 * (q1 * q1 + q2 * q2));
                double ndq = m[0] * q1 + m[1] * q2;  // n . (p-u), in-plane
                std::size_t j = j1 * np + j2;
                g0[j] = E;
                for (int s = 0; s < 3; ++s) {
                    double zq = (s < 2 ? wx * (s == 0 ? q1 : q2) : 0.0) + c2 * m[s] * ndq +
                                q1 * zg1[s] + q2 * zg2[s];
                    gs[s][j] = E * (m[s] / nn - eg * zq);
                }
            }
        }
    });
    return eq;
}

EquilibriumDistribution equilibrium_qhe2(const PosField& n0, const PosVec3& nvec,
                                         const PosVec2& Jvec, const ModelParams& par,
                                         const PhaseSpaceGrid& grid) {
    require_same(n0.grid, grid.pos(), "equilibrium_qhe2");
    require_positive(n0, "n0");
    par.validate();

    const double eg = par.eps * par.gamma;
    PosField nprime(n0.grid);
    PosVec2 jprime(n0.grid);
    for (std::size_t i = 0; i < n0.size(); ++i) {
        double nn = n0.v[i];
        double x2 = (nvec.x.v[i] * nvec.x.v[i] + nvec.y.v[i] * nvec.y.v[i] +
                     nvec.z.v[i] * nvec.z.v[i]) / (nn * nn);
        double d = 0.5 * x2 + eg * eg;
        nprime.v[i] = nn * (1.0 - d);
        if (!(nprime.v[i] > 0.0))
            fail(ErrorCode::NonPositiveDensity, "equilibrium_qhe2: corrected density not positive");
        jprime.x.v[i] = Jvec.x.v[i] + eg * nvec.x.v[i] - d * Jvec.x.v[i];
        jprime.y.v[i] = Jvec.y.v[i] + eg * nvec.y.v[i] - d * Jvec.y.v[i];
    }
    PhaseField ghat = scalar_quantum_maxwellian_drifted(nprime, jprime, grid, par.eps);

    EquilibriumDistribution eq;
    eq.g = PauliField(grid);
    eq.order = 2;
    eq.tag = ModelTag::QHE2;
    const std::size_t P = grid.psize(), np = grid.np;
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double nn = n0.v[ir];
        double u1 = Jvec.x.v[ir] / nn, u2 = Jvec.y.v[ir] / nn;
        double m[3] = {nvec.x.v[ir] / nn, nvec.y.v[ir] / nn, nvec.z.v[ir] / nn};
        const double* gh = &ghat.v[ir * P];
        double* g0 = &eq.g.s0.v[ir * P];
        double* gs[3] = {&eq.g.sv[0].v[ir * P], &eq.g.sv[1].v[ir * P], &eq.g.sv[2].v[ir * P]};
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double q1 = grid.p(j1) - u1;
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double q2 = grid.p(j2) - u2;
                double E = std::exp(-0.5 * (q1 * q1 + q2 * q2));
                double v1 = m[0] - eg * q1, v2 = m[1] - eg * q2, v3 = m[2];
                std::size_t j = j1 * np + j2;
                g0[j] = gh[j] + nn / (4.0 * M_PI) * E * (v1 * v1 + v2 * v2 + v3 * v3);
                gs[0][j] = nn / (2.0 * M_PI) * E * v1;
                gs[1][j] = nn / (2.0 * M_PI) * E * v2;
                gs[2][j] = nn / (2.0 * M_PI) * E * v3;
            }
        }
    });
    return eq;
}

// --------------------------------------------------------- multiplier solve

DiffusiveMultipliers solve_multipliers_diffusive(const PosField& n_plus, const PosField& n_minus,
                                                 const ModelParams& par, const PhaseSpaceGrid& grid) {
    require_same(n_plus.grid, grid.pos(), "solve_multipliers_diffusive");
    require_same(n_plus.grid, n_minus.grid, "solve_multipliers_diffusive");
    require_positive(n_plus, "n_plus");
    require_positive(n_minus, "n_minus");
    par.validate();
    if (par.eps <= 0.0) fail(ErrorCode::NonPositiveEpsilon, "multiplier solve needs eps > 0");

    const RadialQuadrature rq = radial_quadrature(grid);
    const double I0 = rq.I0, I1 = rq.I1, I2 = rq.I2, Ipp = 0.5 * rq.I2;
    const double eps = par.eps, gamma = par.gamma;
    const std::size_t nn = n_plus.size();

    PosField n0f(n_plus.grid), nsf(n_plus.grid);
    for (std::size_t i = 0; i < nn; ++i) {
        n0f.v[i] = 0.5 * (n_plus.v[i] + n_minus.v[i]);
        nsf.v[i] = 0.5 * (n_plus.v[i] - n_minus.v[i]);
    }

    DiffusiveMultipliers out;
    out.A = PosField(n_plus.grid);
    out.B = PosField(n_plus.grid);
    for (std::size_t i = 0; i < nn; ++i) {
        out.A.v[i] = -std::log(n0f.v[i] / (2.0 * M_PI));
        out.B.v[i] = -nsf.v[i] / (eps * n0f.v[i]) - gamma * std::sqrt(M_PI / 2.0);
    }

    PosField kappa(n_plus.grid);  // frozen derivative correction, refreshed outer
    std::vector<int> iters(nn, 0);
    for (int outer = 0; outer < 25; ++outer) {
        PosField lapA = pos_laplacian(out.A);
        PosVec2 gA = pos_gradient(out.A);
        for (std::size_t i = 0; i < nn; ++i) {
            double g2 = gA.x.v[i] * gA.x.v[i] + gA.y.v[i] * gA.y.v[i];
            kappa.v[i] = lapA.v[i] * I0 / 8.0 - (lapA.v[i] * Ipp + g2 * I0) / 24.0;
        }
        double max_da = 0.0;
        std::vector<double> da_blocks((nn + 4095) / 4096, 0.0);
        parallel_for_chunks(nn, 4096, [&](std::size_t lo, std::size_t hi) {
            double blk = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                double A = out.A.v[i], B = out.B.v[i];
                double tn0 = n0f.v[i], tns = nsf.v[i];
                double kap = kappa.v[i];
                int it = 0;
                for (; it < 50; ++it) {
                    double eA = std::exp(-A);
                    double bracket = I0 + 0.5 * eps * eps * (gamma * gamma * I2 +
                                     2.0 * gamma * B * I1 + B * B * I0) - eps * eps * kap;
                    double f1 = eA * bracket - tn0;
                    double f2 = -eps * eA * (gamma * I1 + B * I0) - tns;
                    double tol = 1e-12 * std::max(1.0, tn0);
                    if (std::fabs(f1) < tol && std::fabs(f2) < tol) break;
                    double j11 = -eA * bracket;
                    double j12 = eA * eps * eps * (gamma * I1 + B * I0);
                    double j21 = eps * eA * (gamma * I1 + B * I0);
                    double j22 = -eps * eA * I0;
                    double det = j11 * j22 - j12 * j21;
                    if (det == 0.0)
                        fail(ErrorCode::NewtonDivergence, "singular Jacobian in multiplier solve");
                    double dA = (f1 * j22 - f2 * j12) / det;
                    double dB = (j11 * f2 - j21 * f1) / det;
                    A -= dA;
                    B -= dB;
                }
                if (it >= 50)
                    fail(ErrorCode::NewtonDivergence,
                         "multiplier Newton did not converge in 50 iterations");
                iters[i] = std::max(iters[i], it);
                blk = std::max(blk, std::fabs(A - out.A.v[i]));
                out.A.v[i] = A;
                out.B.v[i] = B;
            }
            da_blocks[lo / 4096] = blk;
        });
        for (double b : da_blocks) max_da = std::max(max_da, b);
        out.outer_iterations = outer + 1;
        if (max_da < 1e-13 * std::max(1.0, max_abs(out.A.v.data(), nn))) break;
    }
    for (std::size_t i = 0; i < nn; ++i) out.newton_iterations = std::max(out.newton_iterations, iters[i]);
    return out;
}

PauliField sms_equilibrium_from_multipliers(const PosField& A, const PosField& B,
                                            const ModelParams& par, const PhaseSpaceGrid& grid) {
    require_same(A.grid, grid.pos(), "sms_equilibrium_from_multipliers");
    const std::size_t P = grid.psize(), np = grid.np;
    PhaseField a0(grid);
    std::array<PhaseField, 3> bv{PhaseField(grid), PhaseField(grid), PhaseField(grid)};
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double a = A.v[ir], b = B.v[ir];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double p1 = grid.p(j1);
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double p2 = grid.p(j2);
                double pm = std::sqrt(p1 * p1 + p2 * p2);
                std::size_t j = ir * P + j1 * np + j2;
                a0.v[j] = -(0.5 * pm * pm + a);
                double coef = -(par.gamma * pm + b) / pm;
                bv[0].v[j] = coef * p1;
                bv[1].v[j] = coef * p2;
            }
        }
    });
    // scalar second-order correction for a = -(|p|^2/2 + A(r)); p-dependence
    // analytic, r-dependence spectral
    PosField lapA = pos_laplacian(A);
    PosVec2 gA = pos_gradient(A);
    PosField a11 = pos_derivative(gA.x, 0);
    PosField a12 = pos_derivative(gA.x, 1);
    PosField a22 = pos_derivative(gA.y, 1);
    PhaseField exp2(grid);
    parallel_for(grid.rsize(), [&](std::size_t ir) {
        double eA = std::exp(-A.v[ir]);
        double g2 = gA.x.v[ir] * gA.x.v[ir] + gA.y.v[ir] * gA.y.v[ir];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double p1 = grid.p(j1);
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double p2 = grid.p(j2);
                double E = std::exp(-0.5 * (p1 * p1 + p2 * p2)) * eA;
                double pap = p1 * p1 * a11.v[ir] + 2.0 * p1 * p2 * a12.v[ir] + p2 * p2 * a22.v[ir];
                exp2.v[ir * P + j1 * np + j2] = -E * (lapA.v[ir] / 8.0 - (pap + g2) / 24.0);
            }
        }
    });
    return gexp_sms(a0, bv, 1.0, par.eps, &exp2);
}

}  // namespace gm
