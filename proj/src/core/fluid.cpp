#include "core/fluid.hpp"

#include <cmath>

#include "core/parallel.hpp"
#include "core/spectral.hpp"

namespace gm {

namespace {
constexpr double kPolGuard = 1e-6;

PosField mul(const PosField& a, const PosField& b) {
    PosField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= b.v[i];
    return out;
}
}  // namespace

bool is_diffusive(FluidKind k) { return k == FluidKind::QDE1 || k == FluidKind::QDE2; }

FluidKind fluid_kind_from_name(const std::string& name) {
    if (name == "qde1") return FluidKind::QDE1;
    if (name == "qde2") return FluidKind::QDE2;
    if (name == "qhe1") return FluidKind::QHE1;
    if (name == "qhe2") return FluidKind::QHE2;
    fail(ErrorCode::ValidationError, "unknown fluid model '" + name + "'");
}

std::string fluid_kind_name(FluidKind k) {
    switch (k) {
        case FluidKind::QDE1: return "qde1";
        case FluidKind::QDE2: return "qde2";
        case FluidKind::QHE1: return "qhe1";
        default: return "qhe2";
    }
}

PosField bohm_potential(const PosField& n0, double eps) {
    PosField root(n0.grid);
    for (std::size_t i = 0; i < n0.size(); ++i) {
        if (!(n0.v[i] > 0.0))
            fail(ErrorCode::NonPositiveDensity, "bohm_potential needs n0 > 0");
        root.v[i] = std::sqrt(n0.v[i]);
    }
    PosField lap = pos_laplacian(root);
    PosField out(n0.grid);
    const double c = -eps * eps / 6.0;
    for (std::size_t i = 0; i < n0.size(); ++i) out.v[i] = c * lap.v[i] / root.v[i];
    return out;
}

double integral(const PosField& f) {
    double cell = f.grid.dr() * f.grid.dr();
    return block_sum_array(f.v.data(), f.size()) * cell;
}

double l2_norm(const PosField& f) {
    double cell = f.grid.dr() * f.grid.dr();
    double s = block_sum(f.size(), [&](std::size_t i) { return f.v[i] * f.v[i]; });
    return std::sqrt(s * cell);
}

double sup_diff(const PosField& a, const PosField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}

// ------------------------------------------------------------- diffusive

DiffusiveSolver::DiffusiveSolver(FluidKind kind, const ModelParams& par, const PosField& V,
                                 Scheme scheme, CflOptions cfl)
    : kind_(kind), par_(par), scheme_(scheme), cfl_(cfl), V_(V) {
    if (!is_diffusive(kind)) fail(ErrorCode::ValidationError, "DiffusiveSolver needs qde1 or qde2");
    par_.validate();
    gradV_ = pos_gradient(V_);
    lapV_ = pos_laplacian(V_);
    gradV2_ = PosField(V_.grid);
    for (std::size_t i = 0; i < V_.size(); ++i)
        gradV2_.v[i] = gradV_.x.v[i] * gradV_.x.v[i] + gradV_.y.v[i] * gradV_.y.v[i];
}

DiffusiveState DiffusiveSolver::rhs(const DiffusiveState& s) const {
    const auto& g = s.n0.grid;
    const std::size_t n = s.n0.size();
    const double eps = par_.eps, gamma = par_.gamma, gh = par_.gamma_hat();
    const double Gam = gamma_constant();

    DiffusiveState out{PosField(g), PosField(g)};
    PosField lap_n0 = pos_laplacian(s.n0);
    PosField lap_ns = pos_laplacian(s.nsigma);

    if (kind_ == FluidKind::QDE1) {
        PosVec2 gn0 = pos_gradient(s.n0);
        PosVec2 gns = pos_gradient(s.nsigma);
        // drift flux div(n0 grad V)
        PosVec2 flux(g);
        for (std::size_t i = 0; i < n; ++i) {
            flux.x.v[i] = s.n0.v[i] * gradV_.x.v[i];
            flux.y.v[i] = s.n0.v[i] * gradV_.y.v[i];
        }
        PosField divflux = pos_divergence(flux);
        for (std::size_t i = 0; i < n; ++i) {
            double n0 = s.n0.v[i], ns = s.nsigma.v[i];
            double root2 = n0 * n0 - ns * ns;
            if (!(root2 > 0.0))
                fail(ErrorCode::PolarizationOverflow, "qde1 rhs: |n_sigma| reached n0");
            double root = std::sqrt(root2);
            out.n0.v[i] = (lap_n0.v[i] + 0.5 * eps * gh * lap_ns.v[i]) / (4.0 * gamma * gamma) +
                          divflux.v[i] / (2.0 * gamma);
            // bracket dotted with grad V; the wedge of two in-plane gradients
            // points out of plane, so its planar dot contribution is zero by
            // construction (kept explicit with V_z = 0)
            double wedge3 = gn0.x.v[i] * gns.y.v[i] - gn0.y.v[i] * gns.x.v[i];
            double t3 = 0.5 * (1.0 + n0 / root) * wedge3 / root;
            const double vz = 0.0;
            double dot = gradV_.x.v[i] * (gns.x.v[i] + eps * gh * gn0.x.v[i]) +
                         gradV_.y.v[i] * (gns.y.v[i] + eps * gh * gn0.y.v[i]) + vz * t3;
            out.nsigma.v[i] = (lap_ns.v[i] + 0.5 * eps * gh * lap_n0.v[i]) / (4.0 * gamma * gamma) -
                              dot / (2.0 * gamma) -
                              0.5 * gradV2_.v[i] * (ns + eps * gh * (Gam - 1.0) * n0) -
                              0.75 / gamma * lapV_.v[i] * (ns + eps * gh * n0);
        }
        return out;
    }

    // QDE2
    const double d00 = 1.0 / (4.0 * gamma * gamma) +
                       0.25 * eps * eps * (2.0 - gamma * (4.0 - M_PI));
    const double d0s = eps / (8.0 * gamma) * std::sqrt(M_PI / 2.0);
    const double dss = 1.0 / (4.0 * gamma * gamma);
    PosField vb = bohm_potential(s.n0, eps);
    PosVec2 gvb = pos_gradient(vb);
    PosVec2 flux0(g), fluxs(g);
    for (std::size_t i = 0; i < n; ++i) {
        flux0.x.v[i] = s.n0.v[i] * (gradV_.x.v[i] + gvb.x.v[i]);
        flux0.y.v[i] = s.n0.v[i] * (gradV_.y.v[i] + gvb.y.v[i]);
        double c = s.nsigma.v[i] + eps * gh * s.n0.v[i];
        fluxs.x.v[i] = c * gradV_.x.v[i];
        fluxs.y.v[i] = c * gradV_.y.v[i];
    }
    PosField div0 = pos_divergence(flux0);
    PosField divs = pos_divergence(fluxs);
    for (std::size_t i = 0; i < n; ++i) {
        double n0 = s.n0.v[i], ns = s.nsigma.v[i];
        out.n0.v[i] = d00 * lap_n0.v[i] + d0s * lap_ns.v[i] + div0.v[i] / (2.0 * gamma);
        out.nsigma.v[i] = d0s * lap_n0.v[i] + dss * lap_ns.v[i] - divs.v[i] / (2.0 * gamma) +
                          0.5 * gradV2_.v[i] * (Gam * ns + eps * gh * (2.0 + Gam) * n0) +
                          0.25 / gamma * lapV_.v[i] * (ns + eps * gh * n0);
    }
    return out;
}

double DiffusiveSolver::default_dt() const {
    const double gamma = par_.gamma, eps = par_.eps;
    double d00 = 1.0 / (4.0 * gamma * gamma);
    if (kind_ == FluidKind::QDE2)
        d00 += 0.25 * eps * eps * std::fabs(2.0 - gamma * (4.0 - M_PI));
    double dr = V_.grid.dr();
    return cfl_.c_diffusive * dr * dr * 4.0 * gamma * gamma /
           std::max(1.0, 4.0 * gamma * gamma * d00);
}

bool DiffusiveSolver::state_ok(const DiffusiveState& s) const {
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        double n0 = s.n0.v[i], ns = s.nsigma.v[i];
        if (!std::isfinite(n0) || !std::isfinite(ns)) return false;
        if (!(n0 > 0.0)) return false;
        if (std::fabs(ns) >= (1.0 - kPolGuard) * n0) return false;
    }
    return true;
}

void DiffusiveSolver::single_step(DiffusiveState& s, double dt) const {
    auto axpy = [](DiffusiveState& x, double c, const DiffusiveState& y) {
        for (std::size_t i = 0; i < x.n0.size(); ++i) {
            x.n0.v[i] += c * y.n0.v[i];
            x.nsigma.v[i] += c * y.nsigma.v[i];
        }
    };
    if (scheme_ == Scheme::RK4) {
        DiffusiveState k1 = rhs(s);
        DiffusiveState t = s;
        axpy(t, 0.5 * dt, k1);
        DiffusiveState k2 = rhs(t);
        t = s;
        axpy(t, 0.5 * dt, k2);
        DiffusiveState k3 = rhs(t);
        t = s;
        axpy(t, dt, k3);
        DiffusiveState k4 = rhs(t);
        axpy(s, dt / 6.0, k1);
        axpy(s, dt / 3.0, k2);
        axpy(s, dt / 3.0, k3);
        axpy(s, dt / 6.0, k4);
        return;
    }
    // SSPRK3
    DiffusiveState u1 = s;
    axpy(u1, dt, rhs(s));
    DiffusiveState u2 = u1;
    axpy(u2, dt, rhs(u1));
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        u2.n0.v[i] = 0.75 * s.n0.v[i] + 0.25 * u2.n0.v[i];
        u2.nsigma.v[i] = 0.75 * s.nsigma.v[i] + 0.25 * u2.nsigma.v[i];
    }
    DiffusiveState u3 = u2;
    axpy(u3, dt, rhs(u2));
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        s.n0.v[i] = s.n0.v[i] / 3.0 + 2.0 / 3.0 * u3.n0.v[i];
        s.nsigma.v[i] = s.nsigma.v[i] / 3.0 + 2.0 / 3.0 * u3.nsigma.v[i];
    }
}

void DiffusiveSolver::advance(DiffusiveState& s, double dt) const {
    if (!state_ok(s)) fail(ErrorCode::StepRejected, "diffusive state invalid before step");
    double sub = dt;
    int halvings = 0;
    while (true) {
        DiffusiveState trial = s;
        bool ok = true;
        int nsub = int(std::llround(dt / sub));
        for (int k = 0; k < nsub && ok; ++k) {
            single_step(trial, sub);
            ok = state_ok(trial);
        }
        if (ok) {
            s = std::move(trial);
            return;
        }
        if (++halvings > 10)
            fail(ErrorCode::DtUnderflow, "step rejected after 10 dt halvings");
        sub *= 0.5;
    }
}

// ---------------------------------------------------------------- hydro

HydroSolver::HydroSolver(FluidKind kind, const ModelParams& par, const PosField& V,
                         Scheme scheme, CflOptions cfl)
    : kind_(kind), par_(par), scheme_(scheme), cfl_(cfl), V_(V) {
    if (is_diffusive(kind)) fail(ErrorCode::ValidationError, "HydroSolver needs qhe1 or qhe2");
    par_.validate();
    gradV_ = pos_gradient(V_);
}

namespace {
// divergence over the position axes of a (component s, spatial k) tensor
PosField tensor_divergence(const PosField& t1, const PosField& t2) {
    PosField d1 = pos_derivative(t1, 0);
    PosField d2 = pos_derivative(t2, 1);
    for (std::size_t i = 0; i < d1.size(); ++i) d1.v[i] += d2.v[i];
    return d1;
}
}  // namespace

HydroState HydroSolver::rhs(const HydroState& s) const {
    const auto& g = s.n0.grid;
    const std::size_t n = s.n0.size();
    const double eps = par_.eps, gamma = par_.gamma;
    const double eg = eps * gamma;

    HydroState out{PosField(g), PosVec3(g), PosVec2(g)};

    // continuity: -(1/2gamma) div(J + eps gamma n_inplane)
    PosField f1(g), f2(g);
    for (std::size_t i = 0; i < n; ++i) {
        f1.v[i] = s.Jvec.x.v[i] + eg * s.nvec.x.v[i];
        f2.v[i] = s.Jvec.y.v[i] + eg * s.nvec.y.v[i];
    }
    PosField divj = tensor_divergence(f1, f2);
    for (std::size_t i = 0; i < n; ++i) out.n0.v[i] = -divj.v[i] / (2.0 * gamma);

    // spin transport flux n_s J_k / n0 (- eps gamma n0 Phi_sk for QHE1)
    SpinGeometry geo;
    if (kind_ == FluidKind::QHE1) geo = spin_geometry(s.n0, s.nvec, gamma);
    for (int sc = 0; sc < 3; ++sc) {
        PosField t1(g), t2(g);
        for (std::size_t i = 0; i < n; ++i) {
            double ns = s.nvec.comp(sc).v[i];
            t1.v[i] = ns * s.Jvec.x.v[i] / s.n0.v[i];
            t2.v[i] = ns * s.Jvec.y.v[i] / s.n0.v[i];
        }
        if (kind_ == FluidKind::QHE1) {
            for (std::size_t i = 0; i < n; ++i) {
                double nk[3] = {s.nvec.x.v[i], s.nvec.y.v[i], s.nvec.z.v[i]};
                // Phi_sk = wx I_sk + c2 n_s n_k + zg_k[s], k in-plane
                double phi1 = (sc == 0 ? geo.wx.v[i] : 0.0) + geo.c2.v[i] * nk[sc] * nk[0] +
                              geo.zg1.comp(sc).v[i];
                double phi2 = (sc == 1 ? geo.wx.v[i] : 0.0) + geo.c2.v[i] * nk[sc] * nk[1] +
                              geo.zg2.comp(sc).v[i];
                t1.v[i] -= eg * s.n0.v[i] * phi1;
                t2.v[i] -= eg * s.n0.v[i] * phi2;
            }
        }
        PosField div = tensor_divergence(t1, t2);
        for (std::size_t i = 0; i < n; ++i) out.nvec.comp(sc).v[i] = -div.v[i] / (2.0 * gamma);
    }

    // spin torque -(n ^ J)/n0 and the QHE1 eps-terms
    if (kind_ == FluidKind::QHE1) {
        PosVec2 gn0i = pos_gradient(s.n0);
        PosVec3 br = spin_direction_bracket(s.n0, s.nvec);
        for (std::size_t i = 0; i < n; ++i) {
            out.nvec.x.v[i] -= 0.5 * eps * gn0i.x.v[i] + 0.5 * eps * s.n0.v[i] * br.x.v[i];
            out.nvec.y.v[i] -= 0.5 * eps * gn0i.y.v[i] + 0.5 * eps * s.n0.v[i] * br.y.v[i];
            out.nvec.z.v[i] -= 0.5 * eps * s.n0.v[i] * br.z.v[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double n1 = s.nvec.x.v[i], n2 = s.nvec.y.v[i], n3 = s.nvec.z.v[i];
        double j1 = s.Jvec.x.v[i], j2 = s.Jvec.y.v[i];
        double inv = 1.0 / s.n0.v[i];
        out.nvec.x.v[i] -= (-n3 * j2) * inv;
        out.nvec.y.v[i] -= (n3 * j1) * inv;
        out.nvec.z.v[i] -= (n1 * j2 - n2 * j1) * inv;
    }

    // momentum: -(1/2g) div(J (J + eps g n)/n0) - grad n0/2g - n0 grad(V [+V_B])
    PosVec2 gn0 = pos_gradient(s.n0);
    PosVec2 force = gradV_;
    if (kind_ == FluidKind::QHE2) {
        PosField vb = bohm_potential(s.n0, eps);
        PosVec2 gvb = pos_gradient(vb);
        for (std::size_t i = 0; i < n; ++i) {
            force.x.v[i] += gvb.x.v[i];
            force.y.v[i] += gvb.y.v[i];
        }
    }
    for (int jc = 0; jc < 2; ++jc) {
        const PosField& jcomp = jc == 0 ? s.Jvec.x : s.Jvec.y;
        PosField t1(g), t2(g);
        for (std::size_t i = 0; i < n; ++i) {
            double inv = jcomp.v[i] / s.n0.v[i];
            t1.v[i] = inv * (s.Jvec.x.v[i] + eg * s.nvec.x.v[i]);
            t2.v[i] = inv * (s.Jvec.y.v[i] + eg * s.nvec.y.v[i]);
        }
        PosField div = tensor_divergence(t1, t2);
        PosField& outj = jc == 0 ? out.Jvec.x : out.Jvec.y;
        const PosField& gn = jc == 0 ? gn0.x : gn0.y;
        const PosField& fr = jc == 0 ? force.x : force.y;
        for (std::size_t i = 0; i < n; ++i)
            outj.v[i] = -div.v[i] / (2.0 * gamma) - gn.v[i] / (2.0 * gamma) -
                        s.n0.v[i] * fr.v[i];
    }
    return out;
}

double HydroSolver::default_dt(const HydroState& s) const {
    double vmax = 0.0;
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        double u = std::sqrt(s.Jvec.x.v[i] * s.Jvec.x.v[i] + s.Jvec.y.v[i] * s.Jvec.y.v[i]) /
                   s.n0.v[i];
        vmax = std::max(vmax, u);
    }
    vmax += 1.0 / std::sqrt(2.0 * par_.gamma);
    return cfl_.c_hydro * V_.grid.dr() / vmax;
}

bool HydroSolver::state_ok(const HydroState& s) const {
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        double n0 = s.n0.v[i];
        if (!std::isfinite(n0) || !(n0 > 0.0)) return false;
        double m2 = s.nvec.x.v[i] * s.nvec.x.v[i] + s.nvec.y.v[i] * s.nvec.y.v[i] +
                    s.nvec.z.v[i] * s.nvec.z.v[i];
        if (!std::isfinite(m2) || m2 >= (1.0 - kPolGuard) * n0 * n0) return false;
        if (!std::isfinite(s.Jvec.x.v[i]) || !std::isfinite(s.Jvec.y.v[i])) return false;
    }
    return true;
}

void HydroSolver::single_step(HydroState& s, double dt) const {
    auto axpy = [](HydroState& x, double c, const HydroState& y) {
        for (std::size_t i = 0; i < x.n0.size(); ++i) {
            x.n0.v[i] += c * y.n0.v[i];
            x.nvec.x.v[i] += c * y.nvec.x.v[i];
            x.nvec.y.v[i] += c * y.nvec.y.v[i];
            x.nvec.z.v[i] += c * y.nvec.z.v[i];
            x.Jvec.x.v[i] += c * y.Jvec.x.v[i];
            x.Jvec.y.v[i] += c * y.Jvec.y.v[i];
        }
    };
    auto lincomb = [](HydroState& x, double a, const HydroState& base, double b) {
        for (std::size_t i = 0; i < x.n0.size(); ++i) {
            x.n0.v[i] = a * base.n0.v[i] + b * x.n0.v[i];
            x.nvec.x.v[i] = a * base.nvec.x.v[i] + b * x.nvec.x.v[i];
            x.nvec.y.v[i] = a * base.nvec.y.v[i] + b * x.nvec.y.v[i];
            x.nvec.z.v[i] = a * base.nvec.z.v[i] + b * x.nvec.z.v[i];
            x.Jvec.x.v[i] = a * base.Jvec.x.v[i] + b * x.Jvec.x.v[i];
            x.Jvec.y.v[i] = a * base.Jvec.y.v[i] + b * x.Jvec.y.v[i];
        }
    };
    if (scheme_ == Scheme::RK4) {
        HydroState k1 = rhs(s);
        HydroState t = s;
        axpy(t, 0.5 * dt, k1);
        HydroState k2 = rhs(t);
        t = s;
        axpy(t, 0.5 * dt, k2);
        HydroState k3 = rhs(t);
        t = s;
        axpy(t, dt, k3);
        HydroState k4 = rhs(t);
        axpy(s, dt / 6.0, k1);
        axpy(s, dt / 3.0, k2);
        axpy(s, dt / 3.0, k3);
        axpy(s, dt / 6.0, k4);
        return;
    }
    HydroState u1 = s;
    axpy(u1, dt, rhs(s));
    HydroState u2 = u1;
    axpy(u2, dt, rhs(u1));
    lincomb(u2, 0.75, s, 0.25);
    HydroState u3 = u2;
    axpy(u3, dt, rhs(u2));
    lincomb(u3, 1.0 / 3.0, s, 2.0 / 3.0);
    s = std::move(u3);
}

void HydroSolver::advance(HydroState& s, double dt) const {
    if (!state_ok(s)) fail(ErrorCode::StepRejected, "hydro state invalid before step");
    double sub = dt;
    int halvings = 0;
    while (true) {
        HydroState trial = s;
        bool ok = true;
        int nsub = int(std::llround(dt / sub));
        for (int k = 0; k < nsub && ok; ++k) {
            single_step(trial, sub);
            ok = state_ok(trial);
        }
        if (ok) {
            s = std::move(trial);
            return;
        }
        if (++halvings > 10)
            fail(ErrorCode::DtUnderflow, "step rejected after 10 dt halvings");
        sub *= 0.5;
    }
}

DiagnosticRow diagnostics(const DiffusiveState& s) {
    double mn = s.n0.v[0], ratio = 0.0;
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        mn = std::min(mn, s.n0.v[i]);
        ratio = std::max(ratio, std::fabs(s.nsigma.v[i]) / s.n0.v[i]);
    }
    return {{"mass", integral(s.n0)},
            {"sigma_total", integral(s.nsigma)},
            {"min_n0", mn},
            {"max_pol_ratio", ratio},
            {"l2_n0", l2_norm(s.n0)},
            {"l2_nsigma", l2_norm(s.nsigma)}};
}

DiagnosticRow diagnostics(const HydroState& s) {
    double mn = s.n0.v[0], ratio = 0.0;
    for (std::size_t i = 0; i < s.n0.size(); ++i) {
        mn = std::min(mn, s.n0.v[i]);
        double m = std::sqrt(s.nvec.x.v[i] * s.nvec.x.v[i] + s.nvec.y.v[i] * s.nvec.y.v[i] +
                             s.nvec.z.v[i] * s.nvec.z.v[i]);
        ratio = std::max(ratio, m / s.n0.v[i]);
    }
    return {{"mass", integral(s.n0)},
            {"spin_x", integral(s.nvec.x)},
            {"spin_y", integral(s.nvec.y)},
            {"spin_z", integral(s.nvec.z)},
            {"momentum_x", integral(s.Jvec.x)},
            {"momentum_y", integral(s.Jvec.y)},
            {"min_n0", mn},
            {"max_pol_ratio", ratio},
            {"l2_n0", l2_norm(s.n0)}};
}

}  // namespace gm
