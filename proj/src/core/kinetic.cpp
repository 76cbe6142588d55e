#include "core/kinetic.hpp"

#include <cmath>

#include "core/parallel.hpp"
#include "core/spectral.hpp"

namespace gm {

std::pair<Mat2, Mat2> band_projection(double p1, double p2) {
    double pm = std::sqrt(p1 * p1 + p2 * p2);
    if (pm < 1e-300)
        fail(ErrorCode::OriginSingularity, "band projection undefined at p = 0");
    double n1 = p1 / pm, n2 = p2 / pm;
    Mat2 plus = pauli_compose(0.5, {0.5 * n1, 0.5 * n2, 0.0});
    Mat2 minus = pauli_compose(0.5, {-0.5 * n1, -0.5 * n2, 0.0});
    return {plus, minus};
}

std::pair<double, double> band_energy(double p1, double p2, double mass, double v_fermi) {
    double pm2 = p1 * p1 + p2 * p2;
    double pm = std::sqrt(pm2);
    return {pm2 / (2.0 * mass) + v_fermi * pm, pm2 / (2.0 * mass) - v_fermi * pm};
}

std::pair<PosField, PosField> band_densities(const PauliField& w) {
    check_tail(w.s0);
    PosField m0 = moment(w.s0);
    PosField ms = moment_sigma(w.sv[0], w.sv[1]);
    PosField np = m0, nm = m0;
    for (std::size_t i = 0; i < m0.size(); ++i) {
        np.v[i] = m0.v[i] + ms.v[i];
        nm.v[i] = m0.v[i] - ms.v[i];
    }
    return {np, nm};
}

HydroMoments hydro_moments(const PauliField& w) {
    check_tail(w.s0);
    const auto& g = w.grid();
    HydroMoments m;
    m.n0 = moment(w.s0);
    m.nvec = PosVec3(g.pos());
    m.nvec.x = moment(w.sv[0]);
    m.nvec.y = moment(w.sv[1]);
    m.nvec.z = moment(w.sv[2]);
    m.Jvec = PosVec2(g.pos());
    auto wp1 = weight_table(g, [](double p1, double) { return p1; });
    auto wp2 = weight_table(g, [](double, double p2) { return p2; });
    m.Jvec.x = moment_weighted(w.s0, wp1);
    m.Jvec.y = moment_weighted(w.s0, wp2);
    return m;
}

KineticSolver::KineticSolver(const PhaseSpaceGrid& grid, const ModelParams& par,
                             const PosField& V, ScalingKind scaling, FluidKind equilibrium)
    : grid_(grid), par_(par), scaling_(scaling), equilibrium_(equilibrium),
      theta_(grid, V, par.eps > 0 ? par.eps : 1.0) {
    par_.validate();
    if (par_.eps <= 0.0)
        fail(ErrorCode::NonPositiveEpsilon, "kinetic solver needs eps > 0");
    bool diff_eq = equilibrium == FluidKind::QDE1 || equilibrium == FluidKind::QDE2;
    if ((scaling == ScalingKind::Diffusive) != diff_eq)
        fail(ErrorCode::ValidationError, "equilibrium supplier does not match the scaling");
}

PauliField KineticSolver::transport(const PauliField& w) const {
    const auto& g = grid_;
    const std::size_t nr = g.nr, np = g.np, P = g.psize();
    PauliField out(g);

    // r-gradients of all four components, batched per axis
    std::array<PhaseField, 4> d1, d2;
    {
        std::vector<const PhaseField*> in;
        std::vector<PhaseField*> o1, o2;
        for (int s = 0; s < 4; ++s) {
            d1[s] = PhaseField(g);
            d2[s] = PhaseField(g);
            in.push_back(&w.comp(s));
            o1.push_back(&d1[s]);
            o2.push_back(&d2[s]);
        }
        phase_derivative_many(0, in, o1);
        phase_derivative_many(1, in, o2);
    }

    const double inv2g = 1.0 / (2.0 * par_.gamma);
    const double eh = 0.5 * par_.eps;
    parallel_for(nr * nr, [&](std::size_t ir) {
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            double p1 = g.p(j1);
            for (std::size_t j2 = 0; j2 < np; ++j2) {
                double p2 = g.p(j2);
                std::size_t j = ir * P + j1 * np + j2;
                double adv0 = inv2g * (p1 * d1[0].v[j] + p2 * d2[0].v[j]);
                out.s0.v[j] = adv0 + eh * (d1[1].v[j] + d2[2].v[j]);
                double w1 = w.sv[0].v[j], w2 = w.sv[1].v[j], w3 = w.sv[2].v[j];
                // precession (w ^ p): p = (p1, p2, 0)
                double pr1 = w2 * 0.0 - w3 * p2;
                double pr2 = w3 * p1 - w1 * 0.0;
                double pr3 = w1 * p2 - w2 * p1;
                out.sv[0].v[j] = inv2g * (p1 * d1[1].v[j] + p2 * d2[1].v[j]) + eh * d1[0].v[j] + pr1;
                out.sv[1].v[j] = inv2g * (p1 * d1[2].v[j] + p2 * d2[2].v[j]) + eh * d2[0].v[j] + pr2;
                out.sv[2].v[j] = inv2g * (p1 * d1[3].v[j] + p2 * d2[3].v[j]) + pr3;
            }
        }
    });
    for (int s = 0; s < 4; ++s) theta_.apply_add(w.comp(s), 1.0, out.comp(s));
    return out;
}

PauliField KineticSolver::local_equilibrium(const PauliField& w) const {
    if (scaling_ == ScalingKind::Diffusive) {
        auto [np_, nm_] = band_densities(w);
        PosField n0(np_.grid), ns(np_.grid);
        for (std::size_t i = 0; i < n0.size(); ++i) {
            n0.v[i] = 0.5 * (np_.v[i] + nm_.v[i]);
            ns.v[i] = 0.5 * (np_.v[i] - nm_.v[i]);
        }
        return equilibrium_ == FluidKind::QDE1
                   ? equilibrium_qde1(n0, ns, par_, grid_).g
                   : equilibrium_qde2(n0, ns, par_, grid_).g;
    }
    HydroMoments m = hydro_moments(w);
    return equilibrium_ == FluidKind::QHE1
               ? equilibrium_qhe1(m.n0, m.nvec, m.Jvec, par_, grid_).g
               : equilibrium_qhe2(m.n0, m.nvec, m.Jvec, par_, grid_).g;
}

void KineticSolver::relax(PauliField& w, double dt) const {
    // exact integration against the equilibrium frozen at substep start;
    // relaxation rate 1/tau^2 in the diffusive scaling, 1/tau hydrodynamic
    double rate = scaling_ == ScalingKind::Diffusive ? 1.0 / (par_.tau * par_.tau)
                                                     : 1.0 / par_.tau;
    double decay = std::exp(-dt * rate);
    PauliField geq = local_equilibrium(w);
    const std::size_t n = w.s0.size();
    parallel_for_chunks(n, 16384, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            for (int s = 0; s < 4; ++s) {
                double& x = w.comp(s).v[i];
                double ge = geq.comp(s).v[i];
                x = ge + (x - ge) * decay;
            }
        }
    });
}

void KineticSolver::step(PauliField& w, double dt) const {
    relax(w, 0.5 * dt);
    // transport: d_t w = -T(w)/tau (diffusive) or -T(w) (hydrodynamic)
    const double scale = scaling_ == ScalingKind::Diffusive ? -1.0 / par_.tau : -1.0;
    const std::size_t n = w.s0.size();
    auto axpy = [&](PauliField& x, double c, const PauliField& y) {
        parallel_for_chunks(n, 16384, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i)
                for (int s = 0; s < 4; ++s) x.comp(s).v[i] += c * y.comp(s).v[i];
        });
    };
    PauliField k1 = transport(w);
    PauliField t = w;
    axpy(t, 0.5 * dt * scale, k1);
    PauliField k2 = transport(t);
    t = w;
    axpy(t, 0.5 * dt * scale, k2);
    PauliField k3 = transport(t);
    t = w;
    axpy(t, dt * scale, k3);
    PauliField k4 = transport(t);
    axpy(w, dt * scale / 6.0, k1);
    axpy(w, dt * scale / 3.0, k2);
    axpy(w, dt * scale / 3.0, k3);
    axpy(w, dt * scale / 6.0, k4);
    relax(w, 0.5 * dt);
}

double KineticSolver::default_dt() const {
    // relaxation resolution: dt <= 0.1 tau^2 (diffusive) / 0.1 tau (hydro);
    // transport CFL for RK4 with spectral advection
    double relax_dt = scaling_ == ScalingKind::Diffusive ? 0.1 * par_.tau * par_.tau
                                                         : 0.1 * par_.tau;
    double kmax = M_PI / grid_.dr();
    double vmax = grid_.pmax / (2.0 * par_.gamma) * std::sqrt(2.0);
    double lam = vmax * kmax + grid_.pmax;  // advection + precession rate
    double cfl = 2.5 / lam;
    if (scaling_ == ScalingKind::Diffusive) cfl *= par_.tau;
    double dt = std::min(relax_dt, cfl);
    if (dt < 1e-12) fail(ErrorCode::DtUnderflow, "kinetic dt underflow (tau too small)");
    return dt;
}

}  // namespace gm
