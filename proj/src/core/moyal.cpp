#include "core/moyal.hpp"

#include <cmath>

#include "core/fft.hpp"
#include "core/parallel.hpp"
#include "core/spectral.hpp"

namespace gm {

PhaseField moyal_term(int k, const PhaseField& f1, const PhaseField& f2) {
    require_same(f1.grid, f2.grid, "moyal_term");
    if (k < 0 || k > 2)
        fail(ErrorCode::UnsupportedOrder, "moyal_term supports orders 0..2, got " + std::to_string(k));
    PhaseField out(f1.grid);
    const std::size_t n = f1.size();
    if (k == 0) {
        parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out.v[i] = f1.v[i] * f2.v[i];
        });
        return out;
    }
    if (k == 1) {
        PhaseDerivs d1 = phase_derivs(f1, false), d2 = phase_derivs(f2, false);
        parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i)
                out.v[i] = 0.5 * (d1.d[0].v[i] * d2.d[2].v[i] + d1.d[1].v[i] * d2.d[3].v[i]
                                  - d1.d[2].v[i] * d2.d[0].v[i] - d1.d[3].v[i] * d2.d[1].v[i]);
        });
        return out;
    }
    PhaseDerivs d1 = phase_derivs(f1, true), d2 = phase_derivs(f2, true);
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double s = 0.0;
            for (int j = 0; j < 2; ++j)
                for (int t = 0; t < 2; ++t) {
                    s += d1.second(j, t).v[i] * d2.second(2 + j, 2 + t).v[i];
                    s -= 2.0 * d1.second(j, 2 + t).v[i] * d2.second(t, 2 + j).v[i];
                    s += d1.second(2 + j, 2 + t).v[i] * d2.second(j, t).v[i];
                }
            out.v[i] = -0.125 * s;
        }
    });
    return out;
}

PhaseField poisson_bracket(const PhaseField& f, const PhaseField& g) {
    PhaseField out = moyal_term(1, f, g);
    for (auto& x : out.v) x *= 2.0;
    return out;
}

void ThetaOperator::check_eps() const {
    if (eps_ <= 0.0) fail(ErrorCode::NonPositiveEpsilon, "Theta_eps requires eps > 0");
}

ThetaOperator::ThetaOperator(const PhaseSpaceGrid& grid,
                             const std::function<double(double, double)>& V, double eps)
    : grid_(grid), eps_(eps) {
    check_eps();
    const std::size_t nr = grid.nr, np = grid.np, P = np * np;
    mult_.assign(nr * nr * P, 0.0);
    parallel_for(P, [&](std::size_t kp) {
        std::size_t k1 = kp / np, k2 = kp % np;
        double xi1 = grid.p_wavenumber(k1), xi2 = grid.p_wavenumber(k2);
        if (k1 == np / 2 || k2 == np / 2) return;  // Nyquist rows stay zero
        double s1 = 0.5 * eps * xi1, s2 = 0.5 * eps * xi2;
        for (std::size_t i1 = 0; i1 < nr; ++i1)
            for (std::size_t i2 = 0; i2 < nr; ++i2) {
                double r1 = grid.r(i1), r2 = grid.r(i2);
                mult_[(i1 * nr + i2) * P + kp] =
                    (V(r1 + s1, r2 + s2) - V(r1 - s1, r2 - s2)) / eps;
            }
    });
}

ThetaOperator::ThetaOperator(const PhaseSpaceGrid& grid, const PosField& V, double eps)
    : grid_(grid), eps_(eps) {
    check_eps();
    require_same(V.grid, grid.pos(), "ThetaOperator potential");
    const std::size_t nr = grid.nr, np = grid.np, P = np * np;
    mult_.assign(nr * nr * P, 0.0);
    // V in spectral form once, then one phase-shifted inverse transform per xi.
    const Fft& plan = fft_plan(nr);
    std::vector<cplx> vhat(nr * nr);
    for (std::size_t i = 0; i < nr * nr; ++i) vhat[i] = V.v[i];
    for (std::size_t i = 0; i < nr; ++i) plan.forward(&vhat[i * nr]);
    for (std::size_t j = 0; j < nr; ++j) {
        std::vector<cplx> col(nr);
        for (std::size_t i = 0; i < nr; ++i) col[i] = vhat[i * nr + j];
        plan.forward(col.data());
        for (std::size_t i = 0; i < nr; ++i) vhat[i * nr + j] = col[i];
    }
    std::vector<double> kr(nr);
    for (std::size_t i = 0; i < nr; ++i) kr[i] = grid.r_wavenumber(i);
    const double inv = 1.0 / double(nr * nr);
    parallel_for(P, [&](std::size_t kp) {
        std::size_t k1 = kp / np, k2 = kp % np;
        if (k1 == np / 2 || k2 == np / 2) return;
        double s1 = 0.5 * eps * grid.p_wavenumber(k1);
        double s2 = 0.5 * eps * grid.p_wavenumber(k2);
        // dV~ = V(r+s) - V(r-s): inverse transform of vhat * (e^{ik.s} - e^{-ik.s})
        std::vector<cplx> buf(nr * nr), col(nr);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                double ph = kr[i] * s1 + kr[j] * s2;
                buf[i * nr + j] = vhat[i * nr + j] * cplx(0.0, 2.0 * std::sin(ph));
            }
        for (std::size_t j = 0; j < nr; ++j) {
            for (std::size_t i = 0; i < nr; ++i) col[i] = buf[i * nr + j];
            plan.inverse_unscaled(col.data());
            for (std::size_t i = 0; i < nr; ++i) buf[i * nr + j] = col[i];
        }
        for (std::size_t i = 0; i < nr; ++i) {
            plan.inverse_unscaled(&buf[i * nr]);
            for (std::size_t j = 0; j < nr; ++j)
                mult_[(i * nr + j) * P + kp] = buf[i * nr + j].real() * inv / eps;
        }
    });
}

PhaseField ThetaOperator::apply(const PhaseField& w) const {
    PhaseField out(grid_);
    apply_add(w, 1.0, out);
    return out;
}

void ThetaOperator::apply_add(const PhaseField& w, double coef, PhaseField& out) const {
    require_same(w.grid, grid_, "ThetaOperator::apply");
    require_same(out.grid, grid_, "ThetaOperator::apply");
    const std::size_t nr = grid_.nr, np = grid_.np, P = np * np;
    const Fft& plan = fft_plan(np);
    const double inv = 1.0 / double(P);
    parallel_for(nr * nr, [&](std::size_t ir) {
        std::vector<cplx> blk(P), col(np);
        const double* src = &w.v[ir * P];
        for (std::size_t j = 0; j < P; ++j) blk[j] = src[j];
        // p -> xi with the e^{+i p xi} kernel
        for (std::size_t j1 = 0; j1 < np; ++j1) plan.inverse_unscaled(&blk[j1 * np]);
        for (std::size_t j2 = 0; j2 < np; ++j2) {
            for (std::size_t j1 = 0; j1 < np; ++j1) col[j1] = blk[j1 * np + j2];
            plan.inverse_unscaled(col.data());
            for (std::size_t j1 = 0; j1 < np; ++j1) blk[j1 * np + j2] = col[j1];
        }
        const double* m = &mult_[ir * P];
        for (std::size_t j = 0; j < P; ++j) blk[j] *= cplx(0.0, m[j]);
        // xi -> p with the e^{-i p xi} kernel
        for (std::size_t j2 = 0; j2 < np; ++j2) {
            for (std::size_t j1 = 0; j1 < np; ++j1) col[j1] = blk[j1 * np + j2];
            plan.forward(col.data());
            for (std::size_t j1 = 0; j1 < np; ++j1) blk[j1 * np + j2] = col[j1];
        }
        double* dst = &out.v[ir * P];
        for (std::size_t j1 = 0; j1 < np; ++j1) {
            plan.forward(&blk[j1 * np]);
            for (std::size_t j2 = 0; j2 < np; ++j2)
                dst[j1 * np + j2] += coef * blk[j1 * np + j2].real() * inv;
        }
    });
}

}  // namespace gm
