#include "core/quadrature.hpp"

#include <cmath>

#include "core/parallel.hpp"

namespace gm {

std::vector<double> weight_table(const PhaseSpaceGrid& g,
                                 const std::function<double(double, double)>& fn) {
    std::vector<double> wt(g.psize());
    for (std::size_t j1 = 0; j1 < g.np; ++j1)
        for (std::size_t j2 = 0; j2 < g.np; ++j2) wt[j1 * g.np + j2] = fn(g.p(j1), g.p(j2));
    return wt;
}

PosField moment(const PhaseField& w) {
    const auto& g = w.grid;
    PosField out(g.pos());
    const std::size_t P = g.psize();
    const double cell = g.dp() * g.dp();
    parallel_for(g.rsize(), [&](std::size_t ir) {
        const double* src = &w.v[ir * P];
        double s = 0.0;
        for (std::size_t j = 0; j < P; ++j) s += src[j];
        out.v[ir] = s * cell;
    });
    return out;
}

PosField moment_weighted(const PhaseField& w, const std::vector<double>& wt) {
    const auto& g = w.grid;
    if (wt.size() != g.psize())
        fail(ErrorCode::GridMismatch, "weight table size does not match momentum grid");
    PosField out(g.pos());
    const std::size_t P = g.psize();
    const double cell = g.dp() * g.dp();
    parallel_for(g.rsize(), [&](std::size_t ir) {
        const double* src = &w.v[ir * P];
        double s = 0.0;
        for (std::size_t j = 0; j < P; ++j) s += src[j] * wt[j];
        out.v[ir] = s * cell;
    });
    return out;
}

PosField moment_sigma(const PhaseField& w1, const PhaseField& w2) {
    const auto& g = w1.grid;
    require_same(g, w2.grid, "moment_sigma");
    PosField out(g.pos());
    const std::size_t P = g.psize(), np = g.np;
    const double cell = g.dp() * g.dp();
    std::vector<double> ph1(P), ph2(P);
    for (std::size_t j1 = 0; j1 < np; ++j1)
        for (std::size_t j2 = 0; j2 < np; ++j2) {
            double p1 = g.p(j1), p2 = g.p(j2);
            double ip = 1.0 / std::sqrt(p1 * p1 + p2 * p2);
            ph1[j1 * np + j2] = p1 * ip;
            ph2[j1 * np + j2] = p2 * ip;
        }
    parallel_for(g.rsize(), [&](std::size_t ir) {
        const double* s1 = &w1.v[ir * P];
        const double* s2 = &w2.v[ir * P];
        double s = 0.0;
        for (std::size_t j = 0; j < P; ++j) s += s1[j] * ph1[j] + s2[j] * ph2[j];
        out.v[ir] = s * cell;
    });
    return out;
}

void check_tail(const PhaseField& w, double rel_tol) {
    const auto& g = w.grid;
    const std::size_t np = g.np, P = g.psize();
    double peak = max_abs(w.v.data(), w.v.size());
    if (peak == 0.0) return;
    double tail = 0.0;
    for (std::size_t ir = 0; ir < g.rsize(); ++ir) {
        const double* src = &w.v[ir * P];
        for (std::size_t j = 0; j < np; ++j) {
            tail = std::max(tail, std::fabs(src[j]));                    // j1 = 0
            tail = std::max(tail, std::fabs(src[(np - 1) * np + j]));    // j1 = np-1
            tail = std::max(tail, std::fabs(src[j * np]));               // j2 = 0
            tail = std::max(tail, std::fabs(src[j * np + np - 1]));      // j2 = np-1
        }
    }
    if (tail > rel_tol * peak)
        fail(ErrorCode::TailMass,
             "field does not decay at the momentum boundary (ratio " +
                 std::to_string(tail / peak) + ")");
}

RadialQuadrature radial_quadrature(const PhaseSpaceGrid& g) {
    RadialQuadrature q;
    const double cell = g.dp() * g.dp();
    double i0 = 0, i1 = 0, i2 = 0;
    for (std::size_t j1 = 0; j1 < g.np; ++j1)
        for (std::size_t j2 = 0; j2 < g.np; ++j2) {
            double p1 = g.p(j1), p2 = g.p(j2);
            double r2 = p1 * p1 + p2 * p2;
            double e = std::exp(-0.5 * r2);
            i0 += e;
            i1 += std::sqrt(r2) * e;
            i2 += r2 * e;
        }
    q.I0 = i0 * cell;
    q.I1 = i1 * cell;
    q.I2 = i2 * cell;
    q.mu = q.I1 / q.I0;
    double m2 = 0;
    for (std::size_t j1 = 0; j1 < g.np; ++j1)
        for (std::size_t j2 = 0; j2 < g.np; ++j2) {
            double p1 = g.p(j1), p2 = g.p(j2);
            double r = std::sqrt(p1 * p1 + p2 * p2);
            m2 += (q.mu - r) * (q.mu - r) * std::exp(-0.5 * r * r);
        }
    q.m2hat = m2 * cell / q.I0;
    return q;
}

}  // namespace gm
