#include "core/pauli.hpp"

#include <cmath>

#include "core/parallel.hpp"

namespace gm {

std::array<double, 4> pauli_decompose(const Mat2& m, double tol_herm) {
    double scale = 0.0;
    for (const auto& e : m) scale = std::max(scale, std::abs(e));
    double anti = std::max(std::abs(m[0] - std::conj(m[0])),
                           std::abs(m[3] - std::conj(m[3])));
    anti = std::max(anti, std::abs(m[1] - std::conj(m[2])));
    if (anti > tol_herm * std::max(1.0, scale))
        fail(ErrorCode::NonHermitian, "matrix is not hermitian within tolerance");
    return {0.5 * (m[0].real() + m[3].real()),
            0.5 * (m[1].real() + m[2].real()),
            0.5 * (m[2].imag() - m[1].imag()),
            0.5 * (m[0].real() - m[3].real())};
}

Mat2 pauli_compose(double a0, const std::array<double, 3>& a) {
    return {cplx(a0 + a[2], 0.0), cplx(a[0], -a[1]),
            cplx(a[0], a[1]), cplx(a0 - a[2], 0.0)};
}

void require_same(const PauliField& a, const PauliField& b, const char* what) {
    require_same(a.grid(), b.grid(), what);
}

std::array<PhaseField, 3> wedge(const std::array<PhaseField, 3>& a,
                                const std::array<PhaseField, 3>& b) {
    require_same(a[0].grid, b[0].grid, "wedge");
    std::array<PhaseField, 3> out{PhaseField(a[0].grid), PhaseField(a[0].grid), PhaseField(a[0].grid)};
    const std::size_t n = a[0].size();
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            out[0].v[i] = a[1].v[i] * b[2].v[i] - a[2].v[i] * b[1].v[i];
            out[1].v[i] = a[2].v[i] * b[0].v[i] - a[0].v[i] * b[2].v[i];
            out[2].v[i] = a[0].v[i] * b[1].v[i] - a[1].v[i] * b[0].v[i];
        }
    });
    return out;
}

PauliDerivs pauli_derivs(const PauliField& a, bool second_order) {
    PauliDerivs d;
    pauli_derivs_into(a, second_order, d);
    return d;
}

void pauli_derivs_into(const PauliField& a, bool second_order, PauliDerivs& d) {
    // components batched per axis pass to keep parallel dispatch coarse
    d.second = second_order;
    const auto& g = a.grid();
    if (d.c[0].d[0].size() != a.s0.size())
        for (int s = 0; s < 4; ++s)
            for (int i = 0; i < 4; ++i) d.c[s].d[i] = PhaseField(g);
    for (int ax = 0; ax < 4; ++ax) {
        std::vector<const PhaseField*> in;
        std::vector<PhaseField*> out;
        for (int s = 0; s < 4; ++s) {
            in.push_back(&a.comp(s));
            out.push_back(&d.c[s].d[ax]);
        }
        phase_derivative_many(ax, in, out);
    }
    if (second_order) {
        if (d.c[0].dd[0][0].size() != a.s0.size())
            for (int s = 0; s < 4; ++s)
                for (int i = 0; i < 4; ++i)
                    for (int j = i; j < 4; ++j) d.c[s].dd[i][j] = PhaseField(g);
        for (int j = 0; j < 4; ++j) {
            std::vector<const PhaseField*> in;
            std::vector<PhaseField*> out;
            for (int s = 0; s < 4; ++s)
                for (int i = 0; i <= j; ++i) {
                    in.push_back(&d.c[s].d[i]);
                    out.push_back(&d.c[s].dd[i][j]);
                }
            phase_derivative_many(j, in, out);
        }
    }
}

namespace {

// out += coef * (1/2){f, g} using cached first derivatives
void accum_m1(PhaseField& out, double coef, const PhaseDerivs& f, const PhaseDerivs& g) {
    const std::size_t n = out.size();
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double s = f.d[0].v[i] * g.d[2].v[i] + f.d[1].v[i] * g.d[3].v[i]
                     - f.d[2].v[i] * g.d[0].v[i] - f.d[3].v[i] * g.d[1].v[i];
            out.v[i] += coef * 0.5 * s;
        }
    });
}

// out += coef * (f #^(2) g) using cached second derivatives
void accum_m2(PhaseField& out, double coef, const PhaseDerivs& f, const PhaseDerivs& g) {
    const std::size_t n = out.size();
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double s = 0.0;
            for (int j = 0; j < 2; ++j)
                for (int t = 0; t < 2; ++t) {
                    s += f.second(j, t).v[i] * g.second(2 + j, 2 + t).v[i];
                    s -= 2.0 * f.second(j, 2 + t).v[i] * g.second(t, 2 + j).v[i];
                    s += f.second(2 + j, 2 + t).v[i] * g.second(j, t).v[i];
                }
            out.v[i] += coef * (-0.125) * s;
        }
    });
}

void accum_pointwise(PauliField& out, double coef, const PauliField& a, const PauliField& b) {
    const std::size_t n = out.s0.size();
    parallel_for_chunks(n, 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            out.s0.v[i] += coef * (a.s0.v[i] * b.s0.v[i] + a.sv[0].v[i] * b.sv[0].v[i]
                                   + a.sv[1].v[i] * b.sv[1].v[i] + a.sv[2].v[i] * b.sv[2].v[i]);
            for (int s = 0; s < 3; ++s)
                out.sv[s].v[i] += coef * (a.s0.v[i] * b.sv[s].v[i] + b.s0.v[i] * a.sv[s].v[i]);
        }
    });
}

void accum_order1(PauliField& out, double coef, const PauliDerivs& ca, const PauliDerivs& cb) {
    // vector_j -= coef * eta_{jst} m1(a_s, b_t); scalar part vanishes
    accum_m1(out.sv[0], -coef, ca.c[2], cb.c[3]);
    accum_m1(out.sv[0], +coef, ca.c[3], cb.c[2]);
    accum_m1(out.sv[1], -coef, ca.c[3], cb.c[1]);
    accum_m1(out.sv[1], +coef, ca.c[1], cb.c[3]);
    accum_m1(out.sv[2], -coef, ca.c[1], cb.c[2]);
    accum_m1(out.sv[2], +coef, ca.c[2], cb.c[1]);
}

void accum_order2(PauliField& out, double coef, const PauliDerivs& ca, const PauliDerivs& cb) {
    accum_m2(out.s0, coef, ca.c[0], cb.c[0]);
    for (int s = 1; s < 4; ++s) accum_m2(out.s0, coef, ca.c[s], cb.c[s]);
    for (int s = 1; s < 4; ++s) {
        accum_m2(out.sv[s - 1], coef, ca.c[0], cb.c[s]);
        accum_m2(out.sv[s - 1], coef, cb.c[0], ca.c[s]);
    }
}

}  // namespace

PauliField sym_moyal_pauli(int k, const PauliField& a, const PauliField& b) {
    require_same(a, b, "sym_moyal_pauli");
    if (k < 0 || k > 2)
        fail(ErrorCode::UnsupportedOrder, "sym_moyal_pauli supports orders 0..2, got " + std::to_string(k));
    PauliField out(a.grid());
    if (k == 0) {
        accum_pointwise(out, 1.0, a, b);
    } else if (k == 1) {
        PauliDerivs ca = pauli_derivs(a, false), cb = pauli_derivs(b, false);
        accum_order1(out, 1.0, ca, cb);
    } else {
        PauliDerivs ca = pauli_derivs(a, true), cb = pauli_derivs(b, true);
        accum_order2(out, 1.0, ca, cb);
    }
    return out;
}

PhaseField poisson_bracket_cached(const PhaseSpaceGrid& g, const PhaseDerivs& f,
                                  const PhaseDerivs& h) {
    PhaseField out(g);
    accum_m1(out, 2.0, f, h);
    return out;
}

namespace {
inline double m1_at(const PhaseDerivs& f, const PhaseDerivs& g, std::size_t i) {
    return 0.5 * (f.d[0].v[i] * g.d[2].v[i] + f.d[1].v[i] * g.d[3].v[i]
                  - f.d[2].v[i] * g.d[0].v[i] - f.d[3].v[i] * g.d[1].v[i]);
}

inline double m2_at(const PhaseDerivs& f, const PhaseDerivs& g, std::size_t i) {
    double s = 0.0;
    for (int j = 0; j < 2; ++j)
        for (int t = 0; t < 2; ++t) {
            s += f.second(j, t).v[i] * g.second(2 + j, 2 + t).v[i];
            s -= 2.0 * f.second(j, 2 + t).v[i] * g.second(t, 2 + j).v[i];
            s += f.second(2 + j, 2 + t).v[i] * g.second(j, t).v[i];
        }
    return -0.125 * s;
}
}  // namespace

PauliField sym_moyal_series(const PauliField& a, const PauliDerivs& ca,
                            const PauliField& b, const PauliDerivs& cb,
                            double eps, int order) {
    PauliField out(a.grid());
    sym_moyal_series_into(a, ca, b, cb, eps, order, out);
    return out;
}

void sym_moyal_series_into(const PauliField& a, const PauliDerivs& ca,
                           const PauliField& b, const PauliDerivs& cb,
                           double eps, int order, PauliField& out) {
    if (order < 0 || order > 2)
        fail(ErrorCode::UnsupportedOrder, "moyal series truncation must be 0..2");
    if (order >= 2 && (!ca.second || !cb.second))
        fail(ErrorCode::Internal, "second-order caches required for order-2 series");
    const std::size_t n = out.s0.size();
    const double e2 = eps * eps;
    parallel_for_chunks(n, 4096, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double s0 = a.s0.v[i] * b.s0.v[i] + a.sv[0].v[i] * b.sv[0].v[i]
                      + a.sv[1].v[i] * b.sv[1].v[i] + a.sv[2].v[i] * b.sv[2].v[i];
            double v1 = a.s0.v[i] * b.sv[0].v[i] + b.s0.v[i] * a.sv[0].v[i];
            double v2 = a.s0.v[i] * b.sv[1].v[i] + b.s0.v[i] * a.sv[1].v[i];
            double v3 = a.s0.v[i] * b.sv[2].v[i] + b.s0.v[i] * a.sv[2].v[i];
            if (order >= 1) {
                v1 -= eps * (m1_at(ca.c[2], cb.c[3], i) - m1_at(ca.c[3], cb.c[2], i));
                v2 -= eps * (m1_at(ca.c[3], cb.c[1], i) - m1_at(ca.c[1], cb.c[3], i));
                v3 -= eps * (m1_at(ca.c[1], cb.c[2], i) - m1_at(ca.c[2], cb.c[1], i));
            }
            if (order >= 2) {
                s0 += e2 * (m2_at(ca.c[0], cb.c[0], i) + m2_at(ca.c[1], cb.c[1], i)
                            + m2_at(ca.c[2], cb.c[2], i) + m2_at(ca.c[3], cb.c[3], i));
                v1 += e2 * (m2_at(ca.c[0], cb.c[1], i) + m2_at(cb.c[0], ca.c[1], i));
                v2 += e2 * (m2_at(ca.c[0], cb.c[2], i) + m2_at(cb.c[0], ca.c[2], i));
                v3 += e2 * (m2_at(ca.c[0], cb.c[3], i) + m2_at(cb.c[0], ca.c[3], i));
            }
            out.s0.v[i] = s0;
            out.sv[0].v[i] = v1;
            out.sv[1].v[i] = v2;
            out.sv[2].v[i] = v3;
        }
    });
}

}  // namespace gm
