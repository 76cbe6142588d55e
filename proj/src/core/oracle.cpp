#include "core/oracle.hpp"

#include <cmath>

#include "core/parallel.hpp"

namespace gm {

namespace {
void axpy_into(PauliField& y, double alpha, const PauliField& x) {
    const std::size_t n = y.s0.size();
    parallel_for_chunks(n, 16384, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            y.s0.v[i] += alpha * x.s0.v[i];
            y.sv[0].v[i] += alpha * x.sv[0].v[i];
            y.sv[1].v[i] += alpha * x.sv[1].v[i];
            y.sv[2].v[i] += alpha * x.sv[2].v[i];
        }
    });
}

void check_magnitude(const PauliField& g) {
    double m = sup_norm(g);
    if (!(m < 1e12))
        fail(ErrorCode::OdeInstability, "quantum_exp_ode field magnitude exceeded 1e12");
}
}  // namespace

PauliField quantum_exp_ode(const PauliField& h, double eps, const OracleConfig& cfg,
                           double beta) {
    if (cfg.moyal_truncation_order < 0 || cfg.moyal_truncation_order > 2)
        fail(ErrorCode::UnsupportedOrder, "oracle truncation order must be 0..2");
    if (cfg.beta_steps < 1) fail(ErrorCode::ValidationError, "beta_steps must be >= 1");
    if (eps < 0.0) fail(ErrorCode::NonPositiveEpsilon, "quantum_exp_ode needs eps >= 0");
    const int K = cfg.moyal_truncation_order;
    const auto& grid = h.grid();
    PauliDerivs ch = pauli_derivs(h, K >= 2);

    PauliField g(grid);
    for (auto& x : g.s0.v) x = 1.0;  // g(0) = sigma_0

    PauliDerivs cg;  // workspace reused across stages
    PauliField k1(grid), k2(grid), k3(grid), k4(grid), t(grid);
    auto rhs = [&](const PauliField& cur, PauliField& out) {
        pauli_derivs_into(cur, K >= 2, cg);
        sym_moyal_series_into(h, ch, cur, cg, eps, K, out);
    };
    auto set_t = [&](const PauliField& base, double coef, const PauliField& dir) {
        const std::size_t n = t.s0.size();
        parallel_for_chunks(n, 16384, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                t.s0.v[i] = base.s0.v[i] + coef * dir.s0.v[i];
                t.sv[0].v[i] = base.sv[0].v[i] + coef * dir.sv[0].v[i];
                t.sv[1].v[i] = base.sv[1].v[i] + coef * dir.sv[1].v[i];
                t.sv[2].v[i] = base.sv[2].v[i] + coef * dir.sv[2].v[i];
            }
        });
    };

    const double dt = beta / double(cfg.beta_steps);
    for (int step = 0; step < cfg.beta_steps; ++step) {
        rhs(g, k1);
        set_t(g, 0.5 * dt, k1);
        rhs(t, k2);
        set_t(g, 0.5 * dt, k2);
        rhs(t, k3);
        set_t(g, dt, k3);
        rhs(t, k4);
        const std::size_t n = g.s0.size();
        parallel_for_chunks(n, 16384, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                g.s0.v[i] += dt / 6.0 * (k1.s0.v[i] + 2.0 * k2.s0.v[i] + 2.0 * k3.s0.v[i] + k4.s0.v[i]);
                for (int s = 0; s < 3; ++s)
                    g.sv[s].v[i] += dt / 6.0 * (k1.sv[s].v[i] + 2.0 * k2.sv[s].v[i] +
                                                2.0 * k3.sv[s].v[i] + k4.sv[s].v[i]);
            }
        });
        check_magnitude(g);
    }
    return g;
}

Mat2 matrix_exp_pointwise(const Mat2& m) {
    // hermitian eigendecomposition: m = V diag(l1,l2) V^H
    auto comp = pauli_decompose(m, 1e-9);
    double a0 = comp[0];
    double ax = comp[1], ay = comp[2], az = comp[3];
    double am = std::sqrt(ax * ax + ay * ay + az * az);
    double l1 = a0 + am, l2 = a0 - am;
    if (am < 1e-300) {
        double e = std::exp(a0);
        return {cplx(e, 0), cplx(0, 0), cplx(0, 0), cplx(e, 0)};
    }
    // projector P+ = (I + n.sigma)/2 with n = a_vec/am
    double nx = ax / am, ny = ay / am, nz = az / am;
    Mat2 pp = {cplx(0.5 * (1 + nz), 0), 0.5 * cplx(nx, -ny),
               0.5 * cplx(nx, ny), cplx(0.5 * (1 - nz), 0)};
    Mat2 out;
    double e1 = std::exp(l1), e2 = std::exp(l2);
    for (int i = 0; i < 4; ++i) {
        cplx pm = (i == 0 || i == 3) ? cplx(1.0, 0.0) - pp[i] : -pp[i];
        out[i] = e1 * pp[i] + e2 * pm;
    }
    return out;
}

Mat2 matrix_exp_frechet(const Mat2& m, const Mat2& d) {
    auto comp = pauli_decompose(m, 1e-9);
    double a0 = comp[0];
    double ax = comp[1], ay = comp[2], az = comp[3];
    double am = std::sqrt(ax * ax + ay * ay + az * az);
    double l[2] = {a0 + am, a0 - am};
    // eigenvectors of m
    cplx v[2][2];
    if (am < 1e-300) {
        v[0][0] = 1; v[0][1] = 0; v[1][0] = 0; v[1][1] = 1;
    } else {
        double nx = ax / am, ny = ay / am, nz = az / am;
        // v0 ~ (1+nz, nx+iny), v1 ~ (-(nx-iny), 1+nz); handle nz ~ -1
        if (nz > -0.9) {
            double norm = std::sqrt(2.0 * (1.0 + nz));
            v[0][0] = cplx((1.0 + nz) / norm, 0);
            v[0][1] = cplx(nx, ny) / norm;
            v[1][0] = cplx(-nx, ny) / norm;
            v[1][1] = cplx((1.0 + nz) / norm, 0);
        } else {
            double norm = std::sqrt(2.0 * (1.0 - nz));
            v[0][0] = cplx(nx, -ny) / norm;
            v[0][1] = cplx((1.0 - nz) / norm, 0);
            v[1][0] = cplx((1.0 - nz) / norm, 0);
            v[1][1] = cplx(-nx, -ny) / norm;
        }
    }
    // d in the eigenbasis: dt_ij = v_i^H d v_j
    cplx dt[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            cplx s = 0;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    s += std::conj(v[i][r]) * d[r * 2 + c] * v[j][c];
            dt[i][j] = s;
        }
    // phi(l_i, l_j) = (e^{l_i} - e^{l_j})/(l_i - l_j)
    auto phi = [](double x, double y) {
        if (std::fabs(x - y) < 1e-7) {
            double mid = 0.5 * (x + y), h = 0.5 * (x - y);
            return std::exp(mid) * sinhc(h);
        }
        return (std::exp(x) - std::exp(y)) / (x - y);
    };
    cplx ft[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) ft[i][j] = dt[i][j] * phi(l[i], l[j]);
    // back to the original basis: sum_ij v_i ft_ij v_j^H
    Mat2 out{cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    out[r * 2 + c] += v[i][r] * ft[i][j] * std::conj(v[j][c]);
    return out;
}

std::uint64_t Rng::next() {
    // splitmix64
    s_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }
double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

PhaseField random_smooth_field(const PhaseSpaceGrid& g, Rng& rng, double amplitude,
                               int max_mode, int n_terms) {
    PhaseField f(g);
    const std::size_t np = g.np, nr = g.nr;
    for (int t = 0; t < n_terms; ++t) {
        int m[4];
        for (int& x : m) x = int(rng.uniform(-double(max_mode), double(max_mode) + 1.0));
        double phase = rng.uniform(0.0, 2.0 * M_PI);
        double c = amplitude * rng.uniform(-1.0, 1.0) / double(n_terms) * 2.0;
        const double wr = 2.0 * M_PI / g.length, wp = 2.0 * M_PI / (2.0 * g.pmax);
        parallel_for(nr * nr, [&](std::size_t ir) {
            std::size_t i1 = ir / nr, i2 = ir % nr;
            double base = m[0] * wr * g.r(i1) + m[1] * wr * g.r(i2) + phase;
            double* dst = &f.v[ir * g.psize()];
            for (std::size_t j1 = 0; j1 < np; ++j1)
                for (std::size_t j2 = 0; j2 < np; ++j2)
                    dst[j1 * np + j2] += c * std::cos(base + m[2] * wp * g.p(j1) +
                                                      m[3] * wp * g.p(j2));
        });
    }
    return f;
}

PauliField random_smooth_symbol(const PhaseSpaceGrid& g, Rng& rng, double amplitude,
                                const std::array<double, 3>& vec_offset) {
    PauliField a(g);
    a.s0 = random_smooth_field(g, rng, amplitude);
    for (int s = 0; s < 3; ++s) {
        a.sv[s] = random_smooth_field(g, rng, amplitude * 0.6);
        for (auto& x : a.sv[s].v) x += vec_offset[s];
    }
    return a;
}

double sup_norm(const PauliField& a) {
    double m = max_abs(a.s0.v.data(), a.s0.size());
    for (int s = 0; s < 3; ++s) m = std::max(m, max_abs(a.sv[s].v.data(), a.sv[s].size()));
    return m;
}

PauliField pauli_axpy(const PauliField& x, double alpha, const PauliField& y) {
    PauliField out = x;
    axpy_into(out, alpha, y);
    return out;
}

double fitted_slope(const std::vector<double>& eps, const std::vector<double>& res) {
    const std::size_t n = eps.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::log(eps[i]), y = std::log(res[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

}  // namespace gm
