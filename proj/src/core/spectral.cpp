#include "core/spectral.hpp"

#include <cmath>

#include "core/fft.hpp"
#include "core/parallel.hpp"

namespace gm {

namespace {

// Apply d/dx along one axis of a flattened array: lines of `len` samples with
// `stride` between them; `nlines` lines, line l starting at base(l).
// Scratch is reused across each chunk of lines.
template <typename BaseFn>
void spectral_derivative_lines(double* data, std::size_t nlines, std::size_t len,
                               std::size_t stride, const std::vector<double>& wavenum,
                               BaseFn base) {
    const Fft& plan = fft_plan(len);
    const double inv = 1.0 / double(len);
    std::size_t chunk = std::max<std::size_t>(1, nlines / (8u * std::max(1, thread_count())));
    parallel_for_chunks(nlines, chunk, [&](std::size_t lo, std::size_t hi) {
        std::vector<cplx> buf(len);
        for (std::size_t l = lo; l < hi; ++l) {
            double* d = data + base(l);
            if (stride == 1) {
                for (std::size_t j = 0; j < len; ++j) buf[j] = d[j];
            } else {
                for (std::size_t j = 0; j < len; ++j) buf[j] = d[j * stride];
            }
            plan.forward(buf.data());
            for (std::size_t j = 0; j < len; ++j)
                buf[j] = cplx(-buf[j].imag() * wavenum[j], buf[j].real() * wavenum[j]);
            plan.inverse_unscaled(buf.data());
            if (stride == 1) {
                for (std::size_t j = 0; j < len; ++j) d[j] = buf[j].real() * inv;
            } else {
                for (std::size_t j = 0; j < len; ++j) d[j * stride] = buf[j].real() * inv;
            }
        }
    });
}

std::vector<double> pos_wavenumbers(const PosGrid& g) {
    std::vector<double> k(g.n);
    for (std::size_t j = 0; j < g.n; ++j) k[j] = g.wavenumber(j);
    return k;
}

}  // namespace

PosField pos_derivative(const PosField& f, int axis) {
    PosField out = f;
    const std::size_t n = f.grid.n;
    auto k = pos_wavenumbers(f.grid);
    if (axis == 0) {
        spectral_derivative_lines(out.v.data(), n, n, n, k, [&](std::size_t l) { return l; });
    } else {
        spectral_derivative_lines(out.v.data(), n, n, 1, k, [&](std::size_t l) { return l * n; });
    }
    return out;
}

PosVec2 pos_gradient(const PosField& f) {
    PosVec2 g(f.grid);
    g.x = pos_derivative(f, 0);
    g.y = pos_derivative(f, 1);
    return g;
}

PosField pos_laplacian(const PosField& f) {
    // single pass in 2D spectral space
    const std::size_t n = f.grid.n;
    auto k = pos_wavenumbers(f.grid);
    std::vector<cplx> buf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) buf[i] = f.v[i];
    const Fft& plan = fft_plan(n);
    parallel_for(n, [&](std::size_t i) { plan.forward(&buf[i * n]); });
    parallel_for(n, [&](std::size_t j) {
        std::vector<cplx> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = buf[i * n + j];
        plan.forward(col.data());
        for (std::size_t i = 0; i < n; ++i) col[i] *= -(k[i] * k[i] + k[j] * k[j]);
        plan.inverse_unscaled(col.data());
        for (std::size_t i = 0; i < n; ++i) buf[i * n + j] = col[i];
    });
    PosField out(f.grid);
    const double inv = 1.0 / double(n * n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<cplx> row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = buf[i * n + j];
        plan.inverse_unscaled(row.data());
        for (std::size_t j = 0; j < n; ++j) out.v[i * n + j] = row[j].real() * inv;
    });
    return out;
}

PosField pos_divergence(const PosVec2& v) {
    PosField dx = pos_derivative(v.x, 0);
    PosField dy = pos_derivative(v.y, 1);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.v[i] += dy.v[i];
    return dx;
}

PosField pos_shift(const PosField& f, double d1, double d2) {
    const std::size_t n = f.grid.n;
    auto k = pos_wavenumbers(f.grid);
    std::vector<cplx> buf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) buf[i] = f.v[i];
    const Fft& plan = fft_plan(n);
    for (std::size_t i = 0; i < n; ++i) plan.forward(&buf[i * n]);
    std::vector<cplx> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = buf[i * n + j];
        plan.forward(col.data());
        for (std::size_t i = 0; i < n; ++i)
            col[i] *= std::exp(cplx(0.0, k[i] * d1 + k[j] * d2));
        plan.inverse_unscaled(col.data());
        for (std::size_t i = 0; i < n; ++i) buf[i * n + j] = col[i];
    }
    PosField out(f.grid);
    const double inv = 1.0 / double(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) col[j] = buf[i * n + j];
        plan.inverse_unscaled(col.data());
        for (std::size_t j = 0; j < n; ++j) out.v[i * n + j] = col[j].real() * inv;
    }
    return out;
}

namespace {
struct AxisGeom {
    std::size_t nlines, len, stride;
};

AxisGeom axis_geometry(const PhaseSpaceGrid& g, int axis) {
    const std::size_t nr = g.nr, np = g.np, P = np * np;
    switch (axis) {
        case 0: return {nr * P, nr, nr * P};
        case 1: return {nr * P, nr, P};
        case 2: return {nr * nr * np, np, np};
        case 3: return {nr * nr * np, np, 1};
        default: fail(ErrorCode::ValidationError, "phase derivative axis out of range");
    }
}

std::size_t axis_line_base(const PhaseSpaceGrid& g, int axis, std::size_t l) {
    const std::size_t nr = g.nr, np = g.np, P = np * np;
    switch (axis) {
        case 0: return l;
        case 1: return (l / P) * nr * P + (l % P);
        case 2: return (l / np) * P + (l % np);
        default: return l * np;
    }
}

std::vector<double> axis_wavenumbers(const PhaseSpaceGrid& g, int axis) {
    std::vector<double> k;
    if (axis <= 1) {
        k.resize(g.nr);
        for (std::size_t j = 0; j < g.nr; ++j) k[j] = g.r_wavenumber(j);
    } else {
        k.resize(g.np);
        for (std::size_t j = 0; j < g.np; ++j) k[j] = g.p_wavenumber(j);
    }
    return k;
}
}  // namespace

void phase_derivative_many(int axis, const std::vector<const PhaseField*>& in,
                           const std::vector<PhaseField*>& out) {
    if (in.empty()) return;
    if (in.size() != out.size())
        fail(ErrorCode::Internal, "phase_derivative_many in/out size mismatch");
    const auto& g = in[0]->grid;
    const AxisGeom geom = axis_geometry(g, axis);
    const auto k = axis_wavenumbers(g, axis);
    const Fft& plan = fft_plan(geom.len);
    const double inv = 1.0 / double(geom.len);
    const std::size_t nf = in.size();
    const std::size_t total = nf * geom.nlines;
    std::size_t chunk = std::max<std::size_t>(1, total / (8u * std::max(1, thread_count())));
    parallel_for_chunks(total, chunk, [&](std::size_t lo, std::size_t hi) {
        std::vector<cplx> buf(geom.len);
        for (std::size_t t = lo; t < hi; ++t) {
            const std::size_t fidx = t / geom.nlines, l = t % geom.nlines;
            const std::size_t base = axis_line_base(g, axis, l);
            const double* s = in[fidx]->v.data() + base;
            double* d = out[fidx]->v.data() + base;
            for (std::size_t j = 0; j < geom.len; ++j) buf[j] = s[j * geom.stride];
            plan.forward(buf.data());
            for (std::size_t j = 0; j < geom.len; ++j)
                buf[j] = cplx(-buf[j].imag() * k[j], buf[j].real() * k[j]);
            plan.inverse_unscaled(buf.data());
            for (std::size_t j = 0; j < geom.len; ++j) d[j * geom.stride] = buf[j].real() * inv;
        }
    });
}

PhaseField phase_derivative(const PhaseField& f, int axis) {
    PhaseField out(f.grid);
    phase_derivative_many(axis, {&f}, {&out});
    return out;
}

PhaseDerivs phase_derivs(const PhaseField& f, bool second_order) {
    PhaseDerivs out;
    for (int i = 0; i < 4; ++i) out.d[i] = PhaseField(f.grid);
    phase_derivative_many(0, {&f}, {&out.d[0]});
    phase_derivative_many(1, {&f}, {&out.d[1]});
    phase_derivative_many(2, {&f}, {&out.d[2]});
    phase_derivative_many(3, {&f}, {&out.d[3]});
    if (second_order) {
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) out.dd[i][j] = PhaseField(f.grid);
        for (int j = 0; j < 4; ++j) {
            std::vector<const PhaseField*> in;
            std::vector<PhaseField*> o;
            for (int i = 0; i <= j; ++i) {
                in.push_back(&out.d[i]);
                o.push_back(&out.dd[i][j]);
            }
            phase_derivative_many(j, in, o);
        }
    }
    return out;
}

}  // namespace gm
