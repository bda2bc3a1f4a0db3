#include "qpat/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpat/errors.hpp"

namespace qpat {

double interior_l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) s += f.grid.volume_weight(p) * f[p] * f[p];
    return std::sqrt(s);
}

double interior_linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double boundary_l2_norm(const BoundaryTrace& t) {
    const auto w = t.grid.boundary_weights();
    double s = 0.0;
    for (std::size_t m = 0; m < t.size(); ++m) s += w[m] * t[m] * t[m];
    return std::sqrt(s);
}

double boundary_linf_norm(const BoundaryTrace& t) {
    double m = 0.0;
    for (double v : t.values) m = std::max(m, std::abs(v));
    return m;
}

double boundary_mean(const BoundaryTrace& t) {
    const auto w = t.grid.boundary_weights();
    double s = 0.0;
    for (std::size_t m = 0; m < t.size(); ++m) s += w[m] * t[m];
    return s / t.grid.boundary_measure();
}

double boundary_h_half_norm(const BoundaryTrace& t) {
    if (t.grid.dim() != 2) throw OperationError("boundary_h_half_norm is 2D only; use gagliardo_h_half in 3D");
    const std::size_t count = t.size();
    const double perimeter = t.grid.boundary_measure();

    std::vector<double> cos_table(count), sin_table(count);
    for (std::size_t m = 0; m < count; ++m) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(count);
        cos_table[m] = std::cos(phase);
        sin_table[m] = std::sin(phase);
    }

    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        double re = 0.0, im = 0.0;
        std::size_t idx = 0;
        for (std::size_t j = 0; j < count; ++j) {
            re += t[j] * cos_table[idx];
            im -= t[j] * sin_table[idx];
            idx += k;
            if (idx >= count) idx -= count;
        }
        re /= static_cast<double>(count);
        im /= static_cast<double>(count);
        const double wave = k <= count / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(count);
        const double kappa = 2.0 * std::numbers::pi * wave / perimeter;
        total += std::sqrt(1.0 + kappa * kappa) * perimeter * (re * re + im * im);
    }
    return std::sqrt(total);
}

double gagliardo_h_half(const BoundaryTrace& t) {
    const Grid& g = t.grid;
    const auto nodes = g.boundary_nodes();
    const auto w = g.boundary_weights();
    const int dim = g.dim();
    const std::size_t count = nodes.size();

    std::vector<Point> pos(count);
    for (std::size_t m = 0; m < count; ++m) pos[m] = g.position(nodes[m]);

    double l2 = boundary_l2_norm(t);
    double seminorm = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
        double row = 0.0;
        for (std::size_t b = a + 1; b < count; ++b) {
            const double diff = t[a] - t[b];
            if (diff == 0.0) continue;
            double r2 = 0.0;
            for (int c = 0; c < dim; ++c) r2 += (pos[a][c] - pos[b][c]) * (pos[a][c] - pos[b][c]);
            const double kernel = dim == 2 ? r2 : r2 * std::sqrt(r2);
            row += diff * diff / kernel * w[b];
        }
        seminorm += 2.0 * row * w[a];
    }
    return std::sqrt(l2 * l2 + seminorm);
}

namespace {

// d/dx_axis at a node along one grid line; second order everywhere.
double line_derivative(const ScalarField& f, std::size_t node, int c, std::size_t stride, int last, double h) {
    if (c == 0) return (-3.0 * f[node] + 4.0 * f[node + stride] - f[node + 2 * stride]) / (2.0 * h);
    if (c == last) return (3.0 * f[node] - 4.0 * f[node - stride] + f[node - 2 * stride]) / (2.0 * h);
    return (f[node + stride] - f[node - stride]) / (2.0 * h);
}

std::size_t axis_stride(const Grid& g, int axis) {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(g.n());
    return s;
}

}  // namespace

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField out(g);
    const int last = g.n() - 1;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        const auto c = g.coords(p);
        for (int a = 0; a < g.dim(); ++a) out.at(a, p) = line_derivative(f, p, c[a], axis_stride(g, a), last, g.h());
    }
    return out;
}

ScalarField gradient_magnitude(const ScalarField& f) {
    const VectorField grad = gradient(f);
    ScalarField out(f.grid);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = grad.magnitude(p);
    return out;
}

double ball_integral(const ScalarField& f, const Point& x0, double r) {
    const Grid& g = f.grid;
    const int dim = g.dim();
    if (!(r >= 0.0)) throw GeometryError("ball radius must be nonnegative");
    double inside = 1.0;
    for (int a = 0; a < dim; ++a) inside = std::min({inside, x0[a], 1.0 - x0[a]});
    if (inside < 0.0 || r > inside + 1e-12)
        throw GeometryError("ball of radius " + std::to_string(r) + " escapes the domain (boundary distance " +
                            std::to_string(inside) + ")");

    const double h = g.h();
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((x0[a] - r) / h)) - 1);
        hi[a] = std::min(g.n() - 1, static_cast<int>(std::ceil((x0[a] + r) / h)) + 1);
    }
    const double r2 = r * r * (1.0 + 1e-14);
    double s = 0.0;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const double dx = i * h - x0[0], dy = j * h - x0[1], dz = dim == 3 ? k * h - x0[2] : 0.0;
                if (dx * dx + dy * dy + dz * dz <= r2) s += f[g.index(i, j, k)];
            }
    return s * std::pow(h, dim);
}

namespace {

// Value of the trace at the grid node offset from `node` by `delta` along `axis`.
double trace_at(const BoundaryTrace& t, std::size_t node, int axis, int delta) {
    const Grid& g = t.grid;
    const auto stride = static_cast<long>(axis_stride(g, axis));
    const auto target = static_cast<std::size_t>(static_cast<long>(node) + delta * stride);
    return t[static_cast<std::size_t>(g.trace_position(target))];
}

template <class PerAxis>
void for_face_axes(const BoundaryTrace& t, std::size_t m, PerAxis&& fn) {
    const Grid& g = t.grid;
    const int normal = g.boundary_faces()[m] / 2;
    const std::size_t node = g.boundary_nodes()[m];
    const auto c = g.coords(node);
    for (int a = 0; a < 3; ++a)
        if (a != normal) fn(a, node, c[a]);
}

}  // namespace

BoundaryTrace tangential_gradient(const BoundaryTrace& t) {
    const Grid& g = t.grid;
    BoundaryTrace out(g);
    const std::size_t count = t.size();
    const double h = g.h();
    if (g.dim() == 2) {
        for (std::size_t m = 0; m < count; ++m)
            out[m] = (t[(m + 1) % count] - t[(m + count - 1) % count]) / (2.0 * h);
        return out;
    }
    const int last = g.n() - 1;
    for (std::size_t m = 0; m < count; ++m) {
        double s = 0.0;
        for_face_axes(t, m, [&](int a, std::size_t node, int c) {
            double d;
            if (c == 0)
                d = (-3.0 * t[m] + 4.0 * trace_at(t, node, a, 1) - trace_at(t, node, a, 2)) / (2.0 * h);
            else if (c == last)
                d = (3.0 * t[m] - 4.0 * trace_at(t, node, a, -1) + trace_at(t, node, a, -2)) / (2.0 * h);
            else
                d = (trace_at(t, node, a, 1) - trace_at(t, node, a, -1)) / (2.0 * h);
            s += d * d;
        });
        out[m] = std::sqrt(s);
    }
    return out;
}

BoundaryTrace tangential_second_difference(const BoundaryTrace& t) {
    const Grid& g = t.grid;
    BoundaryTrace out(g);
    const std::size_t count = t.size();
    const double h2 = g.h() * g.h();
    if (g.dim() == 2) {
        for (std::size_t m = 0; m < count; ++m)
            out[m] = (t[(m + 1) % count] - 2.0 * t[m] + t[(m + count - 1) % count]) / h2;
        return out;
    }
    const int last = g.n() - 1;
    for (std::size_t m = 0; m < count; ++m) {
        double worst = 0.0;
        for_face_axes(t, m, [&](int a, std::size_t node, int c) {
            double d;
            if (c == 0)
                d = 2.0 * t[m] - 5.0 * trace_at(t, node, a, 1) + 4.0 * trace_at(t, node, a, 2) - trace_at(t, node, a, 3);
            else if (c == last)
                d = 2.0 * t[m] - 5.0 * trace_at(t, node, a, -1) + 4.0 * trace_at(t, node, a, -2) -
                    trace_at(t, node, a, -3);
            else
                d = trace_at(t, node, a, 1) - 2.0 * t[m] + trace_at(t, node, a, -1);
            worst = std::max(worst, std::abs(d / h2));
        });
        out[m] = worst;
    }
    return out;
}

}  // namespace qpat
