#include "qpat/grid.hpp"

#include <algorithm>
#include <cmath>

#include "qpat/errors.hpp"

namespace qpat {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::geometry: return "geometry";
        case ErrorKind::coefficient: return "coefficient";
        case ErrorKind::solver: return "solver";
        case ErrorKind::degeneracy: return "degeneracy";
        case ErrorKind::input: return "input";
        case ErrorKind::operation: return "operation";
    }
    return "unknown";
}

Grid build_grid(int dim, int n) {
    if (dim != 2 && dim != 3) throw ParameterError("grid dimension must be 2 or 3, got " + std::to_string(dim));
    if (n < 17 || n > 1025 || n % 2 == 0)
        throw ParameterError("nodes per axis must be odd and in [17, 1025], got " + std::to_string(n));

    Grid g;
    g.dim_ = dim;
    g.n_ = n;
    g.h_ = 1.0 / (n - 1);
    g.count_ = dim == 2 ? static_cast<std::size_t>(n) * n : static_cast<std::size_t>(n) * n * n;

    auto tables = std::make_shared<Grid::Tables>();
    tables->trace_position.assign(g.count_, -1);
    const double h = g.h_;
    const int last = n - 1;

    auto push = [&](std::size_t node, double w, int face) {
        tables->trace_position[node] = static_cast<long>(tables->boundary_nodes.size());
        tables->boundary_nodes.push_back(node);
        tables->boundary_weights.push_back(w);
        tables->boundary_faces.push_back(face);
    };

    if (dim == 2) {
        for (int i = 0; i < last; ++i) push(g.index(i, 0), h, -1);
        for (int j = 0; j < last; ++j) push(g.index(last, j), h, -1);
        for (int i = last; i > 0; --i) push(g.index(i, last), h, -1);
        for (int j = last; j > 0; --j) push(g.index(0, j), h, -1);
    } else {
        auto edge_w = [&](int c) { return (c == 0 || c == last) ? 0.5 * h : h; };
        for (int face = 0; face < 6; ++face) {
            const int axis = face / 2;
            const int fixed = (face % 2) ? last : 0;
            // Lexicographic over the two free axes, x fastest.
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        std::array<int, 3> c{i, j, k};
                        if (c[axis] != fixed) continue;
                        const std::size_t node = g.index(i, j, k);
                        if (tables->trace_position[node] >= 0) continue;
                        double w = 0.0;
                        for (int a = 0; a < 3; ++a) {
                            if (c[a] != 0 && c[a] != last) continue;
                            // node lies on a face normal to axis a (once per side hit)
                            const int b1 = (a + 1) % 3, b2 = (a + 2) % 3;
                            w += edge_w(c[b1]) * edge_w(c[b2]);
                        }
                        push(node, w, face);
                    }
        }
    }
    g.tables_ = std::move(tables);
    return g;
}

std::array<int, 3> Grid::coords(std::size_t node) const noexcept {
    const auto nn = static_cast<std::size_t>(n_);
    const int i = static_cast<int>(node % nn);
    const int j = static_cast<int>((node / nn) % nn);
    const int k = dim_ == 3 ? static_cast<int>(node / (nn * nn)) : 0;
    return {i, j, k};
}

Point Grid::position(std::size_t node) const noexcept {
    const auto c = coords(node);
    return {c[0] * h_, c[1] * h_, dim_ == 3 ? c[2] * h_ : 0.0};
}

double Grid::volume_weight(std::size_t node) const noexcept {
    const auto c = coords(node);
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) w *= (c[a] == 0 || c[a] == n_ - 1) ? 0.5 * h_ : h_;
    return w;
}

double Grid::boundary_distance(std::size_t node) const noexcept {
    const auto c = coords(node);
    int d = n_;
    for (int a = 0; a < dim_; ++a) d = std::min({d, c[a], n_ - 1 - c[a]});
    return d * h_;
}

double VectorField::magnitude(std::size_t node) const {
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) s += at(a, node) * at(a, node);
    return std::sqrt(s);
}

ScalarField::ScalarField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.node_count())
        throw ParameterError("field has " + std::to_string(values.size()) + " values, grid expects " +
                             std::to_string(grid.node_count()));
}

BoundaryTrace::BoundaryTrace(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.boundary_count())
        throw ParameterError("trace has " + std::to_string(values.size()) + " values, grid expects " +
                             std::to_string(grid.boundary_count()));
}

std::vector<double> arc_lengths(const Grid& grid) {
    std::vector<double> s(grid.boundary_count());
    for (std::size_t m = 0; m < s.size(); ++m) s[m] = static_cast<double>(m) * grid.h();
    return s;
}

BoundaryTrace restrict_to_boundary(const ScalarField& f) {
    BoundaryTrace t(f.grid);
    const auto nodes = f.grid.boundary_nodes();
    for (std::size_t m = 0; m < nodes.size(); ++m) t[m] = f[nodes[m]];
    return t;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw ParameterError(std::string(what) + ": operands live on different grids");
}

}  // namespace qpat
