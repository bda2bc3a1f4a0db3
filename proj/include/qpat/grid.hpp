#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qpat {

using Point = std::array<double, 3>;

/**
 * Uniform tensor-product grid on the unit square (dim = 2) or the unit cube
 * (dim = 3). Nodes are numbered row-major with x fastest:
 * id = i + n * (j + n * k).
 *
 * The boundary enumeration is fixed at construction:
 *  - 2D: counterclockwise along the perimeter starting at the origin, so that
 *    boundary position m sits at arc length m * h.
 *  - 3D: face-major (x=0, x=1, y=0, y=1, z=0, z=1), lexicographic inside a
 *    face; a node shared by several faces belongs to the first one.
 *
 * Grid is a cheap-to-copy value; the boundary tables are shared.
 */
class Grid {
public:
    int dim() const noexcept { return dim_; }
    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    std::string domain() const { return dim_ == 2 ? "unit-square" : "unit-cube"; }

    std::size_t node_count() const noexcept { return count_; }
    std::size_t boundary_count() const noexcept { return tables_->boundary_nodes.size(); }

    std::size_t index(int i, int j, int k = 0) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n_) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_) * k);
    }
    // Integer coordinates of a node; the third entry is 0 in 2D.
    std::array<int, 3> coords(std::size_t node) const noexcept;
    Point position(std::size_t node) const noexcept;

    bool is_boundary(std::size_t node) const noexcept { return tables_->trace_position[node] >= 0; }
    // Position of a boundary node inside a BoundaryTrace, or -1 for interior nodes.
    long trace_position(std::size_t node) const noexcept { return tables_->trace_position[node]; }

    std::span<const std::size_t> boundary_nodes() const noexcept { return tables_->boundary_nodes; }
    // Surface quadrature weight of each boundary position (trapezoidal per face).
    std::span<const double> boundary_weights() const noexcept { return tables_->boundary_weights; }
    // 3D only: face owning each boundary position, encoded 2 * axis + side.
    std::span<const int> boundary_faces() const noexcept { return tables_->boundary_faces; }

    // Trapezoidal volume weight of a node.
    double volume_weight(std::size_t node) const noexcept;
    double boundary_measure() const noexcept { return dim_ == 2 ? 4.0 : 6.0; }
    // Distance from a node to the boundary of the unit square/cube.
    double boundary_distance(std::size_t node) const noexcept;

    friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.dim_ == b.dim_ && a.n_ == b.n_; }

private:
    friend Grid build_grid(int dim, int n);

    struct Tables {
        std::vector<std::size_t> boundary_nodes;
        std::vector<double> boundary_weights;
        std::vector<int> boundary_faces;
        std::vector<long> trace_position;
    };

    int dim_ = 2;
    int n_ = 0;
    double h_ = 0.0;
    std::size_t count_ = 0;
    std::shared_ptr<const Tables> tables_;
};

/// Builds the grid; throws ParameterError unless dim is 2 or 3 and n is odd in [17, 1025].
Grid build_grid(int dim, int n);

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(Grid g, double fill = 0.0) : grid(std::move(g)), values(grid.node_count(), fill) {}
    ScalarField(Grid g, std::vector<double> v);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const noexcept { return values.size(); }
};

struct VectorField {
    Grid grid;
    // Component-major: components[axis * node_count + node].
    std::vector<double> components;

    VectorField() = default;
    explicit VectorField(Grid g)
        : grid(std::move(g)), components(static_cast<std::size_t>(grid.dim()) * grid.node_count(), 0.0) {}

    double& at(int axis, std::size_t node) { return components[static_cast<std::size_t>(axis) * grid.node_count() + node]; }
    double at(int axis, std::size_t node) const {
        return components[static_cast<std::size_t>(axis) * grid.node_count() + node];
    }
    double magnitude(std::size_t node) const;
};

struct BoundaryTrace {
    Grid grid;
    // values[m] belongs to grid.boundary_nodes()[m].
    std::vector<double> values;

    BoundaryTrace() = default;
    explicit BoundaryTrace(Grid g, double fill = 0.0) : grid(std::move(g)), values(grid.boundary_count(), fill) {}
    BoundaryTrace(Grid g, std::vector<double> v);

    double& operator[](std::size_t m) { return values[m]; }
    double operator[](std::size_t m) const { return values[m]; }
    std::size_t size() const noexcept { return values.size(); }
};

template <class Fn>
ScalarField sample(const Grid& grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t p = 0; p < grid.node_count(); ++p) f[p] = fn(grid.position(p));
    return f;
}

template <class Fn>
BoundaryTrace sample_boundary(const Grid& grid, Fn&& fn) {
    BoundaryTrace t(grid);
    const auto nodes = grid.boundary_nodes();
    for (std::size_t m = 0; m < nodes.size(); ++m) t[m] = fn(grid.position(nodes[m]));
    return t;
}

// Arc length of each boundary position (2D only): m * h.
std::vector<double> arc_lengths(const Grid& grid);

BoundaryTrace restrict_to_boundary(const ScalarField& f);
void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace qpat
