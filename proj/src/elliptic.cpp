#include "qpat/elliptic.hpp"

#include <cmath>
#include <string>

#include "qpat/errors.hpp"

namespace qpat {

void SolverConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-4)) throw ParameterError("solver rel_tol must lie in (0, 1e-4]");
    if (max_iter < 0) throw ParameterError("solver max_iter must be >= 1 (0 selects the default)");
}

long SolverConfig::iteration_limit(const Grid& g) const {
    return max_iter > 0 ? max_iter : 20 * static_cast<long>(g.node_count());
}

void EllipticProblem::validate() const {
    const Grid& g = diffusion.grid;
    require_same_grid(g, reaction.grid, "elliptic problem");
    require_same_grid(g, source.grid, "elliptic problem");
    require_same_grid(g, dirichlet.grid, "elliptic problem");
    for (std::size_t p = 0; p < diffusion.size(); ++p) {
        if (!(diffusion[p] > 0.0) || !std::isfinite(diffusion[p]))
            throw CoefficientError("diffusion must be strictly positive; node " + std::to_string(p) + " has " +
                                   std::to_string(diffusion[p]));
        if (!(reaction[p] >= 0.0) || !std::isfinite(reaction[p]))
            throw CoefficientError("reaction must be nonnegative; node " + std::to_string(p) + " has " +
                                   std::to_string(reaction[p]));
    }
}

EllipticProblem make_problem(ScalarField diffusion, ScalarField reaction, ScalarField source, BoundaryTrace dirichlet) {
    return EllipticProblem{std::move(diffusion), std::move(reaction), std::move(source), std::move(dirichlet)};
}

double face_coefficient(double a, double b, FluxAverage avg) {
    return avg == FluxAverage::harmonic ? 2.0 * a * b / (a + b) : 0.5 * (a + b);
}

void StencilMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = rows();
    const auto w = static_cast<std::size_t>(width);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            const long c = cols[r * w + k];
            if (c >= 0) s += vals[r * w + k] * x[static_cast<std::size_t>(c)];
        }
        y[r] = s;
    }
}

double AssembledSystem::entry(std::size_t row_node, std::size_t col_node) const {
    const long r = node_to_unknown.at(row_node);
    const long c = node_to_unknown.at(col_node);
    if (r < 0 || c < 0) return 0.0;
    const auto w = static_cast<std::size_t>(matrix.width);
    for (std::size_t k = 0; k < w; ++k)
        if (matrix.cols[static_cast<std::size_t>(r) * w + k] == c) return matrix.vals[static_cast<std::size_t>(r) * w + k];
    return 0.0;
}

namespace {

template <class Visit>
void for_each_neighbour(const Grid& g, std::size_t node, Visit&& visit) {
    const auto c = g.coords(node);
    std::size_t stride = 1;
    for (int a = 0; a < g.dim(); ++a) {
        if (c[a] > 0) visit(node - stride);
        if (c[a] < g.n() - 1) visit(node + stride);
        stride *= static_cast<std::size_t>(g.n());
    }
}

}  // namespace

AssembledSystem assemble(const EllipticProblem& p, FluxAverage avg) {
    p.validate();
    const Grid& g = p.grid();
    AssembledSystem sys;
    sys.grid = g;
    sys.node_to_unknown.assign(g.node_count(), -1);
    for (std::size_t node = 0; node < g.node_count(); ++node) {
        if (g.is_boundary(node)) continue;
        sys.node_to_unknown[node] = static_cast<long>(sys.unknown_nodes.size());
        sys.unknown_nodes.push_back(node);
    }

    const int width = 2 * g.dim() + 1;
    const auto w = static_cast<std::size_t>(width);
    const std::size_t rows = sys.unknown_nodes.size();
    sys.matrix.width = width;
    sys.matrix.cols.assign(rows * w, -1);
    sys.matrix.vals.assign(rows * w, 0.0);
    sys.rhs.assign(rows, 0.0);

    const double inv_h2 = 1.0 / (g.h() * g.h());
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t node = sys.unknown_nodes[r];
        double diag = p.reaction[node];
        double rhs = p.source[node];
        std::size_t slot = 1;
        for_each_neighbour(g, node, [&](std::size_t q) {
            const double k = face_coefficient(p.diffusion[node], p.diffusion[q], avg) * inv_h2;
            diag += k;
            const long col = sys.node_to_unknown[q];
            if (col >= 0) {
                sys.matrix.cols[r * w + slot] = col;
                sys.matrix.vals[r * w + slot] = -k;
                ++slot;
            } else {
                rhs += k * p.dirichlet[static_cast<std::size_t>(g.trace_position(q))];
            }
        });
        sys.matrix.cols[r * w] = static_cast<long>(r);
        sys.matrix.vals[r * w] = diag;
        sys.rhs[r] = rhs;
    }
    return sys;
}

SolveResult solve_detailed(const EllipticProblem& p, const SolverConfig& cfg) {
    cfg.validate();
    const AssembledSystem sys = assemble(p, cfg.flux_average);
    const Grid& g = sys.grid;
    const std::size_t rows = sys.unknown_nodes.size();

    std::vector<double> x(rows, 0.0);
    std::vector<double> inv_diag;
    if (cfg.jacobi) {
        inv_diag.resize(rows);
        for (std::size_t r = 0; r < rows; ++r)
            inv_diag[r] = 1.0 / sys.matrix.vals[r * static_cast<std::size_t>(sys.matrix.width)];
    }
    auto apply = [&](std::span<const double> in, std::span<double> out) { sys.matrix.multiply(in, out); };
    const SolverStats stats =
        linalg::conjugate_gradient(apply, sys.rhs, x, inv_diag, cfg.rel_tol, cfg.iteration_limit(g));

    ScalarField u(g);
    const auto bnodes = g.boundary_nodes();
    for (std::size_t m = 0; m < bnodes.size(); ++m) u[bnodes[m]] = p.dirichlet[m];
    for (std::size_t r = 0; r < rows; ++r) u[sys.unknown_nodes[r]] = x[r];
    return {std::move(u), stats};
}

ScalarField solve(const EllipticProblem& p, const SolverConfig& cfg) {
    auto result = solve_detailed(p, cfg);
    if (!result.stats.converged)
        throw SolverError("conjugate gradients did not converge in " + std::to_string(result.stats.iterations) +
                              " iterations (relative residual " + std::to_string(result.stats.final_residual) + ")",
                          result.stats.final_residual, result.stats.iterations);
    return std::move(result.u);
}

double residual(const EllipticProblem& p, const ScalarField& u, FluxAverage avg) {
    p.validate();
    const Grid& g = p.grid();
    require_same_grid(g, u.grid, "residual");
    const double inv_h2 = 1.0 / (g.h() * g.h());

    auto value = [&](std::size_t q) {
        const long m = g.trace_position(q);
        return m >= 0 ? p.dirichlet[static_cast<std::size_t>(m)] : u[q];
    };

    double num = 0.0, den = 0.0;
    for (std::size_t node = 0; node < g.node_count(); ++node) {
        if (g.is_boundary(node)) continue;
        const double up = u[node];
        double r = p.reaction[node] * up - p.source[node];
        double scale = std::abs(p.reaction[node] * up) + std::abs(p.source[node]);
        for_each_neighbour(g, node, [&](std::size_t q) {
            const double k = face_coefficient(p.diffusion[node], p.diffusion[q], avg) * inv_h2;
            const double uq = value(q);
            r += k * (up - uq);
            scale += k * (std::abs(up) + std::abs(uq));
        });
        num += r * r;
        den += scale * scale;
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

}  // namespace qpat
