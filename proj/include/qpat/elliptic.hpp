#pragma once

#include <vector>

#include "qpat/cg.hpp"
#include "qpat/grid.hpp"

namespace qpat {

enum class FluxAverage { harmonic, arithmetic };

struct SolverConfig {
    double rel_tol = 1e-10;
    long max_iter = 0;  // 0 selects 20 * node count
    FluxAverage flux_average = FluxAverage::harmonic;
    bool jacobi = false;

    void validate() const;
    long iteration_limit(const Grid& g) const;
};

/// -div(diffusion grad u) + reaction u = source in the domain, u = dirichlet on the boundary.
struct EllipticProblem {
    ScalarField diffusion;
    ScalarField reaction;
    ScalarField source;
    BoundaryTrace dirichlet;

    const Grid& grid() const { return diffusion.grid; }
    void validate() const;
};

EllipticProblem make_problem(ScalarField diffusion, ScalarField reaction, ScalarField source, BoundaryTrace dirichlet);

/// Harmonic or arithmetic mean of two nodal diffusivities.
double face_coefficient(double a, double b, FluxAverage avg);

/// Fixed-width sparse storage: one diagonal plus up to 2 * dim neighbours per row.
struct StencilMatrix {
    int width = 0;                 // slots per row; slot 0 is the diagonal
    std::vector<long> cols;        // rows * width, -1 marks an unused slot
    std::vector<double> vals;      // rows * width

    std::size_t rows() const { return width ? cols.size() / static_cast<std::size_t>(width) : 0; }
    void multiply(std::span<const double> x, std::span<double> y) const;
};

struct AssembledSystem {
    Grid grid;
    std::vector<std::size_t> unknown_nodes;  // interior nodes in ascending order
    std::vector<long> node_to_unknown;       // -1 on boundary nodes
    StencilMatrix matrix;
    std::vector<double> rhs;

    /// Matrix entry between two interior nodes (0 if not coupled).
    double entry(std::size_t row_node, std::size_t col_node) const;
};

/**
 * Flux-form finite differences over the interior nodes:
 *   (A u)_p = sum_q k_pq (u_p - u_q) / h^2 + reaction_p u_p,
 * with k_pq the face mean of the diffusion. Dirichlet values are moved to the
 * right-hand side. Throws CoefficientError on nonpositive diffusion.
 */
AssembledSystem assemble(const EllipticProblem& p, FluxAverage avg = FluxAverage::harmonic);

struct SolveResult {
    ScalarField u;
    SolverStats stats;
};

SolveResult solve_detailed(const EllipticProblem& p, const SolverConfig& cfg = {});
/// Throws SolverError if CG does not reach cfg.rel_tol within the iteration limit.
ScalarField solve(const EllipticProblem& p, const SolverConfig& cfg = {});

/**
 * Scaled residual of u against the discrete problem:
 *   || A u - rhs || / || |A| |u| + |source| ||
 * over the interior nodes, where |A| |u| collects the absolute flux and
 * reaction terms (boundary neighbours included). Zero for the discrete
 * solution, O(h^2)/O(h^-2) for smooth exact solutions.
 */
double residual(const EllipticProblem& p, const ScalarField& u, FluxAverage avg = FluxAverage::harmonic);

}  // namespace qpat
