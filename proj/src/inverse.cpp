#include "qpat/inverse.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"

namespace qpat {

void ReconstructionConfig::validate() const {
    if (!(reg_alpha >= 0.0)) throw ParameterError("reg_alpha must be nonnegative");
    if (!(grad_floor > 0.0)) throw ParameterError("grad_floor must be positive");
    if (!(floor > 0.0)) throw ParameterError("degeneracy floor must be positive");
    solver.validate();
}

ScalarField ratio_field(const ScalarField& H1, const ScalarField& H2, double floor) {
    require_same_grid(H1.grid, H2.grid, "ratio_field");
    if (!(floor > 0.0)) throw ParameterError("ratio_field floor must be positive");
    ScalarField U(H1.grid);
    for (std::size_t p = 0; p < U.size(); ++p) {
        if (!(H1[p] >= floor))
            throw DegeneracyError("H1 = " + std::to_string(H1[p]) + " at node " + std::to_string(p) +
                                      " is below the floor " + std::to_string(floor),
                                  static_cast<long>(p));
        U[p] = H2[p] / H1[p];
    }
    return U;
}

BoundaryTrace boundary_a(const BoundaryTrace& D_boundary, const BoundaryTrace& g1) {
    require_same_grid(D_boundary.grid, g1.grid, "boundary_a");
    BoundaryTrace a(g1.grid);
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (!(g1[m] > 0.0)) throw ParameterError("boundary_a: g1 must be positive");
        a[m] = D_boundary[m] * g1[m] * g1[m];
    }
    return a;
}

namespace {

// Discrete operators of the effective-coefficient least-squares problem.
// L maps nodal a to the interior residuals of -div_h(a grad_h U) with
// arithmetic face means; G maps nodal a to forward edge differences.
class RatioOperators {
public:
    explicit RatioOperators(const ScalarField& U) : U_(U), g_(U.grid) {
        inv_2h2_ = 1.0 / (2.0 * g_.h() * g_.h());
        for (int a = 0; a < g_.dim(); ++a) strides_[a] = a == 0 ? 1 : strides_[a - 1] * static_cast<std::size_t>(g_.n());
    }

    std::size_t nodes() const { return g_.node_count(); }
    std::size_t edges() const { return static_cast<std::size_t>(g_.dim()) * g_.node_count(); }

    void apply_L(std::span<const double> a, std::span<double> out) const {
        for (std::size_t p = 0; p < nodes(); ++p) {
            if (g_.is_boundary(p)) {
                out[p] = 0.0;
                continue;
            }
            double s = 0.0;
            for_each_neighbour(p, [&](std::size_t q) { s += (a[p] + a[q]) * (U_[p] - U_[q]) * inv_2h2_; });
            out[p] = s;
        }
    }

    void apply_LT(std::span<const double> r, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t p = 0; p < nodes(); ++p) {
            if (g_.is_boundary(p)) continue;
            for_each_neighbour(p, [&](std::size_t q) {
                const double c = (U_[p] - U_[q]) * inv_2h2_ * r[p];
                out[p] += c;
                out[q] += c;
            });
        }
    }

    void apply_G(std::span<const double> a, std::span<double> out) const {
        const double inv_h = 1.0 / g_.h();
        for (int ax = 0; ax < g_.dim(); ++ax)
            for (std::size_t p = 0; p < nodes(); ++p) {
                const auto c = g_.coords(p);
                const std::size_t e = static_cast<std::size_t>(ax) * nodes() + p;
                out[e] = c[ax] + 1 < g_.n() ? (a[p + strides_[ax]] - a[p]) * inv_h : 0.0;
            }
    }

    void apply_GT(std::span<const double> d, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        const double inv_h = 1.0 / g_.h();
        for (int ax = 0; ax < g_.dim(); ++ax)
            for (std::size_t p = 0; p < nodes(); ++p) {
                const auto c = g_.coords(p);
                if (c[ax] + 1 >= g_.n()) continue;
                const double v = d[static_cast<std::size_t>(ax) * nodes() + p] * inv_h;
                out[p + strides_[ax]] += v;
                out[p] -= v;
            }
    }

    // Diagonal of L^T L (per node).
    std::vector<double> normal_diagonal() const {
        std::vector<double> diag(nodes(), 0.0);
        for (std::size_t p = 0; p < nodes(); ++p) {
            if (g_.is_boundary(p)) continue;
            double self = 0.0;
            for_each_neighbour(p, [&](std::size_t q) {
                const double c = (U_[p] - U_[q]) * inv_2h2_;
                self += c;
                diag[q] += c * c;
            });
            diag[p] += self * self;
        }
        return diag;
    }

    // Number of edges touching each node, divided by h^2: diagonal of G^T G.
    double gradient_diagonal(std::size_t p) const {
        const auto c = g_.coords(p);
        int count = 0;
        for (int a = 0; a < g_.dim(); ++a) count += (c[a] > 0) + (c[a] + 1 < g_.n());
        return count / (g_.h() * g_.h());
    }

private:
    template <class Visit>
    void for_each_neighbour(std::size_t node, Visit&& visit) const {
        const auto c = g_.coords(node);
        for (int a = 0; a < g_.dim(); ++a) {
            if (c[a] > 0) visit(node - strides_[a]);
            if (c[a] < g_.n() - 1) visit(node + strides_[a]);
        }
    }

    const ScalarField& U_;
    Grid g_;
    double inv_2h2_ = 0.0;
    std::array<std::size_t, 3> strides_{1, 1, 1};
};

double sum_squares(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

template <class Fn>
auto run_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(name);
        throw;
    }
}

}  // namespace

RecoverAResult recover_a_detailed(const ScalarField& U, const BoundaryTrace& a_bdry, const ReconstructionConfig& cfg) {
    cfg.validate();
    require_same_grid(U.grid, a_bdry.grid, "recover_a");
    const Grid& g = U.grid;
    for (double v : U.values)
        if (!std::isfinite(v)) throw ParameterError("recover_a: U has non-finite values");
    for (double v : a_bdry.values)
        if (!(v > 0.0)) throw ParameterError("recover_a: boundary values of a must be positive");

    const RatioOperators ops(U);
    const std::size_t N = ops.nodes();
    const double cell = std::pow(g.h(), g.dim());

    std::vector<double> edge(ops.edges());
    ops.apply_G(U.values, edge);
    const double grad_energy = cell * sum_squares(edge);
    if (!(grad_energy > 0.0)) throw DegeneracyError("recover_a: U is constant, the ratio equation carries no information");
    const double alpha = cfg.reg_alpha * grad_energy;

    std::vector<std::size_t> unknowns;
    std::vector<long> slot(N, -1);
    for (std::size_t p = 0; p < N; ++p)
        if (!g.is_boundary(p)) {
            slot[p] = static_cast<long>(unknowns.size());
            unknowns.push_back(p);
        }

    std::vector<double> full(N), rows(N), tmp(N), tmp2(N);
    // y = (L^T L + alpha G^T G) a for a nodal vector a.
    auto normal_full = [&](std::span<const double> a, std::span<double> y) {
        ops.apply_L(a, rows);
        ops.apply_LT(rows, y);
        if (alpha > 0.0) {
            ops.apply_G(a, edge);
            ops.apply_GT(edge, tmp2);
            for (std::size_t p = 0; p < N; ++p) y[p] += alpha * tmp2[p];
        }
    };
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        std::fill(full.begin(), full.end(), 0.0);
        for (std::size_t k = 0; k < unknowns.size(); ++k) full[unknowns[k]] = x[k];
        normal_full(full, tmp);
        for (std::size_t k = 0; k < unknowns.size(); ++k) y[k] = tmp[unknowns[k]];
    };

    std::vector<double> lifted(N, 0.0);
    const auto bnodes = g.boundary_nodes();
    for (std::size_t m = 0; m < bnodes.size(); ++m) lifted[bnodes[m]] = a_bdry[m];
    std::vector<double> rhs(unknowns.size());
    normal_full(lifted, tmp);
    for (std::size_t k = 0; k < unknowns.size(); ++k) rhs[k] = -tmp[unknowns[k]];

    const auto diag_LL = ops.normal_diagonal();
    std::vector<double> inv_diag(unknowns.size());
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
        const double d = diag_LL[unknowns[k]] + alpha * ops.gradient_diagonal(unknowns[k]);
        inv_diag[k] = d > 0.0 ? 1.0 / d : 1.0;
    }

    std::vector<double> x(unknowns.size(), 0.0);
    RecoverAResult result;
    result.stats =
        linalg::conjugate_gradient(apply, rhs, x, inv_diag, cfg.solver.rel_tol, cfg.solver.iteration_limit(g));
    if (!result.stats.converged)
        throw SolverError("recover_a: normal equations did not converge (relative residual " +
                              std::to_string(result.stats.final_residual) + ")",
                          result.stats.final_residual, result.stats.iterations);

    result.a = ScalarField(g, lifted);
    for (std::size_t k = 0; k < unknowns.size(); ++k) result.a[unknowns[k]] = x[k];
    for (double v : result.a.values)
        if (!(v > 0.0)) ++result.negative_nodes;

    ops.apply_L(result.a.values, rows);
    ops.apply_G(result.a.values, edge);
    result.effective_alpha = alpha;
    result.data_term = cell * sum_squares(rows);
    result.regularization_term = alpha * cell * sum_squares(edge);
    result.objective = result.data_term + result.regularization_term;
    return result;
}

ScalarField recover_a(const ScalarField& U, const BoundaryTrace& a_bdry, const ReconstructionConfig& cfg) {
    return recover_a_detailed(U, a_bdry, cfg).a;
}

ScalarField recover_u1(const ScalarField& a_hat, const ScalarField& H1, const BoundaryTrace& g1,
                       const SolverConfig& cfg, SolverStats* stats) {
    require_same_grid(a_hat.grid, H1.grid, "recover_u1");
    require_same_grid(a_hat.grid, g1.grid, "recover_u1");
    for (std::size_t m = 0; m < g1.size(); ++m)
        if (!(g1[m] > 0.0)) throw ParameterError("recover_u1: g1 must be positive");
    BoundaryTrace w_boundary(g1.grid);
    for (std::size_t m = 0; m < g1.size(); ++m) w_boundary[m] = 1.0 / g1[m];

    // assemble() rejects a nonpositive a_hat with a CoefficientError.
    auto problem = make_problem(a_hat, ScalarField(a_hat.grid), H1, std::move(w_boundary));
    auto solved = solve_detailed(problem, cfg);
    if (!solved.stats.converged)
        throw SolverError("recover_u1: solver did not converge", solved.stats.final_residual, solved.stats.iterations);
    if (stats) *stats = solved.stats;

    ScalarField u1(a_hat.grid);
    for (std::size_t p = 0; p < u1.size(); ++p) {
        const double w = solved.u[p];
        if (!(w > 0.0))
            throw DegeneracyError("recover_u1: 1/u1 = " + std::to_string(w) + " is nonpositive at node " +
                                      std::to_string(p) + " (reconstruction inconsistent)",
                                  static_cast<long>(p));
        u1[p] = 1.0 / w;
    }
    return u1;
}

ScalarField recover_sigma(const ScalarField& H1, const ScalarField& u1_hat, double floor) {
    require_same_grid(H1.grid, u1_hat.grid, "recover_sigma");
    ScalarField sigma(H1.grid);
    for (std::size_t p = 0; p < sigma.size(); ++p) {
        if (!(u1_hat[p] >= floor))
            throw DegeneracyError("recover_sigma: u1 below floor at node " + std::to_string(p), static_cast<long>(p));
        sigma[p] = H1[p] / u1_hat[p];
    }
    return sigma;
}

ScalarField recover_D(const ScalarField& a_hat, const ScalarField& u1_hat, double floor) {
    require_same_grid(a_hat.grid, u1_hat.grid, "recover_D");
    ScalarField D(a_hat.grid);
    for (std::size_t p = 0; p < D.size(); ++p) {
        if (!(u1_hat[p] >= floor))
            throw DegeneracyError("recover_D: u1 below floor at node " + std::to_string(p), static_cast<long>(p));
        D[p] = a_hat[p] / (u1_hat[p] * u1_hat[p]);
    }
    return D;
}

ReconstructionResult reconstruct(const MeasurementSet& m, const IlluminationPair& illum,
                                 const BoundaryTrace& D_boundary, const ReconstructionConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    run_stage("config", [&] {
        cfg.validate();
        require_same_grid(m.H1.grid, illum.grid(), "reconstruct");
        require_same_grid(m.H1.grid, D_boundary.grid, "reconstruct");
        return 0;
    });

    ReconstructionResult out;
    auto& diag = out.diagnostics;
    out.U = run_stage("ratio_field", [&] { return ratio_field(m.H1, m.H2, cfg.floor); });
    const BoundaryTrace a_bdry = run_stage("boundary_a", [&] { return boundary_a(D_boundary, illum.g1); });

    {
        const ScalarField grad_U = gradient_magnitude(out.U);
        diag.min_grad_U = std::numeric_limits<double>::infinity();
        long below = 0;
        for (double v : grad_U.values) {
            diag.min_grad_U = std::min(diag.min_grad_U, v);
            if (v < cfg.grad_floor) ++below;
        }
        diag.fraction_below_grad_floor = static_cast<double>(below) / static_cast<double>(grad_U.size());
    }

    const RecoverAResult a_res = run_stage("recover_a", [&] { return recover_a_detailed(out.U, a_bdry, cfg); });
    out.a_hat = a_res.a;
    diag.objective = a_res.objective;
    diag.data_term = a_res.data_term;
    diag.regularization_term = a_res.regularization_term;
    diag.negative_a_nodes = a_res.negative_nodes;
    diag.recover_a_stats = a_res.stats;
    if (a_res.negative_nodes == 0) {
        BoundaryTrace U_boundary = restrict_to_boundary(out.U);
        auto problem = make_problem(out.a_hat, ScalarField(out.U.grid), ScalarField(out.U.grid), std::move(U_boundary));
        diag.ratio_pde_residual = residual(problem, out.U, FluxAverage::arithmetic);
    } else {
        diag.ratio_pde_residual = std::numeric_limits<double>::quiet_NaN();
    }

    out.u1_hat = run_stage("recover_u1",
                           [&] { return recover_u1(out.a_hat, m.H1, illum.g1, cfg.solver, &diag.recover_u1_stats); });
    out.sigma_hat = run_stage("recover_sigma", [&] { return recover_sigma(m.H1, out.u1_hat, cfg.floor); });
    out.D_hat = run_stage("recover_D", [&] { return recover_D(out.a_hat, out.u1_hat, cfg.floor); });
    diag.seconds_total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace qpat
