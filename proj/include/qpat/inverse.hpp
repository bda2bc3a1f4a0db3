#pragma once

#include <optional>
#include <string>

#include "qpat/cg.hpp"
#include "qpat/elliptic.hpp"
#include "qpat/forward.hpp"

namespace qpat {

struct ReconstructionConfig {
    double reg_alpha = 1e-6;   // Tikhonov weight on grad a, relative to the mean |grad U|^2
    double grad_floor = 1e-3;  // |grad U| threshold reported in the diagnostics
    double floor = 1e-8;       // positivity floor for H1 and u1_hat
    SolverConfig solver{};

    void validate() const;
};

/// U = H2 / H1 together with the boundary data the effective-coefficient equation needs.
struct RatioSystem {
    ScalarField U;
    BoundaryTrace a_boundary;        // D|boundary * g1^2
    BoundaryTrace g_ratio_boundary;  // g2 / g1
};

struct RecoverAResult {
    ScalarField a;
    double objective = 0.0;      // data misfit + regularization at the minimizer
    double data_term = 0.0;
    double regularization_term = 0.0;
    double effective_alpha = 0.0;
    long negative_nodes = 0;     // nodes with a <= 0, reported rather than clamped
    SolverStats stats;
};

struct ReconstructionDiagnostics {
    double min_grad_U = 0.0;
    double fraction_below_grad_floor = 0.0;
    double ratio_pde_residual = 0.0;
    double objective = 0.0;
    double data_term = 0.0;
    double regularization_term = 0.0;
    long negative_a_nodes = 0;
    SolverStats recover_a_stats;
    SolverStats recover_u1_stats;
    double seconds_total = 0.0;
};

struct ReconstructionResult {
    ScalarField a_hat;
    ScalarField u1_hat;
    ScalarField D_hat;
    ScalarField sigma_hat;
    ScalarField U;
    ReconstructionDiagnostics diagnostics;
};

/// Nodewise H2 / H1; DegeneracyError naming the node if H1 < floor anywhere.
ScalarField ratio_field(const ScalarField& H1, const ScalarField& H2, double floor);

/// Nodewise D * g1^2.
BoundaryTrace boundary_a(const BoundaryTrace& D_boundary, const BoundaryTrace& g1);

/**
 * Recovers the effective coefficient a from U by minimizing
 *   || div_h(a grad_h U) ||^2 + alpha_eff || grad_h a ||^2,  a = a_bdry on the boundary,
 * with arithmetic face averages of a so the misfit is linear in a. The weight
 * alpha_eff = reg_alpha * mean |grad_h U|^2 makes the minimizer invariant
 * under U -> c U. The normal equations are solved with Jacobi-preconditioned CG.
 */
RecoverAResult recover_a_detailed(const ScalarField& U, const BoundaryTrace& a_bdry, const ReconstructionConfig& cfg);
ScalarField recover_a(const ScalarField& U, const BoundaryTrace& a_bdry, const ReconstructionConfig& cfg);

/// Solves -div(a grad w) = H1, w = 1/g1 on the boundary, and returns u1 = 1/w.
ScalarField recover_u1(const ScalarField& a_hat, const ScalarField& H1, const BoundaryTrace& g1,
                       const SolverConfig& cfg, SolverStats* stats = nullptr);

ScalarField recover_sigma(const ScalarField& H1, const ScalarField& u1_hat, double floor);
ScalarField recover_D(const ScalarField& a_hat, const ScalarField& u1_hat, double floor);

/**
 * ratio_field -> boundary_a -> recover_a -> recover_u1 -> recover_sigma -> recover_D.
 * Errors keep their type and carry the failing stage name.
 */
ReconstructionResult reconstruct(const MeasurementSet& m, const IlluminationPair& illum,
                                 const BoundaryTrace& D_boundary, const ReconstructionConfig& cfg = {});

}  // namespace qpat
