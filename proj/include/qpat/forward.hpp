#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpat/elliptic.hpp"
#include "qpat/grid.hpp"
#include "qpat/unimodality.hpp"

namespace qpat {

/**
 * Diffusion D and absorption sigma together with the a-priori bounds they
 * satisfy on the grid:
 *   lambda0^-1 <= D <= lambda0,  lambda1^-1 <= sigma <= lambda1,
 *   |D|_{W1,inf} <= E0,          |sigma|_{W1,inf} <= E1,
 * where the W^{1,inf} norm is the discrete max |value| + max |forward difference quotient|.
 */
struct CoefficientSet {
    ScalarField D;
    ScalarField sigma;
    double lambda0 = 1.0;
    double lambda1 = 1.0;
    double E0 = 1.0;
    double E1 = 1.0;

    const Grid& grid() const { return D.grid; }
};

/// Smallest lambda with lambda^-1 <= f <= lambda; infinity if f has a nonpositive node.
double positivity_bound(const ScalarField& f);
/// Discrete W^{1,inf} norm: max |f| + max over grid edges of |f_q - f_p| / h.
double discrete_w1inf_norm(const ScalarField& f);

/// Wraps (D, sigma) and records the tightest bounds they satisfy.
CoefficientSet make_coefficient_set(ScalarField D, ScalarField sigma);

/// Throws ParameterError naming the first violated inequality.
void check_bounds(const CoefficientSet& c, std::optional<double> lambda0, std::optional<double> lambda1,
                  std::optional<double> E0, std::optional<double> E1);

enum class PhantomKind { constant, smooth_bump, smoothed_inclusion };

struct PhantomParams {
    PhantomKind kind = PhantomKind::constant;
    double D_background = 1.0;
    double sigma_background = 1.0;
    double D_amplitude = 0.0;
    double sigma_amplitude = 0.0;
    Point center{0.5, 0.5, 0.5};
    std::optional<Point> sigma_center;  // defaults to center
    double radius = 0.25;
    double width = 0.1;  // inclusion transition width, must be >= 4h
    // Declared a-priori bounds; checked when present.
    std::optional<double> lambda0, lambda1, E0, E1;
};

/// Compactly supported C^1 bump, 1 at the center and 0 beyond `radius`.
double bump_profile(const Point& x, const Point& center, double radius, int dim);
/// Mollified indicator of a ball: smoothstep ramp of the given width across r = radius.
double inclusion_profile(const Point& x, const Point& center, double radius, double width, int dim);

CoefficientSet make_phantom(const Grid& grid, const PhantomParams& params);

enum class IlluminationKind { unimodal_cosine, affine_ratio, bimodal, saddle };

struct IlluminationParams {
    IlluminationKind kind = IlluminationKind::unimodal_cosine;
    double g1_level = 1.0;
    double g1_tilt = 0.0;  // g1 = g1_level * (1 + g1_tilt * (x - 1/2))
    double base = 1.5;
    double amplitude = 0.5;
    double phase = 0.0;  // 2D arc-length shift of the cosine kinds
    Point slope{0.3, 0.0, 0.0};  // affine_ratio only: g = base + slope . x
    std::optional<double> mu0, mu1, mu2;
};

/**
 * Two Dirichlet illuminations and what is derived from them: the ratio
 * g = g2 / g1, its boundary mean, the frequency function, the unimodality
 * report, and the tightest (mu0, mu1, mu2) they satisfy.
 */
struct IlluminationPair {
    BoundaryTrace g1;
    BoundaryTrace g2;
    BoundaryTrace g;
    double gbar = 0.0;
    double freq = 0.0;  // NaN when g is constant
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    UnimodalityReport unimodality;
    bool compliant = false;
    std::vector<std::string> violations;

    const Grid& grid() const { return g1.grid; }
};

/// Derives (g, gbar, F[g], bounds, unimodality) for an arbitrary pair; never throws on violations.
IlluminationPair analyze_illuminations(BoundaryTrace g1, BoundaryTrace g2, bool expect_unimodal = true);

/// Raw (g1, g2) traces of the requested kind, no checks.
std::pair<BoundaryTrace, BoundaryTrace> illumination_traces(const Grid& grid, const IlluminationParams& params);

/// Builds a pair of the requested kind. Compliant kinds throw ParameterError if any check fails;
/// bimodal and saddle pairs are returned as non-compliant.
IlluminationPair make_illuminations(const Grid& grid, const IlluminationParams& params);

ScalarField solve_photon_density(const CoefficientSet& c, const BoundaryTrace& g, const SolverConfig& cfg = {});
ScalarField absorbed_energy(const ScalarField& sigma, const ScalarField& u);

/// Returns H + eta, with eta a Gaussian field rescaled to interior L2 norm exactly target_eps.
ScalarField add_noise(const ScalarField& H, double target_eps, std::uint64_t seed);

struct MeasurementSet {
    ScalarField H1;
    ScalarField H2;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

struct Simulation {
    ScalarField u1;
    ScalarField u2;
    MeasurementSet clean;
};

Simulation simulate(const CoefficientSet& c, const IlluminationPair& illum, const SolverConfig& cfg = {});

/// Independent noise on H1 and H2 (streams derived from seed); noise_level = realized max eps.
MeasurementSet add_measurement_noise(const MeasurementSet& clean, double target_eps, std::uint64_t seed);

std::string to_string(PhantomKind k);
std::string to_string(IlluminationKind k);
PhantomKind phantom_kind_from_string(const std::string& s);
IlluminationKind illumination_kind_from_string(const std::string& s);

}  // namespace qpat
