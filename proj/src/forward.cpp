#include "qpat/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"

namespace qpat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

double distance(const Point& x, const Point& c, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
    return std::sqrt(s);
}

void require_bound(bool ok, const std::string& inequality, const std::string& detail) {
    if (!ok) throw ParameterError("bound violated: " + inequality + " (" + detail + ")");
}

}  // namespace

double positivity_bound(const ScalarField& f) {
    double lambda = 0.0;
    for (double v : f.values) {
        if (!(v > 0.0)) return kInf;
        lambda = std::max({lambda, v, 1.0 / v});
    }
    return lambda;
}

double discrete_w1inf_norm(const ScalarField& f) {
    const Grid& g = f.grid;
    double slope = 0.0;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        const auto c = g.coords(p);
        std::size_t stride = 1;
        for (int a = 0; a < g.dim(); ++a) {
            if (c[a] + 1 < g.n()) slope = std::max(slope, std::abs(f[p + stride] - f[p]) / g.h());
            stride *= static_cast<std::size_t>(g.n());
        }
    }
    return interior_linf_norm(f) + slope;
}

CoefficientSet make_coefficient_set(ScalarField D, ScalarField sigma) {
    require_same_grid(D.grid, sigma.grid, "coefficient set");
    CoefficientSet c;
    c.lambda0 = positivity_bound(D);
    c.lambda1 = positivity_bound(sigma);
    c.E0 = discrete_w1inf_norm(D);
    c.E1 = discrete_w1inf_norm(sigma);
    c.D = std::move(D);
    c.sigma = std::move(sigma);
    return c;
}

void check_bounds(const CoefficientSet& c, std::optional<double> lambda0, std::optional<double> lambda1,
                  std::optional<double> E0, std::optional<double> E1) {
    require_bound(std::isfinite(c.lambda0), "lambda0^-1 <= D <= lambda0", "D has a nonpositive node");
    require_bound(std::isfinite(c.lambda1), "lambda1^-1 <= sigma <= lambda1", "sigma has a nonpositive node");
    if (lambda0)
        require_bound(c.lambda0 <= *lambda0 * (1 + 1e-12), "lambda0^-1 <= D <= lambda0",
                      "needs lambda0 >= " + fmt(c.lambda0) + ", declared " + fmt(*lambda0));
    if (lambda1)
        require_bound(c.lambda1 <= *lambda1 * (1 + 1e-12), "lambda1^-1 <= sigma <= lambda1",
                      "needs lambda1 >= " + fmt(c.lambda1) + ", declared " + fmt(*lambda1));
    if (E0)
        require_bound(c.E0 <= *E0 * (1 + 1e-12), "||D||_W1inf <= E0 (Lipschitz bound)",
                      "needs E0 >= " + fmt(c.E0) + ", declared " + fmt(*E0));
    if (E1)
        require_bound(c.E1 <= *E1 * (1 + 1e-12), "||sigma||_W1inf <= E1 (Lipschitz bound)",
                      "needs E1 >= " + fmt(c.E1) + ", declared " + fmt(*E1));
}

double bump_profile(const Point& x, const Point& center, double radius, int dim) {
    const double r = distance(x, center, dim);
    if (r >= radius) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * r / radius));
}

double inclusion_profile(const Point& x, const Point& center, double radius, double width, int dim) {
    const double r = distance(x, center, dim);
    const double s = std::clamp((radius + 0.5 * width - r) / width, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

CoefficientSet make_phantom(const Grid& grid, const PhantomParams& params) {
    const int dim = grid.dim();
    if (!(params.D_background > 0.0)) throw ParameterError("phantom: D_background must be positive");
    if (!(params.sigma_background > 0.0)) throw ParameterError("phantom: sigma_background must be positive");

    ScalarField D(grid, params.D_background);
    ScalarField sigma(grid, params.sigma_background);
    const Point sigma_center = params.sigma_center.value_or(params.center);

    switch (params.kind) {
        case PhantomKind::constant:
            break;
        case PhantomKind::smooth_bump:
        case PhantomKind::smoothed_inclusion: {
            if (!(params.radius > 0.0)) throw ParameterError("phantom: radius must be positive");
            if (params.D_background + std::min(0.0, params.D_amplitude) <= 0.0)
                throw ParameterError("bound violated: lambda0^-1 <= D <= lambda0 (D_amplitude drives D nonpositive)");
            if (params.sigma_background + std::min(0.0, params.sigma_amplitude) <= 0.0)
                throw ParameterError(
                    "bound violated: lambda1^-1 <= sigma <= lambda1 (sigma_amplitude drives sigma nonpositive)");
            const bool inclusion = params.kind == PhantomKind::smoothed_inclusion;
            if (inclusion && params.width < 4.0 * grid.h() * (1.0 - 1e-12))
                throw ParameterError("bound violated: ||D||_W1inf <= E0 (Lipschitz bound): inclusion width " +
                                     fmt(params.width) + " is below 4h = " + fmt(4.0 * grid.h()) +
                                     ", the slope would scale like 1/h");
            for (std::size_t p = 0; p < grid.node_count(); ++p) {
                const Point x = grid.position(p);
                const double bD = inclusion ? inclusion_profile(x, params.center, params.radius, params.width, dim)
                                            : bump_profile(x, params.center, params.radius, dim);
                const double bS = inclusion ? inclusion_profile(x, sigma_center, params.radius, params.width, dim)
                                            : bump_profile(x, sigma_center, params.radius, dim);
                D[p] += params.D_amplitude * bD;
                sigma[p] += params.sigma_amplitude * bS;
            }
            break;
        }
    }
    CoefficientSet c = make_coefficient_set(std::move(D), std::move(sigma));
    check_bounds(c, params.lambda0, params.lambda1, params.E0, params.E1);
    return c;
}

IlluminationPair analyze_illuminations(BoundaryTrace g1, BoundaryTrace g2, bool expect_unimodal) {
    require_same_grid(g1.grid, g2.grid, "illumination pair");
    IlluminationPair pair;
    const Grid grid = g1.grid;

    bool positive = true;
    pair.mu1 = 0.0;
    for (const BoundaryTrace* gi : {&g1, &g2})
        for (double v : gi->values) {
            if (!(v > 0.0)) {
                positive = false;
                pair.mu1 = kInf;
                break;
            }
            pair.mu1 = std::max({pair.mu1, v, 1.0 / v});
        }
    if (!positive) pair.violations.push_back("mu1^-1 <= g_i <= mu1: an illumination has a nonpositive node");

    pair.mu0 = 0.0;
    for (const BoundaryTrace* gi : {&g1, &g2}) {
        pair.mu0 = std::max({pair.mu0, boundary_linf_norm(*gi), boundary_linf_norm(tangential_gradient(*gi)),
                             boundary_linf_norm(tangential_second_difference(*gi))});
    }

    pair.g = BoundaryTrace(grid);
    if (positive) {
        for (std::size_t m = 0; m < pair.g.size(); ++m) pair.g[m] = g2[m] / g1[m];
        pair.gbar = boundary_mean(pair.g);
        BoundaryTrace centered = pair.g;
        for (auto& v : centered.values) v -= pair.gbar;
        const double spread = boundary_l2_norm(centered);
        pair.mu2 = spread > 0.0 ? 1.0 / spread : kInf;
        try {
            pair.freq = frequency_function(pair.g);
        } catch (const DegeneracyError&) {
            pair.freq = std::numeric_limits<double>::quiet_NaN();
            pair.violations.push_back("||g - gbar||_L2 >= mu2^-1: g = g2/g1 is constant (illuminations dependent)");
        }
        pair.unimodality = unimodality_check(pair.g, default_level_tol(pair.g));
        if (expect_unimodal && !pair.unimodality.pass)
            pair.violations.push_back("quantitative unimodality of g = g2/g1 fails (components_m = " +
                                      std::to_string(pair.unimodality.components_m) + ", components_M = " +
                                      std::to_string(pair.unimodality.components_M) +
                                      (pair.unimodality.degenerate ? ", degenerate" : "") + ")");
    } else {
        pair.mu2 = kInf;
        pair.freq = std::numeric_limits<double>::quiet_NaN();
    }
    pair.g1 = std::move(g1);
    pair.g2 = std::move(g2);
    pair.compliant = expect_unimodal && pair.violations.empty() && pair.unimodality.pass;
    return pair;
}

std::pair<BoundaryTrace, BoundaryTrace> illumination_traces(const Grid& grid, const IlluminationParams& params) {
    const int dim = grid.dim();
    const double perimeter = grid.boundary_measure();
    const auto arc = arc_lengths(grid);
    const auto nodes = grid.boundary_nodes();

    BoundaryTrace g1(grid), g2(grid);
    for (std::size_t m = 0; m < nodes.size(); ++m) {
        const Point x = grid.position(nodes[m]);
        double ratio = 0.0;
        switch (params.kind) {
            case IlluminationKind::unimodal_cosine:
                ratio = dim == 2 ? params.base + params.amplitude * std::cos(2.0 * std::numbers::pi *
                                                                            (arc[m] - params.phase) / perimeter)
                                 : params.base + params.amplitude * std::cos(std::numbers::pi * x[2]);
                break;
            case IlluminationKind::bimodal:
                ratio = dim == 2 ? params.base + params.amplitude * std::cos(4.0 * std::numbers::pi *
                                                                            (arc[m] - params.phase) / perimeter)
                                 : params.base + params.amplitude * std::cos(2.0 * std::numbers::pi * x[2]);
                break;
            case IlluminationKind::affine_ratio:
                ratio = params.base;
                for (int a = 0; a < dim; ++a) ratio += params.slope[a] * x[a];
                break;
            case IlluminationKind::saddle: {
                const double dx = x[0] - 0.5, dy = x[1] - 0.5, dz = x[2] - 0.5;
                // Symmetric about the center, which forces an interior critical point of the ratio.
                const double shape = dim == 2 ? 4.0 * (dx * dx - dy * dy) : 2.0 * (dx * dx + dy * dy - 2.0 * dz * dz);
                ratio = params.base + params.amplitude * shape;
                break;
            }
        }
        g1[m] = params.g1_level * (1.0 + params.g1_tilt * (x[0] - 0.5));
        g2[m] = g1[m] * ratio;
    }
    return {std::move(g1), std::move(g2)};
}

IlluminationPair make_illuminations(const Grid& grid, const IlluminationParams& params) {
    auto [g1, g2] = illumination_traces(grid, params);
    const bool compliant_kind =
        params.kind == IlluminationKind::unimodal_cosine || params.kind == IlluminationKind::affine_ratio;
    IlluminationPair pair = analyze_illuminations(std::move(g1), std::move(g2), compliant_kind);
    if (params.mu0 && pair.mu0 > *params.mu0 * (1 + 1e-12))
        pair.violations.push_back("||g_i||_C2 <= mu0: needs mu0 >= " + fmt(pair.mu0));
    if (params.mu1 && pair.mu1 > *params.mu1 * (1 + 1e-12))
        pair.violations.push_back("mu1^-1 <= g_i <= mu1: needs mu1 >= " + fmt(pair.mu1));
    if (params.mu2 && pair.mu2 > *params.mu2 * (1 + 1e-12))
        pair.violations.push_back("||g - gbar||_L2 >= mu2^-1: needs mu2 >= " + fmt(pair.mu2));

    if (compliant_kind) {
        pair.compliant = pair.violations.empty() && pair.unimodality.pass;
        if (!pair.compliant) {
            std::string msg = "illumination construction (" + to_string(params.kind) + ") failed:";
            for (const auto& v : pair.violations) msg += " [" + v + "]";
            throw ParameterError(msg);
        }
    } else {
        pair.compliant = false;
    }
    return pair;
}

ScalarField solve_photon_density(const CoefficientSet& c, const BoundaryTrace& g, const SolverConfig& cfg) {
    for (std::size_t m = 0; m < g.size(); ++m)
        if (!(g[m] > 0.0))
            throw ParameterError("illumination must be positive; boundary position " + std::to_string(m) + " has " +
                                 fmt(g[m]));
    return solve(make_problem(c.D, c.sigma, ScalarField(c.grid()), g), cfg);
}

ScalarField absorbed_energy(const ScalarField& sigma, const ScalarField& u) {
    require_same_grid(sigma.grid, u.grid, "absorbed_energy");
    ScalarField H(sigma.grid);
    for (std::size_t p = 0; p < H.size(); ++p) H[p] = sigma[p] * u[p];
    return H;
}

ScalarField add_noise(const ScalarField& H, double target_eps, std::uint64_t seed) {
    if (!(target_eps >= 0.0)) throw ParameterError("noise target_eps must be nonnegative");
    if (target_eps == 0.0) return H;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ScalarField eta(H.grid);
    for (auto& v : eta.values) v = normal(rng);
    const double scale = target_eps / interior_l2_norm(eta);
    ScalarField out = H;
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += scale * eta[p];
    return out;
}

Simulation simulate(const CoefficientSet& c, const IlluminationPair& illum, const SolverConfig& cfg) {
    Simulation s;
    s.u1 = solve_photon_density(c, illum.g1, cfg);
    s.u2 = solve_photon_density(c, illum.g2, cfg);
    s.clean.H1 = absorbed_energy(c.sigma, s.u1);
    s.clean.H2 = absorbed_energy(c.sigma, s.u2);
    return s;
}

MeasurementSet add_measurement_noise(const MeasurementSet& clean, double target_eps, std::uint64_t seed) {
    MeasurementSet m;
    m.seed = seed;
    m.H1 = add_noise(clean.H1, target_eps, seed);
    m.H2 = add_noise(clean.H2, target_eps, seed ^ 0x9e3779b97f4a7c15ULL);
    ScalarField d1 = m.H1, d2 = m.H2;
    for (std::size_t p = 0; p < d1.size(); ++p) {
        d1[p] -= clean.H1[p];
        d2[p] -= clean.H2[p];
    }
    m.noise_level = std::max(interior_l2_norm(d1), interior_l2_norm(d2));
    return m;
}

std::string to_string(PhantomKind k) {
    switch (k) {
        case PhantomKind::constant: return "constant";
        case PhantomKind::smooth_bump: return "smooth-bump";
        case PhantomKind::smoothed_inclusion: return "smoothed-inclusion";
    }
    return "?";
}

std::string to_string(IlluminationKind k) {
    switch (k) {
        case IlluminationKind::unimodal_cosine: return "unimodal-cosine";
        case IlluminationKind::affine_ratio: return "affine-ratio";
        case IlluminationKind::bimodal: return "bimodal";
        case IlluminationKind::saddle: return "saddle";
    }
    return "?";
}

PhantomKind phantom_kind_from_string(const std::string& s) {
    for (auto k : {PhantomKind::constant, PhantomKind::smooth_bump, PhantomKind::smoothed_inclusion})
        if (to_string(k) == s) return k;
    throw ParameterError("unknown phantom kind '" + s + "'");
}

IlluminationKind illumination_kind_from_string(const std::string& s) {
    for (auto k : {IlluminationKind::unimodal_cosine, IlluminationKind::affine_ratio, IlluminationKind::bimodal,
                   IlluminationKind::saddle})
        if (to_string(k) == s) return k;
    throw ParameterError("unknown illumination kind '" + s + "'");
}

}  // namespace qpat
