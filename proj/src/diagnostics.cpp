#include "qpat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"

namespace qpat {

namespace {

ScalarField difference(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "difference");
    ScalarField d = a;
    for (std::size_t p = 0; p < d.size(); ++p) d[p] -= b[p];
    return d;
}

ScalarField squared_gradient(const ScalarField& u) {
    const VectorField grad = gradient(u);
    ScalarField out(u.grid);
    for (std::size_t p = 0; p < out.size(); ++p) {
        const double m = grad.magnitude(p);
        out[p] = m * m;
    }
    return out;
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) s += f.grid.volume_weight(p) * f[p];
    return s;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    double sxx = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    LineFit f;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        f.sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        f.ss_tot += (y[i] - my) * (y[i] - my);
    }
    f.slope = f.sxx > 0.0 ? sxy / f.sxx : 0.0;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        f.ss_res += r * r;
    }
    return f;
}

}  // namespace

double relative_l2_error(const ScalarField& estimate, const ScalarField& truth) {
    const double denom = interior_l2_norm(truth);
    const double num = interior_l2_norm(difference(estimate, truth));
    return denom > 0.0 ? num / denom : num;
}

VanishingRateReport vanishing_rate(const ScalarField& u, const Point& x0, const std::vector<double>& radii) {
    if (radii.empty()) throw ParameterError("vanishing_rate needs at least one radius");
    const double h = u.grid.h();
    for (double r : radii)
        if (r < 4.0 * h * (1.0 - 1e-12))
            throw ParameterError("vanishing_rate: radius " + std::to_string(r) + " is below the resolvable 4h");

    VanishingRateReport rep;
    rep.x0 = x0;
    rep.radii = radii;
    std::sort(rep.radii.begin(), rep.radii.end());
    const ScalarField energy = squared_gradient(u);
    for (double r : rep.radii) rep.integrals.push_back(ball_integral(energy, x0, r));

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
        if (rep.integrals[i] > 0.0) {
            lx.push_back(std::log(rep.radii[i]));
            ly.push_back(std::log(rep.integrals[i]));
        }
    if (lx.size() < 2) {
        rep.K1 = rep.K2 = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    const LineFit fit = fit_line(lx, ly);
    rep.fit_defined = true;
    rep.K1 = fit.slope;
    rep.K2 = std::exp(-fit.intercept);
    rep.fit_residual = std::sqrt(fit.ss_res / static_cast<double>(lx.size()));
    return rep;
}

double gradient_mass_ratio(const ScalarField& u, const Point& x0, double rho) {
    const ScalarField energy = squared_gradient(u);
    const double local = ball_integral(energy, x0, rho);
    const double total = integrate(energy);
    if (!(total > 0.0)) throw DegeneracyError("gradient_mass_ratio: grad u vanishes identically (0/0)");
    return std::clamp(local / total, 0.0, 1.0);
}

CollarReport collar_gradient_floor(const ScalarField& u, double rho) {
    if (!(rho > 0.0 && rho < 0.5)) throw ParameterError("collar width rho must lie in (0, 1/2)");
    const VectorField grad = gradient(u);
    CollarReport rep;
    rep.rho = rho;
    rep.min_grad = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < u.size(); ++p)
        if (u.grid.boundary_distance(p) <= rho + 1e-12) rep.min_grad = std::min(rep.min_grad, grad.magnitude(p));
    return rep;
}

WeightedDiscrepancy weighted_discrepancy(const ScalarField& a, const ScalarField& b, const ScalarField& u,
                                         const ScalarField& v, double a_bd_gap, double theta) {
    if (!(theta > 0.0 && theta < 0.5)) throw ParameterError("weighted_discrepancy: theta must lie in (0, 1/2)");
    if (!(a_bd_gap >= 0.0)) throw ParameterError("weighted_discrepancy: boundary gap must be nonnegative");
    require_same_grid(a.grid, b.grid, "weighted_discrepancy");
    require_same_grid(a.grid, u.grid, "weighted_discrepancy");
    const ScalarField energy = squared_gradient(u);
    ScalarField weighted(a.grid);
    for (std::size_t p = 0; p < weighted.size(); ++p) weighted[p] = std::abs(a[p] - b[p]) * energy[p];
    WeightedDiscrepancy out;
    out.lhs = integrate(weighted);
    out.data_gap = interior_l2_norm(difference(u, v));
    out.rhs_shape = std::pow(out.data_gap, theta) + a_bd_gap;
    return out;
}

StabilityReport stability_pair(const CoefficientSet& set1, const CoefficientSet& set2, const IlluminationPair& illum,
                               const SolverConfig& cfg) {
    require_same_grid(set1.grid(), set2.grid(), "stability_pair");
    require_same_grid(set1.grid(), illum.grid(), "stability_pair");
    const Simulation s1 = simulate(set1, illum, cfg);
    const Simulation s2 = simulate(set2, illum, cfg);

    StabilityReport rep;
    rep.eps = std::max(interior_l2_norm(difference(s1.clean.H1, s2.clean.H1)),
                       interior_l2_norm(difference(s1.clean.H2, s2.clean.H2)));
    rep.eps_prime = boundary_linf_norm(restrict_to_boundary(difference(set1.D, set2.D)));
    rep.err_D = interior_l2_norm(difference(set1.D, set2.D));
    rep.err_sigma = interior_l2_norm(difference(set1.sigma, set2.sigma));
    return rep;
}

HolderFit holder_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4)
        throw ParameterError("holder_fit needs at least 4 points, got " + std::to_string(points.size()));
    std::vector<double> lx, ly;
    for (const auto& [gap, err] : points) {
        if (!(gap > 0.0) || !(err > 0.0) || !std::isfinite(gap) || !std::isfinite(err))
            throw ParameterError("holder_fit: gaps and errors must be positive and finite");
        lx.push_back(std::log(gap));
        ly.push_back(std::log(err));
    }
    const LineFit fit = fit_line(lx, ly);
    if (!(fit.sxx > 0.0)) throw ParameterError("holder_fit: all gaps coincide, slope undefined");

    HolderFit out;
    out.points = points.size();
    out.theta = fit.slope;
    out.C = std::exp(fit.intercept);
    out.r_squared = fit.ss_tot > 0.0 ? 1.0 - fit.ss_res / fit.ss_tot : 1.0;
    const double dof = static_cast<double>(points.size()) - 2.0;
    const double se = std::sqrt(fit.ss_res / dof / fit.sxx);
    const boost::math::students_t dist(dof);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    out.theta_ci_low = out.theta - q * se;
    out.theta_ci_high = out.theta + q * se;
    return out;
}

namespace {

SweepPoint run_sweep_point(const CoefficientSet& base, const IlluminationPair& illum, const SweepConfig& sweep,
                           const SolverConfig& cfg, double amplitude, std::uint64_t seed) {
    SweepPoint pt;
    pt.amplitude = amplitude;
    pt.seed = seed;
    const Grid& g = base.grid();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> shift(-sweep.jitter, sweep.jitter);
    pt.center = sweep.bump_center;
    for (int a = 0; a < g.dim(); ++a) pt.center[a] += shift(rng);

    try {
        ScalarField D2 = base.D;
        for (std::size_t p = 0; p < D2.size(); ++p)
            D2[p] += amplitude * bump_profile(g.position(p), pt.center, sweep.bump_radius, g.dim());
        const CoefficientSet set2 = make_coefficient_set(std::move(D2), base.sigma);
        check_bounds(set2, std::nullopt, std::nullopt, std::nullopt, std::nullopt);
        pt.report = stability_pair(base, set2, illum, cfg);
        if (sweep.reconstruct) {
            const Simulation sim = simulate(set2, illum, cfg);
            const auto rec = reconstruct(sim.clean, illum, restrict_to_boundary(set2.D), sweep.recon);
            pt.recon_err_D = relative_l2_error(rec.D_hat, set2.D);
            pt.recon_err_sigma = relative_l2_error(rec.sigma_hat, set2.sigma);
        }
    } catch (const Error& e) {
        pt.failure = std::string(to_string(e.kind())) + (e.stage().empty() ? "" : " [" + e.stage() + "]") + ": " + e.what();
    }
    return pt;
}

}  // namespace

SweepResult run_stability_sweep(const CoefficientSet& base, const IlluminationPair& illum, const SweepConfig& sweep,
                                const SolverConfig& cfg) {
    if (sweep.amplitudes.empty() || sweep.seeds.empty()) throw InputError("sweep needs amplitudes and seeds");
    if (!(sweep.bump_radius > 0.0)) throw ParameterError("sweep bump radius must be positive");

    struct Task {
        double amplitude;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (double t : sweep.amplitudes)
        for (std::uint64_t s : sweep.seeds) tasks.push_back({t, s});

    SweepResult out;
    out.points.resize(tasks.size());
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, sweep.jobs));
    for (std::size_t begin = 0; begin < tasks.size(); begin += jobs) {
        const std::size_t end = std::min(tasks.size(), begin + jobs);
        std::vector<std::future<SweepPoint>> running;
        for (std::size_t i = begin; i < end; ++i)
            running.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_sweep_point,
                                         std::cref(base), std::cref(illum), std::cref(sweep), std::cref(cfg),
                                         tasks[i].amplitude, tasks[i].seed));
        for (std::size_t i = begin; i < end; ++i) out.points[i] = running[i - begin].get();
    }

    std::vector<std::pair<double, double>> fit_points;
    for (const auto& pt : out.points) {
        if (!pt.failure.empty()) {
            out.failures.push_back("t=" + std::to_string(pt.amplitude) + " seed=" + std::to_string(pt.seed) + ": " +
                                   pt.failure);
            continue;
        }
        fit_points.emplace_back(pt.report.gap(), pt.report.err());
    }
    try {
        out.fit = holder_fit(fit_points);
    } catch (const ParameterError& e) {
        out.fit_error = e.what();
    }
    return out;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<SweepMedian> sweep_medians(const SweepResult& result) {
    std::vector<double> amps;
    for (const auto& pt : result.points)
        if (pt.failure.empty()) amps.push_back(pt.amplitude);
    std::sort(amps.begin(), amps.end());
    amps.erase(std::unique(amps.begin(), amps.end()), amps.end());

    std::vector<SweepMedian> out;
    for (double t : amps) {
        std::vector<double> gaps, errs, recon;
        for (const auto& pt : result.points) {
            if (!pt.failure.empty() || pt.amplitude != t) continue;
            gaps.push_back(pt.report.gap());
            errs.push_back(pt.report.err());
            if (pt.recon_err_D && pt.recon_err_sigma) recon.push_back(*pt.recon_err_D + *pt.recon_err_sigma);
        }
        SweepMedian m;
        m.amplitude = t;
        m.count = gaps.size();
        m.gap = median(gaps);
        m.err = median(errs);
        m.recon_err = recon.size() == gaps.size() ? median(recon) : std::numeric_limits<double>::quiet_NaN();
        out.push_back(m);
    }
    return out;
}

bool medians_monotone(const std::vector<SweepMedian>& medians) {
    auto sorted = medians;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.gap < b.gap; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].err < sorted[i - 1].err) return false;
    }
    return true;
}

}  // namespace qpat
