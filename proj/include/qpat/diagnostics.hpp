#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpat/forward.hpp"
#include "qpat/inverse.hpp"
#include "qpat/unimodality.hpp"

namespace qpat {

/// Integrals of |grad u|^2 over concentric balls and the fit log I = K1 log r - log K2.
struct VanishingRateReport {
    Point x0{};
    std::vector<double> radii;
    std::vector<double> integrals;
    bool fit_defined = false;  // false when every integral vanishes
    double K1 = 0.0;
    double K2 = 0.0;
    double fit_residual = 0.0;  // RMS of the log residuals
};

VanishingRateReport vanishing_rate(const ScalarField& u, const Point& x0, const std::vector<double>& radii);

/// Share of the total gradient energy inside B_rho(x0); DegeneracyError if grad u vanishes.
double gradient_mass_ratio(const ScalarField& u, const Point& x0, double rho);

struct CollarReport {
    double rho = 0.0;
    double min_grad = 0.0;
};

/// min |grad u| over the nodes within distance rho of the boundary.
CollarReport collar_gradient_floor(const ScalarField& u, double rho);

struct WeightedDiscrepancy {
    double lhs = 0.0;        // integral of |a - b| |grad u|^2
    double data_gap = 0.0;   // ||u - v||_L2
    double rhs_shape = 0.0;  // data_gap^theta + a_bd_gap
};

WeightedDiscrepancy weighted_discrepancy(const ScalarField& a, const ScalarField& b, const ScalarField& u,
                                         const ScalarField& v, double a_bd_gap, double theta);

struct StabilityReport {
    double eps = 0.0;        // max_i ||H_i^(1) - H_i^(2)||_L2
    double eps_prime = 0.0;  // ||D^(1) - D^(2)||_Linf(boundary)
    double err_D = 0.0;
    double err_sigma = 0.0;
    double gap() const { return eps + eps_prime; }
    double err() const { return err_D + err_sigma; }
};

/// Solves the four photon densities and measures data and coefficient discrepancies.
StabilityReport stability_pair(const CoefficientSet& set1, const CoefficientSet& set2, const IlluminationPair& illum,
                               const SolverConfig& cfg = {});

struct HolderFit {
    double theta = 0.0;
    double C = 0.0;
    double r_squared = 0.0;
    double theta_ci_low = 0.0;   // 95% interval for the slope
    double theta_ci_high = 0.0;
    std::size_t points = 0;
};

/// Least squares of log err = theta log gap + log C; needs >= 4 strictly positive points.
HolderFit holder_fit(const std::vector<std::pair<double, double>>& points);

struct SweepConfig {
    std::vector<double> amplitudes;
    std::vector<std::uint64_t> seeds;
    Point bump_center{0.5, 0.5, 0.5};
    double bump_radius = 0.2;
    double jitter = 0.05;        // seed-dependent shift of the bump center, per axis
    bool reconstruct = false;    // also reconstruct the perturbed set from its clean data
    ReconstructionConfig recon{};
    int jobs = 1;
};

struct SweepPoint {
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    Point center{};
    StabilityReport report;
    std::optional<double> recon_err_D;
    std::optional<double> recon_err_sigma;
    std::string failure;  // empty on success
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<HolderFit> fit;
    std::string fit_error;
    std::vector<std::string> failures;
};

/// Perturbs D by amplitude * bump (center jittered per seed) and runs stability_pair per point.
/// Per-point failures are recorded and the sweep continues.
SweepResult run_stability_sweep(const CoefficientSet& base, const IlluminationPair& illum, const SweepConfig& sweep,
                                const SolverConfig& cfg = {});

/// Per-amplitude medians over seeds of the successful points, sorted by amplitude.
struct SweepMedian {
    double amplitude = 0.0;
    double gap = 0.0;
    double err = 0.0;
    double recon_err = 0.0;  // NaN unless reconstructions ran
    std::size_t count = 0;
};

std::vector<SweepMedian> sweep_medians(const SweepResult& result);
/// True when the coefficient error err is nondecreasing once medians are ordered by gap.
bool medians_monotone(const std::vector<SweepMedian>& medians);

/// Relative interior L2 error ||estimate - truth|| / ||truth||.
double relative_l2_error(const ScalarField& estimate, const ScalarField& truth);

}  // namespace qpat
