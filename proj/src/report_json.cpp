#include "qpat/report_json.hpp"

#include <cmath>

#include "qpat/errors.hpp"

namespace qpat {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void to_json(json& j, const SolverStats& s) {
    j = json{{"iterations", s.iterations}, {"final_residual", number(s.final_residual)}, {"converged", s.converged}};
}

void to_json(json& j, const SolverConfig& c) {
    j = json{{"rel_tol", c.rel_tol},
             {"max_iter", c.max_iter},
             {"flux_average", c.flux_average == FluxAverage::harmonic ? "harmonic" : "arithmetic"},
             {"jacobi", c.jacobi}};
}

void to_json(json& j, const ReconstructionConfig& c) {
    j = json{{"reg_alpha", c.reg_alpha}, {"grad_floor", c.grad_floor}, {"floor", c.floor}, {"solver", c.solver}};
}

void to_json(json& j, const UnimodalityReport& r) {
    json profile = json::array();
    for (const auto& e : r.omega_profile)
        profile.push_back({{"delta", e.delta}, {"min_tangential_gradient", number(e.min_tangential)}, {"required", e.required}});
    j = json{{"m", r.m},
             {"M", r.M},
             {"level_tol", r.level_tol},
             {"gamma_m_size", r.gamma_m.size()},
             {"gamma_M_size", r.gamma_M.size()},
             {"components_m", r.components_m},
             {"components_M", r.components_M},
             {"omega_profile", profile},
             {"degenerate", r.degenerate},
             {"pass", r.pass}};
}

void to_json(json& j, const VanishingRateReport& r) {
    json x0 = json::array({r.x0[0], r.x0[1], r.x0[2]});
    json ints = json::array();
    for (double v : r.integrals) ints.push_back(number(v));
    j = json{{"x0", x0},
             {"radii", r.radii},
             {"integrals", ints},
             {"fit_defined", r.fit_defined},
             {"K1", number(r.K1)},
             {"K2", number(r.K2)},
             {"fit_residual", number(r.fit_residual)}};
}

void to_json(json& j, const CollarReport& r) { j = json{{"rho", r.rho}, {"min_grad", number(r.min_grad)}}; }

void to_json(json& j, const WeightedDiscrepancy& r) {
    j = json{{"lhs", r.lhs}, {"data_gap", r.data_gap}, {"rhs_shape", r.rhs_shape}};
}

void to_json(json& j, const StabilityReport& r) {
    j = json{{"eps", r.eps}, {"eps_prime", r.eps_prime}, {"err_D", r.err_D}, {"err_sigma", r.err_sigma}};
}

void to_json(json& j, const HolderFit& f) {
    j = json{{"theta", number(f.theta)},
             {"C", number(f.C)},
             {"r_squared", number(f.r_squared)},
             {"theta_ci95", json::array({number(f.theta_ci_low), number(f.theta_ci_high)})},
             {"points", f.points}};
}

void to_json(json& j, const ReconstructionDiagnostics& d) {
    j = json{{"min_grad_U", number(d.min_grad_U)},
             {"fraction_below_grad_floor", d.fraction_below_grad_floor},
             {"ratio_pde_residual", number(d.ratio_pde_residual)},
             {"objective", number(d.objective)},
             {"data_term", number(d.data_term)},
             {"regularization_term", number(d.regularization_term)},
             {"negative_a_nodes", d.negative_a_nodes},
             {"recover_a_solver", d.recover_a_stats},
             {"recover_u1_solver", d.recover_u1_stats}};
}

json bounds_json(const CoefficientSet& c) {
    return json{{"lambda0", number(c.lambda0)}, {"lambda1", number(c.lambda1)}, {"E0", number(c.E0)}, {"E1", number(c.E1)}};
}

json illumination_summary(const IlluminationPair& p) {
    return json{{"gbar", number(p.gbar)},
                {"frequency_function", number(p.freq)},
                {"g_minus_gbar_l2", number(std::isfinite(p.mu2) && p.mu2 > 0 ? 1.0 / p.mu2 : 0.0)},
                {"mu0", number(p.mu0)},
                {"mu1", number(p.mu1)},
                {"mu2", number(p.mu2)},
                {"unimodality", p.unimodality},
                {"compliant", p.compliant},
                {"violations", p.violations}};
}

namespace {

json point_json(const Point& p, int dim) {
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(p[i]);
    return a;
}

Point point_from_json(const json& j) {
    Point p{0.5, 0.5, 0.5};
    if (!j.is_array() || j.size() < 2 || j.size() > 3) throw InputError("points must be arrays of 2 or 3 numbers");
    for (std::size_t i = 0; i < j.size(); ++i) p[i] = j[i].get<double>();
    return p;
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

json phantom_params_json(const PhantomParams& p, int dim) {
    json j{{"kind", to_string(p.kind)},
           {"D_background", p.D_background},
           {"sigma_background", p.sigma_background},
           {"D_amplitude", p.D_amplitude},
           {"sigma_amplitude", p.sigma_amplitude},
           {"center", point_json(p.center, dim)},
           {"radius", p.radius},
           {"width", p.width}};
    if (p.sigma_center) j["sigma_center"] = point_json(*p.sigma_center, dim);
    json declared = json::object();
    if (p.lambda0) declared["lambda0"] = *p.lambda0;
    if (p.lambda1) declared["lambda1"] = *p.lambda1;
    if (p.E0) declared["E0"] = *p.E0;
    if (p.E1) declared["E1"] = *p.E1;
    if (!declared.empty()) j["bounds"] = declared;
    return j;
}

json illumination_params_json(const IlluminationParams& p, int dim) {
    json j{{"kind", to_string(p.kind)},
           {"g1_level", p.g1_level},
           {"g1_tilt", p.g1_tilt},
           {"base", p.base},
           {"amplitude", p.amplitude},
           {"phase", p.phase},
           {"slope", point_json(p.slope, dim)}};
    json declared = json::object();
    if (p.mu0) declared["mu0"] = *p.mu0;
    if (p.mu1) declared["mu1"] = *p.mu1;
    if (p.mu2) declared["mu2"] = *p.mu2;
    if (!declared.empty()) j["bounds"] = declared;
    return j;
}

PhantomParams phantom_params_from_json(const json& j) {
    try {
        PhantomParams p;
        p.kind = phantom_kind_from_string(j.value("kind", "constant"));
        p.D_background = j.value("D_background", p.D_background);
        p.sigma_background = j.value("sigma_background", p.sigma_background);
        p.D_amplitude = j.value("D_amplitude", p.D_amplitude);
        p.sigma_amplitude = j.value("sigma_amplitude", p.sigma_amplitude);
        if (j.contains("center")) p.center = point_from_json(j["center"]);
        if (j.contains("sigma_center")) p.sigma_center = point_from_json(j["sigma_center"]);
        p.radius = j.value("radius", p.radius);
        p.width = j.value("width", p.width);
        if (j.contains("bounds")) {
            const auto& b = j["bounds"];
            read_opt(b, "lambda0", p.lambda0);
            read_opt(b, "lambda1", p.lambda1);
            read_opt(b, "E0", p.E0);
            read_opt(b, "E1", p.E1);
        }
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed phantom descriptor: ") + e.what());
    } catch (const ParameterError& e) {
        throw InputError(e.what());
    }
}

IlluminationParams illumination_params_from_json(const json& j) {
    try {
        IlluminationParams p;
        p.kind = illumination_kind_from_string(j.value("kind", "unimodal-cosine"));
        p.g1_level = j.value("g1_level", p.g1_level);
        p.g1_tilt = j.value("g1_tilt", p.g1_tilt);
        p.base = j.value("base", p.base);
        p.amplitude = j.value("amplitude", p.amplitude);
        p.phase = j.value("phase", p.phase);
        if (j.contains("slope")) p.slope = point_from_json(j["slope"]);
        if (j.contains("slope") && j["slope"].size() == 2) p.slope[2] = 0.0;
        if (j.contains("bounds")) {
            const auto& b = j["bounds"];
            read_opt(b, "mu0", p.mu0);
            read_opt(b, "mu1", p.mu1);
            read_opt(b, "mu2", p.mu2);
        }
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed illumination descriptor: ") + e.what());
    } catch (const ParameterError& e) {
        throw InputError(e.what());
    }
}

SolverConfig solver_config_from_json(const json& j) {
    SolverConfig c;
    try {
        c.rel_tol = j.value("rel_tol", c.rel_tol);
        c.max_iter = j.value("max_iter", c.max_iter);
        c.jacobi = j.value("jacobi", c.jacobi);
        const std::string avg = j.value("flux_average", "harmonic");
        if (avg == "harmonic")
            c.flux_average = FluxAverage::harmonic;
        else if (avg == "arithmetic")
            c.flux_average = FluxAverage::arithmetic;
        else
            throw InputError("flux_average must be 'harmonic' or 'arithmetic'");
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed solver config: ") + e.what());
    }
    return c;
}

ReconstructionConfig reconstruction_config_from_json(const json& j) {
    ReconstructionConfig c;
    try {
        c.reg_alpha = j.value("reg_alpha", c.reg_alpha);
        c.grad_floor = j.value("grad_floor", c.grad_floor);
        c.floor = j.value("floor", c.floor);
        if (j.contains("solver")) c.solver = solver_config_from_json(j["solver"]);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed reconstruction config: ") + e.what());
    }
    return c;
}

}  // namespace qpat
