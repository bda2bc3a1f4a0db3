#pragma once

#include <json.hpp>

#include "qpat/diagnostics.hpp"
#include "qpat/elliptic.hpp"
#include "qpat/forward.hpp"
#include "qpat/inverse.hpp"
#include "qpat/unimodality.hpp"

// nlohmann/json adapters for every report the toolkit produces. Non-finite
// numbers serialize as null.
namespace qpat {

void to_json(nlohmann::json& j, const SolverStats& s);
void to_json(nlohmann::json& j, const SolverConfig& c);
void to_json(nlohmann::json& j, const ReconstructionConfig& c);
void to_json(nlohmann::json& j, const UnimodalityReport& r);
void to_json(nlohmann::json& j, const VanishingRateReport& r);
void to_json(nlohmann::json& j, const CollarReport& r);
void to_json(nlohmann::json& j, const WeightedDiscrepancy& r);
void to_json(nlohmann::json& j, const StabilityReport& r);
void to_json(nlohmann::json& j, const HolderFit& f);
void to_json(nlohmann::json& j, const ReconstructionDiagnostics& d);

nlohmann::json bounds_json(const CoefficientSet& c);
nlohmann::json illumination_summary(const IlluminationPair& p);
nlohmann::json phantom_params_json(const PhantomParams& p, int dim);
nlohmann::json illumination_params_json(const IlluminationParams& p, int dim);

PhantomParams phantom_params_from_json(const nlohmann::json& j);
IlluminationParams illumination_params_from_json(const nlohmann::json& j);
SolverConfig solver_config_from_json(const nlohmann::json& j);
ReconstructionConfig reconstruction_config_from_json(const nlohmann::json& j);

/// Finite doubles as numbers, everything else as null.
nlohmann::json number(double v);

}  // namespace qpat
