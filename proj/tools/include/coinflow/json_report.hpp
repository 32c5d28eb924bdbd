#pragma once

#include <nlohmann/json.hpp>

#include "coinflow/asymptotics.hpp"
#include "coinflow/oracle.hpp"
#include "coinflow/simulation.hpp"

namespace coinflow {

nlohmann::json to_json(const ModelParams& p, std::size_t agents);
nlohmann::json to_json(const BigCount& n);
nlohmann::json to_json(const InstanceReport& r);
nlohmann::json to_json(const GridReport& r, const std::vector<CountCheck>& counts);
nlohmann::json to_json(const InteractionTally& t);
nlohmann::json to_json(const LaplaceParams& p);
// Parameters, mode and the mass column (exact rationals as "p/q" strings).
nlohmann::json to_json(const ExactPMF& pmf);

// Drift, symmetry and bank summaries of a run plus the two TV distances
// (null when not computed).
nlohmann::json diagnostics_json(const SimulationReport& r, std::optional<double> tv_to_exact,
                                std::optional<double> tv_to_asymptotic);

}  // namespace coinflow
