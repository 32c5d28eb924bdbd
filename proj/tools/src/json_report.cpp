#include "coinflow/json_report.hpp"

#include <limits>

#include "coinflow/error.hpp"

namespace coinflow {

using nlohmann::json;

namespace {

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const ModelParams& p, std::size_t agents) {
  return {{"model", std::string(to_string(p.kind))}, {"agents", agents}, {"money", p.money}, {"limit", p.limit}};
}

json to_json(const BigCount& n) {
  if (n >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 63) return n.get_ui();
  return n.get_str();
}

json to_json(const InstanceReport& r) {
  return {
      {"params", to_json(r.params, r.agents)},
      {"graph", r.graph},
      {"state_count", r.state_count},
      {"lambda_value", to_json(r.lambda_value)},
      {"count_match", r.count_match},
      {"stochastic", r.stochastic},
      {"closed", r.closed},
      {"symmetric", r.symmetric},
      {"irreducible", r.irreducible},
      {"aperiodic", r.aperiodic},
      {"uniform", r.uniform},
      {"marginal_match", r.marginal_match},
      {"degree_independent", r.degree_independent},
      {"passed", r.passed()},
      {"failure", r.failure.empty() ? json(nullptr) : json(r.failure)},
  };
}

json to_json(const GridReport& r, const std::vector<CountCheck>& counts) {
  json instances = json::array();
  for (const auto& i : r.instances) instances.push_back(to_json(i));
  json count_rows = json::array();
  std::size_t count_failures = 0;
  for (const auto& c : counts) {
    if (!c.match()) ++count_failures;
    count_rows.push_back({{"params", to_json(ModelParams{c.kind, c.money, c.limit}, c.agents)},
                          {"enumerated", c.enumerated},
                          {"formula", to_json(c.formula)},
                          {"match", c.match()}});
  }
  const bool ok = r.all_passed() && count_failures == 0;
  return {
      {"summary",
       {{"instances", r.instances.size()},
        {"passed", r.passed},
        {"failed", r.failed},
        {"count_checks", counts.size()},
        {"count_failures", count_failures},
        {"all_passed", ok}}},
      {"counts", count_rows},
      {"instances", instances},
  };
}

json to_json(const InteractionTally& t) {
  json out = json::object();
  for (std::size_t i = 0; i < InteractionType::kCount; ++i) out[InteractionType::from_index(i).label()] = t.counts[i];
  return out;
}

json to_json(const LaplaceParams& p) { return {{"K", p.K}, {"a", p.a}, {"b", p.b}, {"T", p.T}, {"rho", p.rho}}; }

json to_json(const ExactPMF& pmf) {
  json out = to_json(ModelParams{pmf.kind, pmf.money, pmf.limit}, pmf.agents);
  out["mode"] = std::string(to_string(pmf.mode));
  out["support_lo"] = pmf.window.lo;
  out["support_hi"] = pmf.window.hi;
  json mass = json::array();
  for (Balance c = pmf.window.lo; c <= pmf.window.hi; ++c) {
    if (pmf.mode == PmfMode::exact) mass.push_back(pmf.exact(c).get_str());
    else mass.push_back(pmf.log_prob(c));
  }
  out[pmf.mode == PmfMode::exact ? "prob" : "log_prob"] = mass;
  return out;
}

json diagnostics_json(const SimulationReport& r, std::optional<double> tv_to_exact,
                      std::optional<double> tv_to_asymptotic) {
  json d = {
      {"model", std::string(to_string(r.params.kind))},
      {"total_steps", r.total_steps},
      {"replicas", r.replicas},
      {"transfers", r.transfers},
      {"histogram_total", r.histogram.total()},
      {"drift", nullptr},
      {"ci", nullptr},
      {"zero_prob", nullptr},
      {"zero_prob_ci", nullptr},
      {"conditioned_steps", nullptr},
      {"symmetry_stat", nullptr},
      {"bank_curve_summary", nullptr},
      {"tv_to_exact", optional_number(tv_to_exact)},
      {"tv_to_asymptotic", optional_number(tv_to_asymptotic)},
  };
  if (r.params.kind != ModelKind::collective) return d;

  try {
    const DriftEstimate est = drift_estimate(r);
    d["drift"] = est.mean_increment;
    d["ci"] = est.ci_halfwidth;
    d["zero_prob"] = est.zero_prob;
    d["zero_prob_ci"] = est.zero_prob_ci;
    d["conditioned_steps"] = est.sample_count;
    d["drift_batches"] = est.batches;
    d["drift_negative"] = est.negative_with_confidence();
    d["drift_matches_zero_prob"] = est.matches_zero_prob();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_data) throw;
    d["drift_note"] = e.what();
  }
  if (r.interactions.total > 0) {
    const SymmetryReport sym = interaction_symmetry(r.interactions);
    d["symmetry_stat"] = sym.statistic;
    d["symmetry_max_z"] = sym.max_z;
    d["symmetry_worst_pair"] = sym.worst_pair.label();
    d["symmetry_significant"] = sym.significant;
  }
  d["interaction_counts"] = to_json(r.interactions);
  const BankCurve curve = bank_depletion_curve(r);
  d["bank_curve_summary"] = {{"initial_stock", r.bank.initial_stock},
                             {"late_average", curve.late_average},
                             {"final_fraction", curve.series.empty() ? 0.0 : curve.series.back().second},
                             {"points", curve.series.size()}};
  return d;
}

}  // namespace coinflow
