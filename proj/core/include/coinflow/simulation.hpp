#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coinflow/graph.hpp"
#include "coinflow/model.hpp"
#include "coinflow/stats.hpp"

namespace coinflow {

struct Collectors {
  bool histogram = true;
  bool bank_trace = true;
  bool interactions = true;
  bool drift = true;
};

struct SimulationConfig {
  std::uint64_t seed = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t samples = 0;
  std::uint64_t thinning = 1;
  Collectors collectors;
  InitialPolicy policy = InitialPolicy::even;
  // Overrides `policy` when set; validated against the model first.
  std::optional<MoneyState> initial;
  std::size_t drift_batches = 100;
  std::size_t trace_points = 1000;
  // Full O(N) invariant check at every sample boundary.
  bool check_invariants = true;
};

// 20 * (2 card(E)) * (T + L) steps.
std::uint64_t default_burn_in(const GraphTopology& g, const ModelParams& p);

struct SimulationReport {
  ModelParams params;
  std::size_t vertex_count = 0;
  std::string graph;
  std::uint64_t seed = 0;
  std::uint64_t replicas = 1;
  std::string rng_algorithm;
  std::uint64_t burn_in = 0;
  std::uint64_t samples = 0;
  std::uint64_t thinning = 0;
  // per replica
  std::uint64_t total_steps = 0;
  std::uint64_t transfers = 0;

  Histogram histogram;
  InteractionTally interactions;
  std::vector<DriftBatch> drift;
  BankTrace bank;
  std::vector<MoneyState> final_states;

  double wall_seconds = 0;
};

// Everything except wall-clock time.
bool same_results(const SimulationReport& a, const SimulationReport& b);

// Runs burn_in steps, then samples * thinning steps recording the pooled
// histogram after every `thinning` steps. Interaction and drift collectors
// observe every sampled step whose pre-step bank is positive. Throws
// invariant_breach when a sampled state breaks conservation, the debt
// floor or the bank identity, and run_too_long when the step count
// overflows 64 bits.
SimulationReport simulate(const GraphTopology& g, const ModelParams& p, const SimulationConfig& cfg,
                          std::uint64_t replica_index = 0);

// Replica i runs on Xoshiro256::for_replica(seed, i). Output is independent
// of `threads`.
SimulationReport simulate_replicas(const GraphTopology& g, const ModelParams& p,
                                   const SimulationConfig& cfg, std::uint64_t replicas,
                                   unsigned threads);

SimulationReport merge_reports(std::span<const SimulationReport> reports);

inline DriftEstimate drift_estimate(const SimulationReport& r) { return drift_estimate(r.drift); }
inline BankCurve bank_depletion_curve(const SimulationReport& r) { return bank_depletion_curve(r.bank); }

}  // namespace coinflow
