#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coinflow/exact.hpp"
#include "coinflow/graph.hpp"
#include "coinflow/model.hpp"

namespace coinflow {

inline constexpr std::size_t kEnumerationCap = 200000;

// Every admissible configuration in lexicographic order of the balance
// vector. Collective states omit the bank, which is L_c minus the debt.
struct StateSpace {
  ModelKind kind = ModelKind::individual;
  std::size_t agents = 0;
  Balance money = 0;
  Balance limit = 0;
  std::vector<std::vector<Balance>> states;
  std::map<std::vector<Balance>, std::size_t> index;

  std::size_t size() const noexcept { return states.size(); }
  std::optional<std::size_t> find(const std::vector<Balance>& config) const;
  MoneyState money_state(std::size_t id) const;
};

// Throws too_large if the count exceeds `cap`.
StateSpace enumerate_individual(std::size_t agents, Balance money, Balance limit,
                                std::size_t cap = kEnumerationCap);
StateSpace enumerate_collective(std::size_t agents, Balance money, Balance limit,
                                std::size_t cap = kEnumerationCap);
StateSpace enumerate_states(ModelKind kind, std::size_t agents, Balance money, Balance limit,
                            std::size_t cap = kEnumerationCap);

// Sparse square matrix of exact rationals; each row sorted by column.
class TransitionMatrix {
 public:
  using Row = std::vector<std::pair<std::size_t, Rational>>;

  TransitionMatrix() = default;
  explicit TransitionMatrix(std::vector<Row> rows);
  static TransitionMatrix from_dense(const std::vector<std::vector<Rational>>& dense);

  std::size_t size() const noexcept { return rows_.size(); }
  const Row& row(std::size_t i) const { return rows_.at(i); }
  Rational at(std::size_t i, std::size_t j) const;
  std::size_t nonzeros() const noexcept;
  bool stochastic() const;
  TransitionMatrix transposed() const;

 private:
  std::vector<Row> rows_;
};

// Entry (i, j) = (directed edges whose step maps i to j) / (2 card(E)).
// Throws invariant_breach if a step leaves the state space.
TransitionMatrix transition_matrix(const GraphTopology& g, const ModelParams& p, const StateSpace& ss);

struct ReversibilityReport {
  bool symmetric = true;
  std::size_t violations = 0;
  // First offending pair and |m(i,j) - m(j,i)| there.
  std::optional<std::pair<std::size_t, std::size_t>> first_violation;
  Rational max_violation = 0;
};
ReversibilityReport check_reversible(const TransitionMatrix& m);

bool check_irreducible(const TransitionMatrix& m);
// Period of an irreducible chain (gcd of cycle lengths through any state);
// 0 for a reducible one.
std::size_t chain_period(const TransitionMatrix& m);
bool has_positive_diagonal(const TransitionMatrix& m);
// Irreducible with period 1.
bool check_aperiodic(const TransitionMatrix& m);

// Longest shortest path from any state to `target`; nullopt when some
// state cannot reach it.
std::optional<std::size_t> max_steps_to(const TransitionMatrix& m, std::size_t target);

// Exact solve of pi = pi m with sum(pi) = 1. Throws no_unique_stationary
// for reducible input. The result is verified in rational arithmetic.
std::vector<Rational> stationary(const TransitionMatrix& m);

// Per-vertex marginal of a distribution over the state space.
std::vector<std::map<Balance, Rational>> vertex_marginals(const StateSpace& ss, const std::vector<Rational>& pi);

struct InstanceReport {
  ModelParams params;
  std::size_t agents = 0;
  std::string graph;
  std::size_t state_count = 0;
  BigCount lambda_value = 0;
  bool count_match = false;
  bool stochastic = false;
  bool symmetric = false;
  bool irreducible = false;
  bool aperiodic = false;
  bool uniform = false;
  bool marginal_match = false;
  bool closed = true;  // steps never left the state space
  bool degree_independent = false;
  std::string failure;  // first failed check, empty on success
  double seconds = 0;

  bool passed() const noexcept { return failure.empty(); }
};

// Count formula override used to exercise failure reporting.
using LambdaFn = std::function<BigCount(ModelKind, std::int64_t, std::int64_t, std::int64_t)>;

BigCount lambda_formula(ModelKind kind, std::int64_t agents, std::int64_t money, std::int64_t limit);

struct VerifyOptions {
  bool counts_only = false;
  LambdaFn lambda = lambda_formula;
};

InstanceReport verify_instance(const GraphTopology& g, const ModelParams& p, const VerifyOptions& opt = {});

struct GridSpec {
  std::size_t max_n = 4;
  Balance max_money = 5;
  Balance max_limit = 3;
  std::size_t min_n = 2;
  std::vector<NamedGraph> graphs{NamedGraph::path, NamedGraph::cycle, NamedGraph::complete, NamedGraph::star};
  std::vector<ModelKind> models{ModelKind::individual, ModelKind::collective};
};

struct GridReport {
  std::vector<InstanceReport> instances;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double seconds = 0;
  bool all_passed() const noexcept { return failed == 0; }
};

GridReport verify_grid(const GridSpec& spec, const VerifyOptions& opt = {}, unsigned threads = 1);

struct CountCheck {
  ModelKind kind;
  std::size_t agents;
  Balance money;
  Balance limit;
  std::size_t enumerated;
  BigCount formula;
  bool match() const { return formula == static_cast<unsigned long>(enumerated); }
};

// Enumeration versus formula over N in [1, max_n], no graph involved.
std::vector<CountCheck> count_grid(std::size_t max_n, Balance max_money, Balance max_limit,
                                   const LambdaFn& lambda = lambda_formula);

}  // namespace coinflow
