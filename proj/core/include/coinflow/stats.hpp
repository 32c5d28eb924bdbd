#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "coinflow/model.hpp"

namespace coinflow {

// Dense probability vector on [lo, lo + mass.size()).
struct DensePmf {
  Balance lo = 0;
  std::vector<double> mass;

  Balance hi() const { return lo + static_cast<Balance>(mass.size()) - 1; }
  double at(Balance c) const {
    if (c < lo || c > hi()) return 0.0;
    return mass[static_cast<std::size_t>(c - lo)];
  }
  double total() const;
};

// Unit-width bins of agent balances.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(SupportWindow window);

  Balance offset() const noexcept { return window_.lo; }
  const SupportWindow& window() const noexcept { return window_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }

  // Throws corrupted_state when c lies outside the window.
  void add(Balance c, std::uint64_t weight = 1);
  std::uint64_t count(Balance c) const;
  double frequency(Balance c) const;

  // Window becomes the union of both windows.
  void merge(const Histogram& other);

  DensePmf normalized() const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  SupportWindow window_{0, -1};
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// One count per vertex at that vertex's balance.
void accumulate(Histogram& h, const MoneyState& state);

// (1/2) sum |p - q| over the union of supports.
double tv_distance(const DensePmf& p, const DensePmf& q);

struct ChiSquare {
  double statistic = 0;
  std::size_t dof = 0;
  double p_value = 1;
};

// Pearson statistic with adjacent bins pooled until each expected count >= 5.
// Any count in a zero-probability cell gives an infinite statistic.
ChiSquare chi_square(const Histogram& observed, const DensePmf& expected);

// Interaction counts over the 9 sign pairs, restricted to steps where the
// bank was positive.
struct InteractionTally {
  std::array<std::uint64_t, InteractionType::kCount> counts{};
  std::uint64_t total = 0;

  void record(InteractionType t) noexcept {
    ++counts[t.index()];
    ++total;
  }
  void merge(const InteractionTally& other) noexcept;
  double proportion(InteractionType t) const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(counts[t.index()]) / static_cast<double>(total);
  }

  friend bool operator==(const InteractionTally&, const InteractionTally&) = default;
};

struct SymmetryReport {
  // max over unordered pairs of |p(e1,e2) - p(e2,e1)|
  double statistic = 0;
  // largest |difference| / binomial sigma across pairs
  double max_z = 0;
  InteractionType worst_pair{Sign::zero, Sign::zero};
  bool significant = false;  // max_z above the flag threshold
};

SymmetryReport interaction_symmetry(const InteractionTally& t, double z_threshold = 5.0);

// Bank increments over a contiguous block of sampled steps with bank > 0.
struct DriftBatch {
  std::uint64_t conditioned = 0;
  std::int64_t increment_sum = 0;
  std::uint64_t zero_givers = 0;

  friend bool operator==(const DriftBatch&, const DriftBatch&) = default;
};

struct DriftEstimate {
  double mean_increment = 0;
  double ci_halfwidth = 0;
  double zero_prob = 0;
  double zero_prob_ci = 0;
  // mean of (increment + 1{giver has 0 coins}); zero in equilibrium
  double identity_gap = 0;
  double identity_gap_ci = 0;
  std::uint64_t sample_count = 0;
  std::size_t batches = 0;

  bool negative_with_confidence() const { return mean_increment + ci_halfwidth < 0; }
  bool matches_zero_prob() const {
    return std::abs(mean_increment + zero_prob) < ci_halfwidth + zero_prob_ci;
  }
};

// Batch-means estimate with 95% normal intervals. Throws insufficient_data
// when fewer than two batches saw a positive bank.
DriftEstimate drift_estimate(const std::vector<DriftBatch>& batches);

struct BankTrace {
  Balance initial_stock = 0;
  // (step, bank) samples; averaged across replicas after a merge
  std::vector<std::pair<std::uint64_t, double>> points;
  long double late_sum = 0;
  std::uint64_t late_steps = 0;

  friend bool operator==(const BankTrace&, const BankTrace&) = default;
};

struct BankCurve {
  std::vector<std::pair<std::uint64_t, double>> series;
  double late_average = 0;
};

// Bank / L_c along the run; late_average covers the second half of all
// steps. With L_c = 0 the bank is identically empty and every value is 0.
BankCurve bank_depletion_curve(const BankTrace& trace);

}  // namespace coinflow
