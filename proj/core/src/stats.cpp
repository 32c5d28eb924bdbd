#include "coinflow/stats.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "coinflow/error.hpp"

namespace coinflow {

double DensePmf::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

Histogram::Histogram(SupportWindow window) : window_(window), counts_(window.size(), 0) {}

void Histogram::add(Balance c, std::uint64_t weight) {
  if (!window_.contains(c))
    raise(ErrorCode::corrupted_state, "balance " + std::to_string(c) + " outside support [" +
                                          std::to_string(window_.lo) + ", " +
                                          std::to_string(window_.hi) + "]");
  counts_[static_cast<std::size_t>(c - window_.lo)] += weight;
  total_ += weight;
}

std::uint64_t Histogram::count(Balance c) const {
  if (!window_.contains(c)) return 0;
  return counts_[static_cast<std::size_t>(c - window_.lo)];
}

double Histogram::frequency(Balance c) const {
  return total_ == 0 ? 0.0 : static_cast<double>(count(c)) / static_cast<double>(total_);
}

void Histogram::merge(const Histogram& other) {
  if (other.counts_.empty()) return;
  if (counts_.empty()) {
    *this = other;
    return;
  }
  const SupportWindow merged{std::min(window_.lo, other.window_.lo),
                             std::max(window_.hi, other.window_.hi)};
  if (merged != window_) {
    std::vector<std::uint64_t> grown(merged.size(), 0);
    std::copy(counts_.begin(), counts_.end(),
              grown.begin() + static_cast<std::ptrdiff_t>(window_.lo - merged.lo));
    counts_ = std::move(grown);
    window_ = merged;
  }
  const auto shift = static_cast<std::size_t>(other.window_.lo - window_.lo);
  for (std::size_t i = 0; i < other.counts_.size(); ++i) counts_[shift + i] += other.counts_[i];
  total_ += other.total_;
}

DensePmf Histogram::normalized() const {
  DensePmf pmf{window_.lo, std::vector<double>(counts_.size(), 0.0)};
  if (total_ == 0) return pmf;
  const auto denom = static_cast<double>(total_);
  for (std::size_t i = 0; i < counts_.size(); ++i) pmf.mass[i] = static_cast<double>(counts_[i]) / denom;
  return pmf;
}

void accumulate(Histogram& h, const MoneyState& state) {
  for (Balance b : state.balances) h.add(b);
}

double tv_distance(const DensePmf& p, const DensePmf& q) {
  if (p.mass.empty() && q.mass.empty()) return 0.0;
  Balance lo = p.mass.empty() ? q.lo : (q.mass.empty() ? p.lo : std::min(p.lo, q.lo));
  Balance hi = p.mass.empty() ? q.hi() : (q.mass.empty() ? p.hi() : std::max(p.hi(), q.hi()));
  double sum = 0.0;
  for (Balance c = lo; c <= hi; ++c) sum += std::abs(p.at(c) - q.at(c));
  return 0.5 * sum;
}

ChiSquare chi_square(const Histogram& observed, const DensePmf& expected) {
  ChiSquare result;
  if (observed.total() == 0) return result;
  const auto n = static_cast<double>(observed.total());
  const Balance lo = std::min(observed.window().lo, expected.lo);
  const Balance hi = std::max(observed.window().hi, expected.hi());
  double obs_acc = 0, exp_acc = 0;
  std::size_t cells = 0;
  bool impossible = false;
  for (Balance c = lo; c <= hi; ++c) {
    if (observed.count(c) > 0 && expected.at(c) <= 0) impossible = true;
    obs_acc += static_cast<double>(observed.count(c));
    exp_acc += n * expected.at(c);
    if (exp_acc >= 5.0) {
      result.statistic += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
      ++cells;
      obs_acc = exp_acc = 0;
    }
  }
  if (exp_acc > 0) {
    result.statistic += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
    ++cells;
  } else if (obs_acc > 0) {
    result.statistic = std::numeric_limits<double>::infinity();
  }
  if (impossible) result.statistic = std::numeric_limits<double>::infinity();
  result.dof = cells > 1 ? cells - 1 : 0;
  if (result.dof == 0 || !std::isfinite(result.statistic)) {
    result.p_value = std::isfinite(result.statistic) ? 1.0 : 0.0;
  } else {
    boost::math::chi_squared dist(static_cast<double>(result.dof));
    result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  }
  return result;
}

void InteractionTally::merge(const InteractionTally& other) noexcept {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
}

SymmetryReport interaction_symmetry(const InteractionTally& t, double z_threshold) {
  SymmetryReport report;
  if (t.total == 0) return report;
  const auto n = static_cast<double>(t.total);
  for (std::size_t i = 0; i < InteractionType::kCount; ++i) {
    const auto a = InteractionType::from_index(i);
    const auto b = a.swapped();
    if (b.index() <= i) continue;
    const double pa = static_cast<double>(t.counts[i]) / n;
    const double pb = static_cast<double>(t.counts[b.index()]) / n;
    const double diff = std::abs(pa - pb);
    // Per-step (1{a} - 1{b}) has conditional mean zero, variance pa + pb - (pa - pb)^2.
    const double var = std::max(pa + pb - (pa - pb) * (pa - pb), 0.0);
    const double sigma = std::sqrt(var / n);
    const double z = sigma > 0 ? diff / sigma : (diff > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (diff > report.statistic) report.statistic = diff;
    if (z > report.max_z || (z == report.max_z && diff >= report.statistic)) {
      report.max_z = z;
      report.worst_pair = a;
    }
  }
  report.significant = report.max_z > z_threshold;
  return report;
}

namespace {

struct MeanCi {
  double mean;
  double halfwidth;
};

// Ratio estimator sum(num)/sum(den) with the spread of per-batch ratios.
template <typename Num>
MeanCi batch_means(const std::vector<DriftBatch>& batches, Num numerator) {
  double num = 0, den = 0;
  std::vector<double> ratios;
  for (const auto& b : batches) {
    if (b.conditioned == 0) continue;
    num += numerator(b);
    den += static_cast<double>(b.conditioned);
    ratios.push_back(numerator(b) / static_cast<double>(b.conditioned));
  }
  const double mean = num / den;
  double ss = 0;
  const double rbar = std::accumulate(ratios.begin(), ratios.end(), 0.0) / static_cast<double>(ratios.size());
  for (double r : ratios) ss += (r - rbar) * (r - rbar);
  const double sd = std::sqrt(ss / static_cast<double>(ratios.size() - 1));
  return {mean, 1.959963984540054 * sd / std::sqrt(static_cast<double>(ratios.size()))};
}

}  // namespace

DriftEstimate drift_estimate(const std::vector<DriftBatch>& batches) {
  const auto usable = std::count_if(batches.begin(), batches.end(),
                                    [](const DriftBatch& b) { return b.conditioned > 0; });
  if (usable < 2)
    raise(ErrorCode::insufficient_data, "bank was positive in fewer than two batches");
  DriftEstimate est;
  est.batches = static_cast<std::size_t>(usable);
  for (const auto& b : batches) est.sample_count += b.conditioned;
  const auto inc = batch_means(batches, [](const DriftBatch& b) { return static_cast<double>(b.increment_sum); });
  const auto zero = batch_means(batches, [](const DriftBatch& b) { return static_cast<double>(b.zero_givers); });
  const auto gap = batch_means(batches, [](const DriftBatch& b) {
    return static_cast<double>(b.increment_sum) + static_cast<double>(b.zero_givers);
  });
  est.mean_increment = inc.mean;
  est.ci_halfwidth = inc.halfwidth;
  est.zero_prob = zero.mean;
  est.zero_prob_ci = zero.halfwidth;
  est.identity_gap = gap.mean;
  est.identity_gap_ci = gap.halfwidth;
  return est;
}

BankCurve bank_depletion_curve(const BankTrace& trace) {
  BankCurve curve;
  const double scale = trace.initial_stock > 0 ? static_cast<double>(trace.initial_stock) : 0.0;
  curve.series.reserve(trace.points.size());
  for (auto [t, bank] : trace.points)
    curve.series.emplace_back(t, scale > 0 ? bank / scale : 0.0);
  if (scale > 0 && trace.late_steps > 0)
    curve.late_average = static_cast<double>(trace.late_sum / static_cast<long double>(trace.late_steps)) / scale;
  return curve;
}

}  // namespace coinflow
