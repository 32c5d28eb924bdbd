#include "coinflow/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "coinflow/error.hpp"

namespace coinflow {

std::uint64_t default_burn_in(const GraphTopology& g, const ModelParams& p) {
  const double scale = 20.0 * static_cast<double>(g.directed_edges().size()) *
                       (p.temperature(g.vertex_count()) + static_cast<double>(p.limit));
  constexpr double kMax = 1e18;
  return static_cast<std::uint64_t>(std::ceil(std::min(std::max(scale, 1.0), kMax)));
}

bool same_results(const SimulationReport& a, const SimulationReport& b) {
  return a.params == b.params && a.vertex_count == b.vertex_count && a.graph == b.graph &&
         a.seed == b.seed && a.replicas == b.replicas && a.burn_in == b.burn_in &&
         a.samples == b.samples && a.thinning == b.thinning && a.total_steps == b.total_steps &&
         a.transfers == b.transfers && a.histogram == b.histogram &&
         a.interactions == b.interactions && a.drift == b.drift && a.bank == b.bank &&
         a.final_states == b.final_states;
}

namespace {

// Histogram of occupancies summed over sample points, updated in O(1) per
// change: each bin remembers the sample index at which it was last settled.
class LazyHistogram {
 public:
  LazyHistogram(SupportWindow window, const std::vector<Balance>& balances) : window_(window) {
    occ_.assign(window.size(), 0);
    acc_.assign(window.size(), 0);
    stamp_.assign(window.size(), 0);
    for (Balance b : balances) ++occ_[index(b)];
  }

  void move(Balance from, Balance to) noexcept {
    const auto i = index(from);
    settle(i);
    --occ_[i];
    const auto j = index(to);
    settle(j);
    ++occ_[j];
  }

  void sample() noexcept { ++samples_; }

  Histogram finish() {
    Histogram h(window_);
    for (std::size_t i = 0; i < occ_.size(); ++i) {
      settle(i);
      if (acc_[i] > 0) h.add(window_.lo + static_cast<Balance>(i), acc_[i]);
    }
    return h;
  }

 private:
  std::size_t index(Balance b) const noexcept { return static_cast<std::size_t>(b - window_.lo); }
  void settle(std::size_t i) noexcept {
    acc_[i] += occ_[i] * (samples_ - stamp_[i]);
    stamp_[i] = samples_;
  }

  SupportWindow window_;
  std::vector<std::uint64_t> occ_, acc_, stamp_;
  std::uint64_t samples_ = 0;
};

void check_sampled_state(const std::vector<Balance>& balances, Balance bank, const ModelParams& p,
                         std::uint64_t step) {
  Balance total = 0, debt = 0;
  for (Balance b : balances) {
    total += b;
    if (b < 0) debt -= b;
    if (p.kind == ModelKind::individual && b < -p.limit)
      raise(ErrorCode::invariant_breach, "balance below -L_i at step " + std::to_string(step));
  }
  if (total != p.money)
    raise(ErrorCode::invariant_breach, "money not conserved at step " + std::to_string(step));
  if (p.kind == ModelKind::collective && (bank < 0 || bank + debt != p.limit))
    raise(ErrorCode::invariant_breach, "bank identity broken at step " + std::to_string(step));
}

template <ModelKind Kind>
class Runner {
 public:
  Runner(const GraphTopology& g, const ModelParams& p, const SimulationConfig& cfg,
         MoneyState start, Xoshiro256 rng, std::uint64_t total_steps)
      : g_(g), p_(p), cfg_(cfg), balances_(std::move(start.balances)),
        bank_(start.bank.value_or(0)), rng_(rng), total_(total_steps) {
    edges_ = g.directed_edges().data();
    edge_count_ = g.directed_edges().size();
    track_bank_ = Kind == ModelKind::collective && cfg.collectors.bank_trace;
    if (track_bank_) {
      stride_ = std::max<std::uint64_t>(1, total_ / std::max<std::size_t>(1, cfg.trace_points));
      next_trace_ = 0;
      late_start_ = total_ / 2;
      trace_.initial_stock = p.limit;
      record_trace();
      next_trace_ = stride_;
    }
  }

  SimulationReport run() {
    run_steps<false>(cfg_.burn_in, nullptr);

    std::optional<LazyHistogram> lazy;
    if (cfg_.collectors.histogram) lazy.emplace(support(p_, balances_.size()), balances_);
    const std::uint64_t sampled_steps = cfg_.samples * cfg_.thinning;
    const bool conditioned = Kind == ModelKind::collective &&
                             (cfg_.collectors.drift || cfg_.collectors.interactions);
    const std::size_t batch_count = std::max<std::size_t>(1, cfg_.drift_batches);
    if (conditioned && cfg_.collectors.drift) drift_.assign(batch_count, {});
    std::uint64_t done = 0;
    for (std::uint64_t s = 0; s < cfg_.samples; ++s) {
      std::uint64_t remaining = cfg_.thinning;
      while (remaining > 0) {
        // Split the stretch at drift batch boundaries.
        std::uint64_t chunk = remaining;
        if (!drift_.empty()) {
          batch_ = static_cast<std::size_t>(
              static_cast<unsigned __int128>(done) * batch_count / sampled_steps);
          const auto batch_end = static_cast<std::uint64_t>(
              (static_cast<unsigned __int128>(batch_ + 1) * sampled_steps + batch_count - 1) /
              batch_count);
          chunk = std::min(chunk, std::max<std::uint64_t>(1, batch_end - done));
        }
        if (conditioned || lazy)
          run_steps<true>(chunk, lazy ? &*lazy : nullptr);
        else
          run_steps<false>(chunk, nullptr);
        done += chunk;
        remaining -= chunk;
      }
      if (lazy) lazy->sample();
      if (cfg_.check_invariants) check_sampled_state(balances_, bank_, p_, step_);
    }
    if (track_bank_ && (trace_.points.empty() || trace_.points.back().first != step_)) record_trace();

    SimulationReport r;
    r.params = p_;
    r.vertex_count = balances_.size();
    r.graph = g_.description();
    r.seed = cfg_.seed;
    r.rng_algorithm = std::string(Xoshiro256::algorithm_name);
    r.burn_in = cfg_.burn_in;
    r.samples = cfg_.samples;
    r.thinning = cfg_.thinning;
    r.total_steps = step_;
    r.transfers = transfers_;
    if (lazy) r.histogram = lazy->finish();
    r.interactions = tally_;
    r.drift = std::move(drift_);
    if (track_bank_) r.bank = std::move(trace_);
    MoneyState final_state;
    final_state.balances = balances_;
    if (Kind == ModelKind::collective) final_state.bank = bank_;
    r.final_states.push_back(std::move(final_state));
    return r;
  }

 private:
  void record_trace() { trace_.points.emplace_back(step_, static_cast<double>(bank_)); }

  template <bool Sampling>
  void run_steps(std::uint64_t count, LazyHistogram* lazy) {
    Balance* bal = balances_.data();
    for (std::uint64_t k = 0; k < count; ++k) {
      const DirectedEdge e = edges_[rng_.below(edge_count_)];
      const Balance gx = bal[e.from];
      const Balance gy = bal[e.to];
      bool moved;
      if constexpr (Kind == ModelKind::individual) {
        moved = gx > -p_.limit;
      } else {
        if constexpr (Sampling) {
          if (bank_ > 0) {
            const InteractionType type{sign_of(gx), sign_of(gy)};
            if (cfg_.collectors.interactions) tally_.record(type);
            if (!drift_.empty()) {
              auto& b = drift_[batch_];
              ++b.conditioned;
              b.increment_sum += bank_increment(type);
              b.zero_givers += gx == 0 ? 1 : 0;
            }
          }
        }
        moved = gx > 0 || bank_ > 0;
        if (moved) {
          if (gx <= 0 && gy >= 0)
            --bank_;
          else if (gx > 0 && gy < 0)
            ++bank_;
        }
      }
      if (moved) {
        bal[e.from] = gx - 1;
        bal[e.to] = gy + 1;
        ++transfers_;
        if constexpr (Sampling) {
          if (lazy) {
            lazy->move(gx, gx - 1);
            lazy->move(gy, gy + 1);
          }
        }
      }
      ++step_;
      if constexpr (Kind == ModelKind::collective) {
        if (track_bank_) {
          if (step_ > late_start_) {
            trace_.late_sum += static_cast<long double>(bank_);
            ++trace_.late_steps;
          }
          if (step_ == next_trace_) {
            record_trace();
            next_trace_ += stride_;
          }
        }
      }
    }
  }

  const GraphTopology& g_;
  ModelParams p_;
  const SimulationConfig& cfg_;
  std::vector<Balance> balances_;
  Balance bank_;
  Xoshiro256 rng_;
  std::uint64_t total_;

  const DirectedEdge* edges_ = nullptr;
  std::uint64_t edge_count_ = 0;
  std::uint64_t step_ = 0;
  std::uint64_t transfers_ = 0;

  bool track_bank_ = false;
  std::uint64_t stride_ = 1, next_trace_ = 0, late_start_ = 0;
  BankTrace trace_;

  InteractionTally tally_;
  std::vector<DriftBatch> drift_;
  std::size_t batch_ = 0;
};

}  // namespace

SimulationReport simulate(const GraphTopology& g, const ModelParams& p, const SimulationConfig& cfg,
                          std::uint64_t replica_index) {
  validate(p, g.vertex_count());
  if (cfg.samples > 0 && cfg.thinning == 0)
    raise(ErrorCode::invalid_parameter, "thinning must be >= 1 when samples > 0");
  std::uint64_t sampled = 0, total = 0;
  if (__builtin_mul_overflow(cfg.samples, cfg.thinning, &sampled) ||
      __builtin_add_overflow(sampled, cfg.burn_in, &total))
    raise(ErrorCode::run_too_long, "burn_in + samples * thinning overflows a 64-bit step counter");

  MoneyState start = cfg.initial ? *cfg.initial : initial_state(g, p, cfg.policy);
  validate_state(start, p, g.vertex_count());

  const auto t0 = std::chrono::steady_clock::now();
  const Xoshiro256 rng = Xoshiro256::for_replica(cfg.seed, replica_index);
  SimulationReport r = p.kind == ModelKind::individual
                           ? Runner<ModelKind::individual>(g, p, cfg, std::move(start), rng, total).run()
                           : Runner<ModelKind::collective>(g, p, cfg, std::move(start), rng, total).run();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

SimulationReport merge_reports(std::span<const SimulationReport> reports) {
  if (reports.empty()) raise(ErrorCode::invalid_parameter, "nothing to merge");
  SimulationReport merged = reports.front();
  merged.replicas = 0;
  merged.wall_seconds = 0;
  const std::size_t points = merged.bank.points.size();
  for (auto& pt : merged.bank.points) pt.second = 0;
  merged.bank.late_sum = 0;
  merged.bank.late_steps = 0;
  merged.histogram = Histogram();
  merged.interactions = {};
  merged.drift.clear();
  merged.final_states.clear();
  merged.transfers = 0;
  for (const auto& r : reports) {
    merged.replicas += r.replicas;
    merged.wall_seconds += r.wall_seconds;
    merged.transfers += r.transfers;
    merged.histogram.merge(r.histogram);
    merged.interactions.merge(r.interactions);
    merged.drift.insert(merged.drift.end(), r.drift.begin(), r.drift.end());
    merged.final_states.insert(merged.final_states.end(), r.final_states.begin(), r.final_states.end());
    merged.bank.late_sum += r.bank.late_sum;
    merged.bank.late_steps += r.bank.late_steps;
    for (std::size_t i = 0; i < std::min(points, r.bank.points.size()); ++i)
      merged.bank.points[i].second += r.bank.points[i].second * static_cast<double>(r.replicas);
  }
  for (auto& pt : merged.bank.points) pt.second /= static_cast<double>(merged.replicas);
  return merged;
}

SimulationReport simulate_replicas(const GraphTopology& g, const ModelParams& p,
                                   const SimulationConfig& cfg, std::uint64_t replicas,
                                   unsigned threads) {
  if (replicas == 0) raise(ErrorCode::invalid_parameter, "replicas must be >= 1");
  std::vector<SimulationReport> results(replicas);
  std::vector<std::exception_ptr> errors(replicas);
  const unsigned workers = static_cast<unsigned>(
      std::clamp<std::uint64_t>(threads == 0 ? 1 : threads, 1, replicas));
  auto work = [&](unsigned worker) {
    for (std::uint64_t i = worker; i < replicas; i += workers) {
      try {
        results[i] = simulate(g, p, cfg, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return merge_reports(results);
}

}  // namespace coinflow
