#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coinflow/graph.hpp"

namespace coinflow {

using Balance = std::int64_t;

enum class ModelKind { individual, collective };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

// `limit` is L_i for the individual model and L_c (initial bank stock) for
// the collective one.
struct ModelParams {
  ModelKind kind = ModelKind::individual;
  Balance money = 0;
  Balance limit = 0;

  double temperature(std::size_t n) const { return static_cast<double>(money) / static_cast<double>(n); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Counts stay exact in 64-bit arithmetic below this bound on M + N*L.
inline constexpr Balance kMaxScale = Balance{1} << 40;

// Throws invalid_parameter on M < 0, L < 0 or M + N*L > 2^40.
void validate(const ModelParams& p, std::size_t n);

struct SupportWindow {
  Balance lo;
  Balance hi;
  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  bool contains(Balance c) const { return lo <= c && c <= hi; }
  friend bool operator==(const SupportWindow&, const SupportWindow&) = default;
};

// Per-agent support: [-L_i, M + L_i(N-1)] or [-L_c, M + L_c].
SupportWindow support(const ModelParams& p, std::size_t n);

struct MoneyState {
  std::vector<Balance> balances;
  // Bank stock; present for the collective model only.
  std::optional<Balance> bank;

  Balance total() const noexcept;
  Balance outstanding_debt() const noexcept;

  friend bool operator==(const MoneyState&, const MoneyState&) = default;
};

enum class InitialPolicy { even, all_on_one };

std::string_view to_string(InitialPolicy policy) noexcept;
InitialPolicy parse_initial_policy(std::string_view name);

MoneyState initial_state(const GraphTopology& g, const ModelParams& p, InitialPolicy policy);

// Throws invalid_state if `s` violates conservation, the debt floor or the
// bank identity for (p, n).
void validate_state(const MoneyState& s, const ModelParams& p, std::size_t n);

// Snapshot text: `n M L kind`, one balance per line, then `bank <value>`
// for the collective model.
void write_snapshot(std::ostream& out, const MoneyState& s, const ModelParams& p);
struct Snapshot {
  ModelParams params;
  MoneyState state;
};
Snapshot read_snapshot(std::istream& in);
Snapshot load_snapshot(const std::string& path);

// Transfer x -> y iff xi(x) > -L_i. Returns whether a coin moved.
inline bool step_individual(MoneyState& s, Vertex x, Vertex y, Balance limit) noexcept {
  if (s.balances[x] <= -limit) return false;
  --s.balances[x];
  ++s.balances[y];
  return true;
}

// tau_{x,y}: x gives its own coin if it has one, otherwise borrows from a
// non-empty bank; an indebted receiver pays the coin back to the bank.
inline bool step_collective(MoneyState& s, Vertex x, Vertex y) noexcept {
  const Balance gx = s.balances[x];
  const Balance gy = s.balances[y];
  Balance& bank = *s.bank;
  if (gx <= 0 && bank <= 0) return false;
  if (gx <= 0 && gy >= 0) {
    --bank;
  } else if (gx > 0 && gy < 0) {
    ++bank;
  }
  --s.balances[x];
  ++s.balances[y];
  return true;
}

enum class Sign : std::uint8_t { negative = 0, zero = 1, positive = 2 };

inline Sign sign_of(Balance v) noexcept {
  return v < 0 ? Sign::negative : (v == 0 ? Sign::zero : Sign::positive);
}

char to_char(Sign s) noexcept;

// Sign pair (giver, receiver) observed before a step.
struct InteractionType {
  Sign giver;
  Sign receiver;

  static constexpr std::size_t kCount = 9;

  std::size_t index() const noexcept {
    return 3 * static_cast<std::size_t>(giver) + static_cast<std::size_t>(receiver);
  }
  static InteractionType from_index(std::size_t i) noexcept {
    return {static_cast<Sign>(i / 3), static_cast<Sign>(i % 3)};
  }
  InteractionType swapped() const noexcept { return {receiver, giver}; }
  std::string label() const;  // e.g. "(+,-)"

  friend bool operator==(const InteractionType&, const InteractionType&) = default;
};

inline InteractionType classify_interaction(const MoneyState& s, Vertex x, Vertex y) noexcept {
  return {sign_of(s.balances[x]), sign_of(s.balances[y])};
}

// Bank change under tau when the bank is positive, as a function of the
// interaction type alone: -1, 0 or +1.
int bank_increment(InteractionType t) noexcept;

}  // namespace coinflow
