#include "coinflow/model.hpp"

#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "coinflow/error.hpp"

namespace coinflow {

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::individual ? "individual" : "collective";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "individual") return ModelKind::individual;
  if (name == "collective") return ModelKind::collective;
  raise(ErrorCode::parse_error, "unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(InitialPolicy policy) noexcept {
  return policy == InitialPolicy::even ? "even" : "all_on_one";
}

InitialPolicy parse_initial_policy(std::string_view name) {
  if (name == "even") return InitialPolicy::even;
  if (name == "all_on_one" || name == "all-on-one") return InitialPolicy::all_on_one;
  raise(ErrorCode::parse_error, "unknown initial policy '" + std::string(name) + "'");
}

void validate(const ModelParams& p, std::size_t n) {
  if (p.money < 0) raise(ErrorCode::invalid_parameter, "money must be >= 0");
  if (p.limit < 0) raise(ErrorCode::invalid_parameter, "debt limit must be >= 0");
  if (n == 0) raise(ErrorCode::invalid_size, "no agents");
  const auto nn = static_cast<Balance>(n);
  if (p.limit > 0 && nn > kMaxScale / p.limit)
    raise(ErrorCode::invalid_parameter, "M + N*L exceeds 2^40");
  if (p.money > kMaxScale - nn * p.limit)
    raise(ErrorCode::invalid_parameter, "M + N*L exceeds 2^40");
}

SupportWindow support(const ModelParams& p, std::size_t n) {
  const auto nn = static_cast<Balance>(n);
  if (p.kind == ModelKind::individual) return {-p.limit, p.money + p.limit * (nn - 1)};
  return {-p.limit, p.money + p.limit};
}

Balance MoneyState::total() const noexcept {
  return std::accumulate(balances.begin(), balances.end(), Balance{0});
}

Balance MoneyState::outstanding_debt() const noexcept {
  Balance debt = 0;
  for (Balance b : balances)
    if (b < 0) debt -= b;
  return debt;
}

MoneyState initial_state(const GraphTopology& g, const ModelParams& p, InitialPolicy policy) {
  const std::size_t n = g.vertex_count();
  validate(p, n);
  MoneyState s;
  s.balances.assign(n, 0);
  if (policy == InitialPolicy::even) {
    const auto nn = static_cast<Balance>(n);
    const Balance base = p.money / nn;
    const Balance extra = p.money % nn;
    for (std::size_t i = 0; i < n; ++i) s.balances[i] = base + (static_cast<Balance>(i) < extra ? 1 : 0);
  } else {
    s.balances[0] = p.money;
  }
  if (p.kind == ModelKind::collective) s.bank = p.limit;
  return s;
}

void validate_state(const MoneyState& s, const ModelParams& p, std::size_t n) {
  if (s.balances.size() != n)
    raise(ErrorCode::invalid_state, "state has " + std::to_string(s.balances.size()) +
                                        " balances, graph has " + std::to_string(n) + " vertices");
  if (s.total() != p.money)
    raise(ErrorCode::invalid_state, "balances sum to " + std::to_string(s.total()) +
                                        ", expected M = " + std::to_string(p.money));
  if (p.kind == ModelKind::individual) {
    if (s.bank) raise(ErrorCode::invalid_state, "individual model has no bank");
    for (std::size_t i = 0; i < n; ++i)
      if (s.balances[i] < -p.limit)
        raise(ErrorCode::invalid_state, "vertex " + std::to_string(i) + " is below the debt floor");
  } else {
    if (!s.bank) raise(ErrorCode::invalid_state, "collective model requires a bank balance");
    if (*s.bank < 0) raise(ErrorCode::invalid_state, "bank balance is negative");
    if (*s.bank + s.outstanding_debt() != p.limit)
      raise(ErrorCode::invalid_state, "bank + outstanding debt = " +
                                          std::to_string(*s.bank + s.outstanding_debt()) +
                                          ", expected L_c = " + std::to_string(p.limit));
  }
}

void write_snapshot(std::ostream& out, const MoneyState& s, const ModelParams& p) {
  out << s.balances.size() << ' ' << p.money << ' ' << p.limit << ' ' << to_string(p.kind) << '\n';
  for (Balance b : s.balances) out << b << '\n';
  if (s.bank) out << "bank " << *s.bank << '\n';
}

Snapshot read_snapshot(std::istream& in) {
  Snapshot snap;
  long long n = 0;
  std::string kind;
  if (!(in >> n >> snap.params.money >> snap.params.limit >> kind) || n < 1)
    raise(ErrorCode::parse_error, "snapshot header must be 'n M L kind'");
  snap.params.kind = parse_model_kind(kind);
  snap.state.balances.resize(static_cast<std::size_t>(n));
  for (auto& b : snap.state.balances)
    if (!(in >> b)) raise(ErrorCode::parse_error, "snapshot has fewer than n balances");
  std::string tag;
  if (in >> tag) {
    Balance bank = 0;
    if (tag != "bank" || !(in >> bank)) raise(ErrorCode::parse_error, "expected 'bank <value>'");
    snap.state.bank = bank;
  }
  if (snap.params.kind == ModelKind::collective && !snap.state.bank)
    raise(ErrorCode::invalid_state, "collective snapshot lacks a bank line");
  validate(snap.params, snap.state.balances.size());
  validate_state(snap.state, snap.params, snap.state.balances.size());
  return snap;
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::parse_error, "cannot open snapshot '" + path + "'");
  return read_snapshot(in);
}

char to_char(Sign s) noexcept {
  switch (s) {
    case Sign::negative: return '-';
    case Sign::zero: return '0';
    case Sign::positive: return '+';
  }
  return '?';
}

std::string InteractionType::label() const {
  return std::string{'(', to_char(giver), ',', to_char(receiver), ')'};
}

int bank_increment(InteractionType t) noexcept {
  if (t.giver != Sign::positive && t.receiver != Sign::negative) return -1;
  if (t.giver == Sign::positive && t.receiver == Sign::negative) return 1;
  return 0;
}

}  // namespace coinflow
