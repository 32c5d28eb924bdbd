#include "coinflow/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <numeric>
#include <thread>

#include "coinflow/error.hpp"

namespace coinflow {

std::optional<std::size_t> StateSpace::find(const std::vector<Balance>& config) const {
  const auto it = index.find(config);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

MoneyState StateSpace::money_state(std::size_t id) const {
  MoneyState s;
  s.balances = states.at(id);
  if (kind == ModelKind::collective) s.bank = limit - s.outstanding_debt();
  return s;
}

namespace {

struct Enumerator {
  StateSpace& ss;
  std::size_t cap;
  std::vector<Balance> current;

  void push() {
    if (ss.states.size() >= cap)
      raise(ErrorCode::too_large, "state space exceeds the enumeration cap of " + std::to_string(cap));
    ss.index.emplace(current, ss.states.size());
    ss.states.push_back(current);
  }

  void individual(std::size_t i, Balance remaining) {
    const std::size_t n = current.size();
    if (i + 1 == n) {
      current[i] = remaining;
      push();
      return;
    }
    const auto rest = static_cast<Balance>(n - 1 - i);
    for (Balance x = -ss.limit; x <= remaining + ss.limit * rest; ++x) {
      current[i] = x;
      individual(i + 1, remaining - x);
    }
  }

  void collective(std::size_t i, Balance remaining, Balance budget) {
    const std::size_t n = current.size();
    if (i + 1 == n) {
      if (remaining < -budget) return;
      current[i] = remaining;
      push();
      return;
    }
    for (Balance x = -budget; x <= remaining + budget; ++x) {
      const Balance left = budget - std::max<Balance>(0, -x);
      if (remaining - x < -left) continue;
      current[i] = x;
      collective(i + 1, remaining - x, left);
    }
  }
};

StateSpace empty_space(ModelKind kind, std::size_t agents, Balance money, Balance limit) {
  if (agents < 1) raise(ErrorCode::invalid_size, "need at least one agent");
  validate({kind, money, limit}, agents);
  StateSpace ss;
  ss.kind = kind;
  ss.agents = agents;
  ss.money = money;
  ss.limit = limit;
  return ss;
}

}  // namespace

StateSpace enumerate_individual(std::size_t agents, Balance money, Balance limit, std::size_t cap) {
  StateSpace ss = empty_space(ModelKind::individual, agents, money, limit);
  Enumerator e{ss, cap, std::vector<Balance>(agents)};
  e.individual(0, money);
  return ss;
}

StateSpace enumerate_collective(std::size_t agents, Balance money, Balance limit, std::size_t cap) {
  StateSpace ss = empty_space(ModelKind::collective, agents, money, limit);
  Enumerator e{ss, cap, std::vector<Balance>(agents)};
  e.collective(0, money, limit);
  return ss;
}

StateSpace enumerate_states(ModelKind kind, std::size_t agents, Balance money, Balance limit, std::size_t cap) {
  return kind == ModelKind::individual ? enumerate_individual(agents, money, limit, cap)
                                       : enumerate_collective(agents, money, limit, cap);
}

TransitionMatrix::TransitionMatrix(std::vector<Row> rows) : rows_(std::move(rows)) {
  for (auto& r : rows_) {
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [j, v] : r)
      if (j >= rows_.size()) raise(ErrorCode::invalid_parameter, "matrix column out of range");
  }
}

TransitionMatrix TransitionMatrix::from_dense(const std::vector<std::vector<Rational>>& dense) {
  std::vector<Row> rows(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i].size() != dense.size()) raise(ErrorCode::invalid_parameter, "matrix must be square");
    for (std::size_t j = 0; j < dense.size(); ++j)
      if (dense[i][j] != 0) rows[i].emplace_back(j, dense[i][j]);
  }
  return TransitionMatrix(std::move(rows));
}

Rational TransitionMatrix::at(std::size_t i, std::size_t j) const {
  const Row& r = rows_.at(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j, [](const auto& e, std::size_t c) { return e.first < c; });
  return it != r.end() && it->first == j ? it->second : Rational(0);
}

std::size_t TransitionMatrix::nonzeros() const noexcept {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

bool TransitionMatrix::stochastic() const {
  for (const auto& r : rows_) {
    Rational sum = 0;
    for (const auto& [j, v] : r) {
      if (v < 0) return false;
      sum += v;
    }
    if (sum != 1) return false;
  }
  return true;
}

TransitionMatrix TransitionMatrix::transposed() const {
  std::vector<Row> cols(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& [j, v] : rows_[i]) cols[j].emplace_back(i, v);
  return TransitionMatrix(std::move(cols));
}

TransitionMatrix transition_matrix(const GraphTopology& g, const ModelParams& p, const StateSpace& ss) {
  if (ss.kind != p.kind || ss.money != p.money || ss.limit != p.limit || ss.agents != g.vertex_count())
    raise(ErrorCode::invalid_parameter, "state space does not match the model parameters");
  const auto& directed = g.directed_edges();
  const auto denom = static_cast<unsigned long>(directed.size());
  std::vector<TransitionMatrix::Row> rows(ss.size());
  std::map<std::size_t, unsigned long> counts;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    counts.clear();
    const MoneyState base = ss.money_state(i);
    for (const auto& e : directed) {
      MoneyState s = base;
      const bool moved = p.kind == ModelKind::individual ? step_individual(s, e.from, e.to, p.limit)
                                                          : step_collective(s, e.from, e.to);
      if (!moved) {
        ++counts[i];
        continue;
      }
      const auto j = ss.find(s.balances);
      if (!j || (s.bank && *s.bank != p.limit - s.outstanding_debt()))
        raise(ErrorCode::invariant_breach, "a step left the admissible state space from state " + std::to_string(i));
      ++counts[*j];
    }
    rows[i].reserve(counts.size());
    for (const auto& [j, k] : counts) rows[i].emplace_back(j, Rational(k, denom));
    for (auto& [j, v] : rows[i]) v.canonicalize();
  }
  return TransitionMatrix(std::move(rows));
}

ReversibilityReport check_reversible(const TransitionMatrix& m) {
  ReversibilityReport rep;
  const TransitionMatrix t = m.transposed();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& a = m.row(i);
    const auto& b = t.row(i);
    // Merge row i of m with row i of m^T.
    std::size_t x = 0, y = 0;
    while (x < a.size() || y < b.size()) {
      std::size_t j;
      Rational diff;
      if (y == b.size() || (x < a.size() && a[x].first < b[y].first)) {
        j = a[x].first;
        diff = a[x++].second;
      } else if (x == a.size() || b[y].first < a[x].first) {
        j = b[y].first;
        diff = b[y++].second;
      } else {
        j = a[x].first;
        diff = abs(a[x++].second - b[y++].second);
      }
      if (diff != 0) {
        rep.symmetric = false;
        ++rep.violations;
        if (!rep.first_violation) rep.first_violation = std::make_pair(i, j);
        if (diff > rep.max_violation) rep.max_violation = diff;
      }
    }
  }
  return rep;
}

namespace {

std::vector<std::size_t> bfs_levels(const TransitionMatrix& m, std::size_t source) {
  std::vector<std::size_t> level(m.size(), SIZE_MAX);
  if (m.size() == 0) return level;
  std::deque<std::size_t> queue{source};
  level[source] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& [v, w] : m.row(u)) {
      if (w != 0 && level[v] == SIZE_MAX) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return level;
}

bool all_reached(const std::vector<std::size_t>& level) {
  return std::none_of(level.begin(), level.end(), [](std::size_t l) { return l == SIZE_MAX; });
}

}  // namespace

bool check_irreducible(const TransitionMatrix& m) {
  if (m.size() == 0) return false;
  return all_reached(bfs_levels(m, 0)) && all_reached(bfs_levels(m.transposed(), 0));
}

std::size_t chain_period(const TransitionMatrix& m) {
  if (!check_irreducible(m)) return 0;
  const auto level = bfs_levels(m, 0);
  std::size_t g = 0;
  for (std::size_t u = 0; u < m.size(); ++u) {
    for (const auto& [v, w] : m.row(u)) {
      if (w == 0) continue;
      const auto lhs = level[u] + 1, rhs = level[v];
      g = std::gcd(g, lhs > rhs ? lhs - rhs : rhs - lhs);
    }
  }
  return g;
}

bool has_positive_diagonal(const TransitionMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.at(i, i) > 0) return true;
  return false;
}

bool check_aperiodic(const TransitionMatrix& m) { return chain_period(m) == 1; }

std::optional<std::size_t> max_steps_to(const TransitionMatrix& m, std::size_t target) {
  const auto level = bfs_levels(m.transposed(), target);
  if (!all_reached(level)) return std::nullopt;
  return *std::max_element(level.begin(), level.end());
}

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

struct Field {
  u64 p;
  u64 add(u64 a, u64 b) const { return a + b >= p ? a + b - p : a + b; }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p - b; }
  u64 mul(u64 a, u64 b) const { return static_cast<u64>(static_cast<u128>(a) * b % p); }
  u64 pow(u64 a, u64 e) const {
    u64 r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  u64 inv(u64 a) const { return pow(a, p - 2); }
  u64 reduce(const mpz_class& z) const { return mpz_fdiv_ui(z.get_mpz_t(), p); }
  std::optional<u64> reduce(const Rational& q) const {
    const u64 d = reduce(q.get_den());
    if (d == 0) return std::nullopt;
    return mul(reduce(q.get_num()), inv(d));
  }
};

class PrimeSource {
 public:
  u64 next() {
    mpz_nextprime(cursor_.get_mpz_t(), cursor_.get_mpz_t());
    return cursor_.get_ui();
  }

 private:
  mpz_class cursor_ = mpz_class(1) << 62;
};

// Solves (m^T - I) x = 0 with x[n-1] = 1 modulo p by banded elimination
// without pivoting. nullopt when a pivot or denominator vanishes mod p.
std::optional<std::vector<u64>> solve_mod(const TransitionMatrix& t, const Field& f) {
  const std::size_t n = t.size();
  const std::size_t k = n - 1;  // unknowns x[0..k)
  std::size_t lower = 0, upper = 0;
  for (std::size_t r = 0; r < k; ++r)
    for (const auto& [c, v] : t.row(r))
      if (c < k) {
        if (r > c) lower = std::max(lower, r - c);
        else upper = std::max(upper, c - r);
      }
  const std::size_t width = lower + upper + 1;
  if (static_cast<double>(k) * static_cast<double>(width) > 6e7)
    raise(ErrorCode::too_large, "matrix band too wide for the stationary solver");
  std::vector<u64> band(k * width, 0), rhs(k, 0);
  const auto cell = [&](std::size_t r, std::size_t c) -> u64& { return band[r * width + (c + lower - r)]; };
  for (std::size_t r = 0; r < k; ++r) {
    for (const auto& [c, v] : t.row(r)) {
      const auto red = f.reduce(v);
      if (!red) return std::nullopt;
      if (c < k) cell(r, c) = *red;
      else rhs[r] = f.sub(0, *red);
    }
    cell(r, r) = f.sub(cell(r, r), 1);
  }
  for (std::size_t piv = 0; piv < k; ++piv) {
    const u64 d = cell(piv, piv);
    if (d == 0) return std::nullopt;
    const u64 dinv = f.inv(d);
    const std::size_t last_row = std::min(k - 1, piv + lower);
    const std::size_t last_col = std::min(k - 1, piv + upper);
    for (std::size_t r = piv + 1; r <= last_row; ++r) {
      const u64 factor = f.mul(cell(r, piv), dinv);
      if (factor == 0) continue;
      for (std::size_t c = piv; c <= last_col; ++c) cell(r, c) = f.sub(cell(r, c), f.mul(factor, cell(piv, c)));
      rhs[r] = f.sub(rhs[r], f.mul(factor, rhs[piv]));
    }
  }
  std::vector<u64> x(n, 0);
  x[k] = 1;
  for (std::size_t r = k; r-- > 0;) {
    u64 acc = rhs[r];
    const std::size_t last_col = std::min(k - 1, r + upper);
    for (std::size_t c = r + 1; c <= last_col; ++c) acc = f.sub(acc, f.mul(cell(r, c), x[c]));
    x[r] = f.mul(acc, f.inv(cell(r, r)));
  }
  return x;
}

// r/s = u mod m with |r|, s <= sqrt(m/2).
std::optional<Rational> reconstruct(const mpz_class& u, const mpz_class& m) {
  mpz_class bound = sqrt(m / 2);
  mpz_class r0 = m, r1 = u, s0 = 0, s1 = 1;
  while (r1 > bound) {
    const mpz_class q = r0 / r1;
    mpz_class t = r0 - q * r1;
    r0 = r1;
    r1 = t;
    t = s0 - q * s1;
    s0 = s1;
    s1 = t;
  }
  if (s1 == 0 || abs(s1) > bound) return std::nullopt;
  mpz_class g = gcd(r1, s1);
  if (g != 1) return std::nullopt;
  Rational q(r1, s1);
  q.canonicalize();
  return q;
}

bool is_stationary(const TransitionMatrix& t, const std::vector<Rational>& x) {
  for (std::size_t j = 0; j < t.size(); ++j) {
    Rational acc = 0;
    for (const auto& [i, v] : t.row(j)) acc += x[i] * v;
    if (acc != x[j]) return false;
  }
  return true;
}

}  // namespace

std::vector<Rational> stationary(const TransitionMatrix& m) {
  if (!check_irreducible(m)) raise(ErrorCode::no_unique_stationary, "chain is reducible");
  const std::size_t n = m.size();
  if (n == 1) return {Rational(1)};
  const TransitionMatrix t = m.transposed();
  PrimeSource primes;
  std::vector<mpz_class> residue(n, 0);
  mpz_class modulus = 1;
  for (int attempt = 0, used = 0; attempt < 200 && used < 96; ++attempt) {
    const Field f{primes.next()};
    const auto x = solve_mod(t, f);
    if (!x) continue;
    ++used;
    const mpz_class p(static_cast<unsigned long>(f.p));
    mpz_class minv;
    mpz_invert(minv.get_mpz_t(), modulus.get_mpz_t(), p.get_mpz_t());
    const u64 minv_mod = f.reduce(minv);
    for (std::size_t i = 0; i < n; ++i) {
      const u64 delta = f.mul(f.sub((*x)[i], f.reduce(residue[i])), minv_mod);
      residue[i] += modulus * static_cast<unsigned long>(delta);
    }
    modulus *= p;
    std::vector<Rational> pi(n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const auto q = reconstruct(residue[i], modulus);
      if (!q) ok = false;
      else pi[i] = *q;
    }
    if (!ok || !is_stationary(t, pi)) continue;
    Rational total = 0;
    for (const auto& v : pi) total += v;
    if (total == 0) continue;
    for (auto& v : pi) v /= total;
    return pi;
  }
  raise(ErrorCode::invariant_breach, "stationary solve failed to certify a solution");
}

std::vector<std::map<Balance, Rational>> vertex_marginals(const StateSpace& ss, const std::vector<Rational>& pi) {
  if (pi.size() != ss.size()) raise(ErrorCode::invalid_parameter, "distribution size does not match state space");
  std::vector<std::map<Balance, Rational>> out(ss.agents);
  for (std::size_t s = 0; s < ss.size(); ++s)
    for (std::size_t v = 0; v < ss.agents; ++v) out[v][ss.states[s][v]] += pi[s];
  return out;
}

BigCount lambda_formula(ModelKind kind, std::int64_t agents, std::int64_t money, std::int64_t limit) {
  return kind == ModelKind::individual ? lambda_x(agents, money, limit) : lambda_y(agents, money, limit);
}

InstanceReport verify_instance(const GraphTopology& g, const ModelParams& p, const VerifyOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  InstanceReport rep;
  rep.params = p;
  rep.agents = g.vertex_count();
  rep.graph = g.description();
  const auto fail = [&](const char* what) {
    if (rep.failure.empty()) rep.failure = what;
  };
  const auto finish = [&]() {
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  };

  const StateSpace ss = enumerate_states(p.kind, rep.agents, p.money, p.limit);
  rep.state_count = ss.size();
  rep.lambda_value = opt.lambda(p.kind, static_cast<std::int64_t>(rep.agents), p.money, p.limit);
  rep.count_match = rep.lambda_value == static_cast<unsigned long>(rep.state_count);
  if (!rep.count_match) fail("count");
  if (opt.counts_only) return finish();

  TransitionMatrix m;
  try {
    m = transition_matrix(g, p, ss);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::invariant_breach) throw;
    rep.closed = false;
    fail("closed");
    return finish();
  }
  rep.stochastic = m.stochastic();
  if (!rep.stochastic) fail("stochastic");
  rep.symmetric = check_reversible(m).symmetric;
  if (!rep.symmetric) fail("symmetric");
  rep.irreducible = check_irreducible(m);
  if (!rep.irreducible) {
    fail("irreducible");
    return finish();
  }
  rep.aperiodic = check_aperiodic(m);
  if (!rep.aperiodic) fail("aperiodic");

  const auto pi = stationary(m);
  const Rational uniform(1, static_cast<unsigned long>(ss.size()));
  rep.uniform = std::all_of(pi.begin(), pi.end(), [&](const Rational& v) { return v == uniform; });
  if (!rep.uniform) fail("uniform");

  const auto marg = vertex_marginals(ss, pi);
  const ExactPMF pmf = p.kind == ModelKind::individual ? marginal_individual(rep.agents, p.money, p.limit)
                                                       : marginal_collective(rep.agents, p.money, p.limit);
  rep.marginal_match = true;
  for (const auto& mv : marg) {
    for (const auto& [c, v] : mv)
      if (!pmf.contains(c) || pmf.exact(c) != v) rep.marginal_match = false;
    for (Balance c = pmf.window.lo; c <= pmf.window.hi; ++c)
      if (!mv.count(c) && pmf.exact(c) != 0) rep.marginal_match = false;
  }
  if (!rep.marginal_match) fail("marginal");
  rep.degree_independent = std::all_of(marg.begin(), marg.end(), [&](const auto& mv) { return mv == marg.front(); });
  if (!rep.degree_independent) fail("degree_independent");
  return finish();
}

GridReport verify_grid(const GridSpec& spec, const VerifyOptions& opt, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  struct Job {
    NamedGraph graph;
    std::size_t n;
    ModelParams params;
  };
  std::vector<Job> jobs;
  for (ModelKind kind : spec.models)
    for (NamedGraph graph : spec.graphs)
      for (std::size_t n = std::max<std::size_t>(2, spec.min_n); n <= spec.max_n; ++n)
        for (Balance money = 0; money <= spec.max_money; ++money)
          for (Balance limit = 0; limit <= spec.max_limit; ++limit) jobs.push_back({graph, n, {kind, money, limit}});

  GridReport out;
  out.instances.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      const auto g = GraphTopology::build_named(jobs[i].graph, jobs[i].n);
      try {
        out.instances[i] = verify_instance(g, jobs[i].params, opt);
      } catch (const std::exception& e) {
        InstanceReport& r = out.instances[i];
        r.params = jobs[i].params;
        r.agents = jobs[i].n;
        r.graph = g.description();
        r.failure = e.what();
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& r : out.instances) (r.passed() ? out.passed : out.failed)++;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<CountCheck> count_grid(std::size_t max_n, Balance max_money, Balance max_limit, const LambdaFn& lambda) {
  std::vector<CountCheck> out;
  for (ModelKind kind : {ModelKind::individual, ModelKind::collective})
    for (std::size_t n = 1; n <= max_n; ++n)
      for (Balance money = 0; money <= max_money; ++money)
        for (Balance limit = 0; limit <= max_limit; ++limit) {
          const auto ss = enumerate_states(kind, n, money, limit);
          out.push_back({kind, n, money, limit, ss.size(), lambda(kind, static_cast<std::int64_t>(n), money, limit)});
        }
  return out;
}

}  // namespace coinflow
