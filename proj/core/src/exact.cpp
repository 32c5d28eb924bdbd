#include "coinflow/exact.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "coinflow/error.hpp"

namespace coinflow {

namespace {

constexpr long double kNegInf = -std::numeric_limits<long double>::infinity();

void require_agents(std::size_t agents) {
  if (agents < 2) raise(ErrorCode::invalid_size, "marginals need at least 2 agents");
}

// Neumaier-compensated log(sum exp(terms)).
long double log_sum_exp(const std::vector<long double>& terms) {
  long double top = kNegInf;
  for (long double t : terms) top = std::max(top, t);
  if (top == kNegInf) return kNegInf;
  long double sum = 0.0L, comp = 0.0L;
  for (long double t : terms) {
    const long double x = std::exp(t - top);
    const long double s = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - s) + x : (x - s) + sum;
    sum = s;
  }
  return top + std::log(sum + comp);
}

}  // namespace

BigCount binom_conv(std::int64_t n, std::int64_t k) {
  if (n == -1 && k == -1) return 1;
  if (k < 0 || n < k) return 0;
  const std::int64_t j = std::min(k, n - k);
  BigCount r = 1;
  for (std::int64_t i = 1; i <= j; ++i) {
    r *= static_cast<unsigned long>(n - j + i);
    mpz_divexact_ui(r.get_mpz_t(), r.get_mpz_t(), static_cast<unsigned long>(i));
  }
  return r;
}

BigCount lambda_x(std::int64_t agents, std::int64_t money, std::int64_t limit) {
  return binom_conv(money + limit * agents + agents - 1, agents - 1);
}

BigCount lambda_y(std::int64_t agents, std::int64_t money, std::int64_t limit) {
  BigCount total = 0;
  for (std::int64_t a = 0; a <= limit; ++a) {
    for (std::int64_t b = 0; b <= std::min(a, agents); ++b) {
      BigCount term = binom_conv(a - 1, b - 1);
      if (term == 0) continue;
      term *= binom_conv(money + a + agents - b - 1, agents - b - 1);
      if (term == 0) continue;
      term *= binom_conv(agents, b);
      total += term;
    }
  }
  return total;
}

BigCount lambda_y_reference(std::int64_t agents, std::int64_t money, std::int64_t limit) {
  BigCount total = 0;
  for (std::int64_t a = 0; a <= limit; ++a)
    for (std::int64_t b = 0; b <= agents; ++b)
      total += binom_conv(agents, b) * binom_conv(a - 1, b - 1) *
               binom_conv(money + a + agents - b - 1, agents - b - 1);
  return total;
}

long double log_binom(std::int64_t n, std::int64_t k) {
  if (n == -1 && k == -1) return 0.0L;
  if (k < 0 || n < k) return kNegInf;
  const auto ln = static_cast<long double>(n);
  const auto lk = static_cast<long double>(k);
  return std::lgamma(ln + 1) - std::lgamma(lk + 1) - std::lgamma(ln - lk + 1);
}

long double log_lambda_x(std::int64_t agents, std::int64_t money, std::int64_t limit) {
  return log_binom(money + limit * agents + agents - 1, agents - 1);
}

long double log_lambda_y(std::int64_t agents, std::int64_t money, std::int64_t limit) {
  std::vector<long double> terms;
  for (std::int64_t a = 0; a <= limit; ++a) {
    for (std::int64_t b = 0; b <= std::min(a, agents); ++b) {
      const long double debt = log_binom(a - 1, b - 1);
      if (debt == kNegInf) continue;
      const long double rest = log_binom(money + a + agents - b - 1, agents - b - 1);
      if (rest == kNegInf) continue;
      terms.push_back(log_binom(agents, b) + debt + rest);
    }
  }
  return log_sum_exp(terms);
}

std::string_view to_string(PmfMode mode) noexcept { return mode == PmfMode::exact ? "exact" : "log"; }

PmfMode parse_pmf_mode(std::string_view name) {
  if (name == "exact") return PmfMode::exact;
  if (name == "log") return PmfMode::log;
  raise(ErrorCode::parse_error, "unknown pmf mode '" + std::string(name) + "'");
}

double ExactPMF::prob(Balance c) const {
  if (!contains(c)) return 0.0;
  const auto i = static_cast<std::size_t>(c - window.lo);
  return mode == PmfMode::exact ? exact_mass[i].get_d() : std::exp(log_mass[i]);
}

double ExactPMF::log_prob(Balance c) const {
  if (!contains(c)) return -std::numeric_limits<double>::infinity();
  const auto i = static_cast<std::size_t>(c - window.lo);
  if (mode == PmfMode::log) return log_mass[i];
  const Rational& q = exact_mass[i];
  if (q == 0) return -std::numeric_limits<double>::infinity();
  // log via mpz_get_d_2exp keeps huge numerators and denominators in range.
  long num_exp = 0, den_exp = 0;
  const double num = mpz_get_d_2exp(&num_exp, q.get_num_mpz_t());
  const double den = mpz_get_d_2exp(&den_exp, q.get_den_mpz_t());
  return std::log(num) - std::log(den) + static_cast<double>(num_exp - den_exp) * std::log(2.0);
}

Rational ExactPMF::exact(Balance c) const {
  if (mode != PmfMode::exact) raise(ErrorCode::invalid_parameter, "pmf was computed in log mode");
  if (!contains(c)) return 0;
  return exact_mass[static_cast<std::size_t>(c - window.lo)];
}

DensePmf ExactPMF::to_dense() const {
  DensePmf d{window.lo, std::vector<double>(size())};
  for (std::size_t i = 0; i < size(); ++i)
    d.mass[i] = mode == PmfMode::exact ? exact_mass[i].get_d() : std::exp(log_mass[i]);
  return d;
}

namespace {

ExactPMF blank_pmf(ModelKind kind, std::size_t agents, Balance money, Balance limit, PmfMode mode) {
  require_agents(agents);
  ModelParams p{kind, money, limit};
  validate(p, agents);
  ExactPMF pmf;
  pmf.kind = kind;
  pmf.agents = agents;
  pmf.money = money;
  pmf.limit = limit;
  pmf.mode = mode;
  pmf.window = support(p, agents);
  return pmf;
}

}  // namespace

ExactPMF marginal_individual(std::size_t agents, Balance money, Balance limit) {
  ExactPMF pmf = blank_pmf(ModelKind::individual, agents, money, limit, PmfMode::exact);
  const auto n = static_cast<std::int64_t>(agents);
  const BigCount total = lambda_x(n, money, limit);
  pmf.exact_mass.reserve(pmf.size());
  for (Balance c = pmf.window.lo; c <= pmf.window.hi; ++c) {
    Rational q(lambda_x(n - 1, money - c, limit), total);
    q.canonicalize();
    pmf.exact_mass.push_back(std::move(q));
  }
  return pmf;
}

ExactPMF marginal_collective(std::size_t agents, Balance money, Balance limit) {
  ExactPMF pmf = blank_pmf(ModelKind::collective, agents, money, limit, PmfMode::exact);
  const auto n = static_cast<std::int64_t>(agents);
  const BigCount total = lambda_y(n, money, limit);
  pmf.exact_mass.reserve(pmf.size());
  for (Balance c = pmf.window.lo; c <= pmf.window.hi; ++c) {
    // An agent holding c < 0 uses up -c of the bank's stock.
    const Balance others_limit = c >= 0 ? limit : limit + c;
    Rational q(lambda_y(n - 1, money - c, others_limit), total);
    q.canonicalize();
    pmf.exact_mass.push_back(std::move(q));
  }
  return pmf;
}

ExactPMF marginal_individual_log(std::size_t agents, Balance money, Balance limit) {
  ExactPMF pmf = blank_pmf(ModelKind::individual, agents, money, limit, PmfMode::log);
  const auto n = static_cast<long double>(agents);
  const auto m = static_cast<long double>(money);
  const auto l = static_cast<long double>(limit);
  pmf.log_mass.resize(pmf.size());
  // mass(-L) = (N-1)/(M + LN + N - 1); mass(c+1)/mass(c) = 1 - (N-2)/n_c
  // with n_c = M - c + L(N-1) + N - 2.
  long double log_mass = std::log(n - 1) - std::log(m + l * n + n - 1);
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    pmf.log_mass[i] = static_cast<double>(log_mass);
    const long double c = static_cast<long double>(pmf.window.lo) + static_cast<long double>(i);
    const long double nc = m - c + l * (n - 1) + n - 2;
    if (agents > 2) log_mass += std::log1p(-(n - 2) / nc);
  }
  return pmf;
}

ExactPMF marginal_collective_log(std::size_t agents, Balance money, Balance limit) {
  ExactPMF pmf = blank_pmf(ModelKind::collective, agents, money, limit, PmfMode::log);
  using Real = long double;
  const std::int64_t others = static_cast<std::int64_t>(agents) - 1;
  const Balance M = money, L = limit;
  std::vector<Real> numerator(pmf.size(), 0.0L);
  const auto slot = [&](Balance c) { return static_cast<std::size_t>(c + L); };

  std::vector<Real> choose_others(static_cast<std::size_t>(others) + 1, 1.0L);
  for (std::int64_t b = 1; b <= others; ++b)
    choose_others[b] = choose_others[b - 1] * static_cast<Real>(others - b + 1) / static_cast<Real>(b);

  // Each b-slice of the count, b debtors among the others with k = N-2-b:
  //   S_b(m, l) = sum_{a<=l} C(a-1,b-1) C(m+a+k, k).
  const std::int64_t b_max = std::min<std::int64_t>(L, others - 1);

  // c >= 0: l = L fixed and m = M - c. Pascal's rule in k gives
  // S^(k)(m) = S^(k)(m-1) + S^(k-1)(m), so k running prefix sums of
  // S^(0)(m) = sum_{a >= max(0,-m)} C(a-1,b-1) produce S_b on m in [-L-1, M].
  {
    const std::size_t span = static_cast<std::size_t>(M + L + 2);
    std::vector<Real> weight(static_cast<std::size_t>(L) + 2, 0.0L);
    std::vector<Real> acc(span);
    for (std::int64_t b = 0; b <= b_max; ++b) {
      std::fill(weight.begin(), weight.end(), 0.0L);
      if (b == 0) {
        weight[0] = 1.0L;
      } else {
        weight[b] = 1.0L;
        for (std::int64_t a = b; a < L; ++a)
          weight[a + 1] = weight[a] * static_cast<Real>(a) / static_cast<Real>(a - b + 1);
      }
      for (std::int64_t a = L - 1; a >= 0; --a) weight[a] += weight[a + 1];  // suffix sums
      acc[0] = 0.0L;  // m = -L-1
      for (std::size_t p = 1; p < span; ++p) {
        const Balance m = static_cast<Balance>(p) - L - 1;
        acc[p] = weight[static_cast<std::size_t>(std::max<Balance>(0, -m))];
      }
      const std::int64_t k = others - b - 1;
      for (std::int64_t r = 0; r < k; ++r)
        for (std::size_t p = 1; p < span; ++p) acc[p] += acc[p - 1];
      for (Balance c = 0; c <= M + L; ++c)
        numerator[slot(c)] += choose_others[b] * acc[static_cast<std::size_t>(M - c + L + 1)];
    }
    // All others in debt: needs m = -a, contributing C(a-1, N-2).
    if (others <= L) {
      Real ways = 1.0L;  // C(a-1, others-1) at a = others
      for (std::int64_t a = others; a <= L; ++a) {
        if (a > others) ways = ways * static_cast<Real>(a - 1) / static_cast<Real>(a - others);
        numerator[slot(M + a)] += ways;
      }
    }
  }

  // c < 0: m = M - c and l = L + c with m + l = M + L fixed. Substituting
  // s = m + a, S_b(m) = sum_{s=m}^{M+L} C(s-m-1, b-1) C(s+k, k), and Pascal's
  // rule in b turns this into b strict suffix sums of C(m+k, k).
  if (L > 0) {
    const std::size_t span = static_cast<std::size_t>(L) + 1;  // m in [M+1, top+1]
    std::vector<Real> acc(span);
    for (std::int64_t b = 0; b <= b_max; ++b) {
      const std::int64_t k = others - b - 1;
      Real f = std::exp(log_binom(M + 1 + k, k));
      for (std::size_t q = 0; q + 1 < span; ++q) {
        acc[q] = f;
        const Balance s = M + 1 + static_cast<Balance>(q);
        f = f * static_cast<Real>(s + 1 + k) / static_cast<Real>(s + 1);
      }
      acc[span - 1] = 0.0L;
      for (std::int64_t r = 0; r < b; ++r) {
        Real running = 0.0L;
        for (std::size_t q = span; q-- > 0;) {
          const Real here = acc[q];
          acc[q] = running;
          running += here;
        }
      }
      for (Balance c = -L; c <= -1; ++c)
        numerator[slot(c)] += choose_others[b] * acc[static_cast<std::size_t>(-c - 1)];
    }
  }

  const Real log_total = log_lambda_y(static_cast<std::int64_t>(agents), M, L);
  pmf.log_mass.resize(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i)
    pmf.log_mass[i] = static_cast<double>(numerator[i] > 0 ? std::log(numerator[i]) - log_total : kNegInf);
  return pmf;
}

double exact_cost_estimate(ModelKind kind, std::size_t agents, Balance money, Balance limit) {
  const ModelParams p{kind, money, limit};
  const auto window = support(p, agents);
  const double n = static_cast<double>(agents);
  const double points = static_cast<double>(window.size());
  if (kind == ModelKind::individual) {
    const double limbs = 1.0 + static_cast<double>(log_lambda_x(static_cast<std::int64_t>(agents), money, limit)) / (64.0 * std::log(2.0));
    return points * n * limbs;
  }
  const double l = static_cast<double>(limit);
  const double pairs = (l + 1.0) * (std::min(l, n) + 1.0);
  const double limbs = 1.0 + static_cast<double>(log_lambda_y(static_cast<std::int64_t>(agents), money, std::min<Balance>(limit, 64))) / (64.0 * std::log(2.0));
  return points * pairs * n * limbs;
}

ExactPMF marginal(ModelKind kind, std::size_t agents, Balance money, Balance limit, PmfMode mode) {
  if (mode == PmfMode::log)
    return kind == ModelKind::individual ? marginal_individual_log(agents, money, limit)
                                         : marginal_collective_log(agents, money, limit);
  require_agents(agents);
  validate({kind, money, limit}, agents);
  const double cost = exact_cost_estimate(kind, agents, money, limit);
  if (cost > kExactCostCap) {
    std::ostringstream msg;
    msg << "exact mode would need ~" << std::setprecision(3) << cost
        << " big-integer limb operations (cap " << kExactCostCap << "); use log mode";
    raise(ErrorCode::capacity, msg.str());
  }
  return kind == ModelKind::individual ? marginal_individual(agents, money, limit)
                                       : marginal_collective(agents, money, limit);
}

double log_marginal(ModelKind kind, std::size_t agents, Balance money, Balance limit, Balance c) {
  require_agents(agents);
  const ModelParams p{kind, money, limit};
  validate(p, agents);
  if (!support(p, agents).contains(c)) return -std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::int64_t>(agents);
  if (kind == ModelKind::individual)
    return static_cast<double>(log_lambda_x(n - 1, money - c, limit) - log_lambda_x(n, money, limit));
  const Balance others_limit = c >= 0 ? limit : limit + c;
  return static_cast<double>(log_lambda_y(n - 1, money - c, others_limit) - log_lambda_y(n, money, limit));
}

void write_pmf_csv(std::ostream& out, const ExactPMF& pmf, bool log_column) {
  out << (log_column ? "c,log_prob\n" : "c,prob\n");
  out << std::setprecision(17);
  for (Balance c = pmf.window.lo; c <= pmf.window.hi; ++c)
    out << c << ',' << (log_column ? pmf.log_prob(c) : pmf.prob(c)) << '\n';
}

DensePmf read_pmf_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) raise(ErrorCode::parse_error, "empty pmf csv");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool log_values = false;
  if (line == "c,log_prob") {
    log_values = true;
  } else if (line != "c,prob") {
    raise(ErrorCode::parse_error, "pmf csv header must be 'c,prob' or 'c,log_prob'");
  }
  DensePmf pmf;
  bool first = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    long long c = 0;
    char comma = 0;
    std::string value;
    if (!(row >> c >> comma) || comma != ',' || !(row >> value))
      raise(ErrorCode::parse_error, "malformed pmf row at line " + std::to_string(line_no));
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size() && value.substr(used) != "\r") throw std::invalid_argument(value);
    } catch (const std::exception&) {
      if (value == "-inf") v = -std::numeric_limits<double>::infinity();
      else raise(ErrorCode::parse_error, "bad number at line " + std::to_string(line_no));
    }
    if (first) {
      pmf.lo = c;
      first = false;
    } else if (c != pmf.hi() + 1) {
      raise(ErrorCode::parse_error, "pmf rows must cover consecutive c values (line " +
                                        std::to_string(line_no) + ")");
    }
    pmf.mass.push_back(log_values ? std::exp(v) : v);
  }
  if (first) raise(ErrorCode::parse_error, "pmf csv has no rows");
  return pmf;
}

}  // namespace coinflow
