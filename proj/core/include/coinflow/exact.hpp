#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "coinflow/model.hpp"
#include "coinflow/stats.hpp"

namespace coinflow {

using BigCount = mpz_class;
using Rational = mpq_class;

// Binomial with the convention C(-1,-1) = 1 and C(n,k) = 0 for n < k or
// k < 0 <= n. Remaining negative cases (n < -1 and k < 0 with n >= k, or
// n = -1 with k < -1 ...) are also 0.
BigCount binom_conv(std::int64_t n, std::int64_t k);

// Configurations of N agents with sum M and every balance >= -L_i:
// C(M + L_i N + N - 1, N - 1).
BigCount lambda_x(std::int64_t agents, std::int64_t money, std::int64_t limit);

// Configurations of N agents with sum M and total debt <= L_c:
//   sum_{a=0}^{L_c} sum_{b} C(N,b) C(a-1,b-1) C(M+a+N-b-1, N-b-1)
// with b restricted to 0..min(a, N). Valid for negative M as well.
BigCount lambda_y(std::int64_t agents, std::int64_t money, std::int64_t limit);
// Same sum with b over the full range 0..N; slow reference.
BigCount lambda_y_reference(std::int64_t agents, std::int64_t money, std::int64_t limit);

// Natural logs of the same counts (-inf for a zero count).
long double log_binom(std::int64_t n, std::int64_t k);
long double log_lambda_x(std::int64_t agents, std::int64_t money, std::int64_t limit);
long double log_lambda_y(std::int64_t agents, std::int64_t money, std::int64_t limit);

enum class PmfMode { exact, log };

std::string_view to_string(PmfMode mode) noexcept;
PmfMode parse_pmf_mode(std::string_view name);

// Single-agent stationary marginal on the full support window.
struct ExactPMF {
  ModelKind kind = ModelKind::individual;
  std::size_t agents = 0;
  Balance money = 0;
  Balance limit = 0;
  PmfMode mode = PmfMode::exact;
  SupportWindow window{0, -1};
  std::vector<Rational> exact_mass;  // exact mode
  std::vector<double> log_mass;      // log mode

  std::size_t size() const { return window.size(); }
  bool contains(Balance c) const { return window.contains(c); }
  // Zero (resp. -inf) outside the window.
  double prob(Balance c) const;
  double log_prob(Balance c) const;
  Rational exact(Balance c) const;

  DensePmf to_dense() const;
};

// Exact mode.
ExactPMF marginal_individual(std::size_t agents, Balance money, Balance limit);
ExactPMF marginal_collective(std::size_t agents, Balance money, Balance limit);

// Log mode, full support by positive-term recurrences in extended precision.
ExactPMF marginal_individual_log(std::size_t agents, Balance money, Balance limit);
ExactPMF marginal_collective_log(std::size_t agents, Balance money, Balance limit);

ExactPMF marginal(ModelKind kind, std::size_t agents, Balance money, Balance limit, PmfMode mode);

// Pointwise log mass at c from log-gamma binomials and a compensated
// log-sum-exp over the count's double sum; -inf outside the support.
double log_marginal(ModelKind kind, std::size_t agents, Balance money, Balance limit, Balance c);

// Rough count of limb operations for the exact path; marginal(..., exact)
// throws capacity when it exceeds kExactCostCap.
double exact_cost_estimate(ModelKind kind, std::size_t agents, Balance money, Balance limit);
inline constexpr double kExactCostCap = 2e8;

// `c,prob` (17 significant digits) or `c,log_prob`.
void write_pmf_csv(std::ostream& out, const ExactPMF& pmf, bool log_column = false);
// Accepts either header; log values are exponentiated.
DensePmf read_pmf_csv(std::istream& in);

}  // namespace coinflow
