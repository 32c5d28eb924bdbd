#include "coinflow/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "coinflow/error.hpp"

namespace coinflow {

double shifted_exp_density(double c, double temperature, double limit) {
  if (!(temperature > 0) || limit < 0) raise(ErrorCode::invalid_parameter, "need T > 0 and L >= 0");
  if (c < -limit) return 0.0;
  const double scale = temperature + limit;
  return std::exp(-(c + limit) / scale) / scale;
}

LaplaceParams laplace_params(double temperature, double rho) {
  if (!(temperature > 0)) raise(ErrorCode::invalid_parameter, "laplace needs T > 0");
  if (rho < 0 || std::isnan(rho)) raise(ErrorCode::invalid_parameter, "laplace needs rho > 0");
  if (rho == 0) raise(ErrorCode::degenerate_parameter, "rho = 0 makes the left decay rate diverge");
  const double s = std::sqrt(rho), s1 = std::sqrt(1 + rho);
  LaplaceParams p;
  p.T = temperature;
  p.rho = rho;
  p.K = (s1 - s) * (s1 - s) / temperature;
  p.a = (1 - s / s1) / temperature;
  p.b = (s1 / s - 1) / temperature;
  return p;
}

double laplace_density(double c, const LaplaceParams& p) {
  return c >= 0 ? p.K * std::exp(-p.a * c) : p.K * std::exp(p.b * c);
}

MomentResiduals moment_residuals(const LaplaceParams& p) {
  return {p.K / p.a + p.K / p.b - 1, p.K / (p.a * p.a) - p.K / (p.b * p.b) - p.T};
}

FitWindow default_fit_window(const DensePmf& pmf, double reference, double factor) {
  if (pmf.mass.empty()) return {};
  const auto peak = static_cast<std::size_t>(
      std::max_element(pmf.mass.begin(), pmf.mass.end()) - pmf.mass.begin());
  const double floor = factor * reference;
  if (!(pmf.mass[peak] > floor)) return {};
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && pmf.mass[lo - 1] > floor) --lo;
  while (hi + 1 < pmf.mass.size() && pmf.mass[hi + 1] > floor) ++hi;
  return {pmf.lo + static_cast<Balance>(lo), pmf.lo + static_cast<Balance>(hi)};
}

namespace {

struct Line {
  double slope = 0;
  double intercept = 0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

LaplaceFit fit_laplace_slopes(const DensePmf& pmf, const FitWindow& window) {
  std::vector<double> xr, yr, xl, yl;
  for (Balance c = window.lo; c <= window.hi; ++c) {
    const double m = pmf.at(c);
    if (!(m > 0)) raise(ErrorCode::insufficient_data, "pmf not positive at c=" + std::to_string(c));
    const double x = static_cast<double>(c);
    if (c >= 0) {
      xr.push_back(x);
      yr.push_back(std::log(m));
    }
    if (c <= 0) {
      xl.push_back(x);
      yl.push_back(std::log(m));
    }
  }
  if (xr.size() < 3 || xl.size() < 3)
    raise(ErrorCode::insufficient_data, "slope fit needs at least 3 points on each side of 0");
  const Line right = least_squares(xr, yr);
  const Line left = least_squares(xl, yl);
  LaplaceFit fit;
  fit.a_hat = -right.slope;
  fit.b_hat = left.slope;
  fit.K_hat = 0.5 * (std::exp(right.intercept) + std::exp(left.intercept));
  fit.window = window;
  fit.points_right = xr.size();
  fit.points_left = xl.size();
  return fit;
}

LaplaceFit fit_laplace_slopes(const Histogram& hist, const FitWindow& window) {
  return fit_laplace_slopes(hist.normalized(), window);
}

namespace {

template <class F>
DensePmf discretize(Balance lo, Balance hi, F density) {
  if (lo > hi) raise(ErrorCode::invalid_parameter, "empty discretization range");
  DensePmf d{lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1))};
  double sum = 0;
  for (std::size_t i = 0; i < d.mass.size(); ++i) {
    d.mass[i] = density(static_cast<double>(lo + static_cast<Balance>(i)));
    sum += d.mass[i];
  }
  for (double& m : d.mass) m /= sum;
  return d;
}

}  // namespace

DensePmf discretized_laplace(const LaplaceParams& p, Balance lo, Balance hi) {
  return discretize(lo, hi, [&](double c) { return laplace_density(c, p); });
}

DensePmf discretized_shifted_exp(double temperature, Balance limit, Balance lo, Balance hi) {
  const auto l = static_cast<double>(limit);
  return discretize(lo, hi, [&](double c) { return shifted_exp_density(c, temperature, l); });
}

std::vector<double> Grid::points() const {
  if (!(step > 0)) raise(ErrorCode::invalid_parameter, "grid step must be positive");
  if (lo > hi) raise(ErrorCode::invalid_parameter, "grid lo must not exceed hi");
  const double span = (hi - lo) / step;
  if (span > 1e8) raise(ErrorCode::invalid_parameter, "grid has too many points");
  const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

Grid parse_grid(const std::string& text) {
  Grid g;
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    raise(ErrorCode::parse_error, "grid must look like lo:hi:step, got '" + text + "'");
  g.points();
  return g;
}

void write_density_csv(std::ostream& out, const std::vector<double>& cs, const std::vector<double>& density) {
  out << "c,density\n" << std::setprecision(17);
  for (std::size_t i = 0; i < cs.size(); ++i) out << cs[i] << ',' << density[i] << '\n';
}

}  // namespace coinflow
