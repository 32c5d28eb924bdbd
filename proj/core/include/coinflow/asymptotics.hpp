#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coinflow/model.hpp"
#include "coinflow/stats.hpp"

namespace coinflow {

// (1/(T+L)) exp(-(c+L)/(T+L)) for c >= -L, else 0.
double shifted_exp_density(double c, double temperature, double limit);

struct LaplaceParams {
  double K = 0;
  double a = 0;  // decay for c >= 0
  double b = 0;  // decay for c <= 0
  double T = 0;
  double rho = 0;
};

// Throws invalid_parameter for T <= 0 or rho < 0, degenerate_parameter for rho = 0.
LaplaceParams laplace_params(double temperature, double rho);

// K e^{-a c} for c >= 0, K e^{b c} for c <= 0.
double laplace_density(double c, const LaplaceParams& p);

struct MomentResiduals {
  double r1 = 0;  // K/a + K/b - 1
  double r2 = 0;  // K/a^2 - K/b^2 - T
};
MomentResiduals moment_residuals(const LaplaceParams& p);

struct FitWindow {
  Balance lo = 0;
  Balance hi = -1;
};

struct LaplaceFit {
  double a_hat = 0;
  double b_hat = 0;
  double K_hat = 0;
  FitWindow window;
  std::size_t points_right = 0;  // c >= 0
  std::size_t points_left = 0;   // c <= 0
};

// Largest contiguous range around the mode where mass > factor * reference.
FitWindow default_fit_window(const DensePmf& pmf, double reference, double factor = 1e-4);

// Least squares of log mass against c on each side of 0 within the window.
// K_hat is the mean of the two intercepts' exponentials. Throws
// insufficient_data for fewer than 3 positive points on either side.
LaplaceFit fit_laplace_slopes(const DensePmf& pmf, const FitWindow& window);
LaplaceFit fit_laplace_slopes(const Histogram& hist, const FitWindow& window);

// f_Y evaluated at the integers of [lo, hi], renormalized to sum 1.
DensePmf discretized_laplace(const LaplaceParams& p, Balance lo, Balance hi);
// Same for f_X on [lo, hi].
DensePmf discretized_shifted_exp(double temperature, Balance limit, Balance lo, Balance hi);

struct Grid {
  double lo = 0;
  double hi = 0;
  double step = 1;
  // Throws invalid_parameter for lo > hi or step <= 0.
  std::vector<double> points() const;
};
// "lo:hi:step"
Grid parse_grid(const std::string& text);

void write_density_csv(std::ostream& out, const std::vector<double>& cs, const std::vector<double>& density);

}  // namespace coinflow
