#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace abperc {

/// Volume of the unit-radius ball in d dimensions.
double unit_ball_volume(int d);

/// Parameters of the explicit upper bound on the critical B-intensity.
/// lambda_c is supplied by the caller (simulation estimate or literature).
struct BoundInputs {
  int d = 2;
  double r = 1.0;
  double lambda = 0.0;
  double lambda_c = 0.0;
  std::vector<double> alphas;  // empty -> default_alpha_grid()

  double delta() const { return lambda - lambda_c; }
};

/// 64 log-spaced points from 0.01 to 0.99.
std::vector<double> default_alpha_grid(std::size_t points = 64, double lo = 0.01,
                                       double hi = 0.99);

/// Reduced radius s = r (1 + alpha delta / lambda_c)^(-1/d), chosen so that
/// lambda_c(2s) = lambda_c + alpha delta by scaling.
double s_of_alpha(double r, double delta, double lambda_c, double alpha, int d);

/// Lattice spacing (r - s) / (2 sqrt d): cubes of this side have diameter
/// at most t - s with t = (r + s) / 2.
double epsilon_of_alpha(double r, double delta, double lambda_c, double alpha, int d);

/// Probability that a cube of side epsilon holds a point of intensity a.
double p_occupy(double a, double epsilon, int d);

/// Number of nonzero points of epsilon Z^d with norm at most t. Throws
/// ResourceError when ceil(t / epsilon) exceeds `axis_guard`.
std::uint64_t delta_count(double t, double epsilon, int d, std::uint64_t axis_guard = 10'000);

/// q = 1 - (1 - (p_nu / p_lambda)^(1/Delta))^Delta.
double q_coupling(double p_nu, double p_lambda, std::uint64_t delta_sites);

/// Bound with the exact lattice-ball count Delta (nu = lambda_c + alpha delta).
double mu_bound_exact_delta(const BoundInputs& in, double alpha);
/// Bound with epsilon^d Delta relaxed to pi_d r^d.
double mu_bound_relaxed(const BoundInputs& in, double alpha);

/// (4 lambda_c^2 / r)^d d^(3d) (d + 1) pi_d: limsup of mu_c delta^(2d) / |log delta|.
double asymptotic_constant(double r, double lambda_c, int d);

struct BoundRow {
  double alpha = 0.0;
  double s = 0.0;
  double t = 0.0;
  double epsilon = 0.0;
  double nu = 0.0;
  double p_nu = 0.0;
  double p_lambda = 0.0;
  double ratio_power = 0.0;  // (p_nu / p_lambda)^((epsilon / r)^d / pi_d)
  double mu_relaxed = 0.0;
  bool exact_available = false;  // false when the Delta enumeration guard trips
  std::uint64_t delta_sites = 0;
  double q = 0.0;
  double mu_exact_delta = 0.0;
};

struct BoundReport {
  BoundInputs inputs;
  std::vector<BoundRow> rows;
  std::size_t best_relaxed = 0;  // index of the grid minimum of mu_relaxed
  std::size_t best_exact = 0;    // index of the minimum over rows with exact_available
  bool any_exact = false;
  double mu_hat = 0.0;           // min over the grid of mu_relaxed
  double mu_hat_exact = 0.0;     // min over the grid of mu_exact_delta
  double asymptotic = 0.0;
};

/// Evaluates every alpha of the grid and takes the minimum.
BoundReport mu_bound_optimized(const BoundInputs& in, std::uint64_t axis_guard = 10'000);

void write_bound_csv(std::ostream& out, const BoundReport& report);

}  // namespace abperc
