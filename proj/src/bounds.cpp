#include "abperc/bounds.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>

#include "abperc/csv.hpp"
#include "abperc/errors.hpp"

namespace abperc {

namespace {

void check_pipeline(double r, double delta, double lambda_c, double alpha, int d) {
  if (d < 1) throw ParameterError("dimension must be >= 1");
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  if (!(lambda_c > 0.0)) throw ParameterError("lambda_c must be positive");
  if (!(delta > 0.0)) throw ParameterError("lambda must exceed lambda_c");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
}

void check_inputs(const BoundInputs& in) {
  if (in.d < 2) throw ParameterError("bound needs d >= 2");
  check_pipeline(in.r, in.delta(), in.lambda_c, 0.5, in.d);
}

// log(p_nu / p_lambda) with nu = lambda_c + alpha delta; negative.
double log_occupancy_ratio(const BoundInputs& in, double alpha, double eps) {
  const double nu = in.lambda_c + alpha * in.delta();
  return std::log(p_occupy(nu, eps, in.d)) - std::log(p_occupy(in.lambda, eps, in.d));
}

}  // namespace

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

std::vector<double> default_alpha_grid(std::size_t points, double lo, double hi) {
  if (points == 0) return {};
  if (!(lo > 0.0 && hi < 1.0 && lo <= hi)) throw ParameterError("alpha grid must lie in (0, 1)");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

double s_of_alpha(double r, double delta, double lambda_c, double alpha, int d) {
  check_pipeline(r, delta, lambda_c, alpha, d);
  return r * std::pow(1.0 + alpha * delta / lambda_c, -1.0 / d);
}

double epsilon_of_alpha(double r, double delta, double lambda_c, double alpha, int d) {
  check_pipeline(r, delta, lambda_c, alpha, d);
  // r - s written as -r expm1(-log1p(x)/d) to survive tiny alpha * delta
  const double r_minus_s = -r * std::expm1(-std::log1p(alpha * delta / lambda_c) / d);
  return r_minus_s / (2.0 * std::sqrt(static_cast<double>(d)));
}

double p_occupy(double a, double epsilon, int d) {
  if (!(a >= 0.0)) throw ParameterError("intensity must be nonnegative");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  return -std::expm1(-std::pow(epsilon, d) * a);
}

std::uint64_t delta_count(double t, double epsilon, int d, std::uint64_t axis_guard) {
  if (!(t > 0.0) || !(epsilon > 0.0)) throw ParameterError("t and epsilon must be positive");
  if (d < 1) throw ParameterError("dimension must be >= 1");
  const double reach = std::ceil(t / epsilon);
  if (reach > static_cast<double>(axis_guard))
    throw ResourceError("lattice ball enumeration exceeds the per-axis guard");
  const auto R = static_cast<long long>(reach);
  auto inside = [&](long long k2) { return epsilon * std::sqrt(static_cast<double>(k2)) <= t; };

  // Enumerate the first d-1 coordinates; count the last one in closed form.
  std::function<std::uint64_t(int, long long)> count = [&](int axis, long long k2) -> std::uint64_t {
    if (!inside(k2)) return 0;
    if (axis == d - 1) {
      long long m = static_cast<long long>(std::sqrt(std::max(0.0, static_cast<double>(R * R - k2))));
      while (m > 0 && !inside(k2 + m * m)) --m;
      while (inside(k2 + (m + 1) * (m + 1))) ++m;
      return static_cast<std::uint64_t>(2 * m + 1);
    }
    std::uint64_t total = 0;
    for (long long k = -R; k <= R; ++k) total += count(axis + 1, k2 + k * k);
    return total;
  };
  return count(0, 0) - 1;  // drop the origin
}

double q_coupling(double p_nu, double p_lambda, std::uint64_t delta_sites) {
  if (!(p_nu >= 0.0) || !(p_lambda <= 1.0)) throw ParameterError("probabilities must lie in [0, 1]");
  if (p_nu > p_lambda) throw ParameterError("q_coupling needs p_nu <= p_lambda");
  if (delta_sites < 1) throw ParameterError("Delta must be >= 1");
  if (p_nu == 0.0) return 0.0;
  const double n = static_cast<double>(delta_sites);
  const double log_ratio = std::log(p_nu) - std::log(p_lambda);
  const double one_minus_u = -std::expm1(log_ratio / n);  // 1 - (p_nu/p_lambda)^(1/Delta)
  if (one_minus_u == 0.0) return 1.0;
  return -std::expm1(n * std::log(one_minus_u));
}

double mu_bound_exact_delta(const BoundInputs& in, double alpha) {
  check_inputs(in);
  const double delta = in.delta();
  const double eps = epsilon_of_alpha(in.r, delta, in.lambda_c, alpha, in.d);
  const double s = s_of_alpha(in.r, delta, in.lambda_c, alpha, in.d);
  const double t = 0.5 * (in.r + s);
  const auto sites = static_cast<double>(delta_count(t, eps, in.d));
  const double one_minus = -std::expm1(log_occupancy_ratio(in, alpha, eps) / sites);
  return std::pow(eps, -in.d) * sites * -std::log(one_minus);
}

double mu_bound_relaxed(const BoundInputs& in, double alpha) {
  check_inputs(in);
  const double eps = epsilon_of_alpha(in.r, in.delta(), in.lambda_c, alpha, in.d);
  const double ball = unit_ball_volume(in.d);
  const double exponent = std::pow(eps / in.r, in.d) / ball;
  const double one_minus = -std::expm1(exponent * log_occupancy_ratio(in, alpha, eps));
  return std::pow(eps, -2 * in.d) * ball * std::pow(in.r, in.d) * -std::log(one_minus);
}

double asymptotic_constant(double r, double lambda_c, int d) {
  if (!(r > 0.0) || !(lambda_c > 0.0)) throw ParameterError("r and lambda_c must be positive");
  if (d < 1) throw ParameterError("dimension must be >= 1");
  return std::pow(4.0 * lambda_c * lambda_c / r, d) * std::pow(d, 3.0 * d) * (d + 1) *
         unit_ball_volume(d);
}

BoundReport mu_bound_optimized(const BoundInputs& in, std::uint64_t axis_guard) {
  check_inputs(in);
  BoundReport rep;
  rep.inputs = in;
  if (rep.inputs.alphas.empty()) rep.inputs.alphas = default_alpha_grid();
  const double delta = in.delta();
  const double ball = unit_ball_volume(in.d);
  rep.mu_hat = std::numeric_limits<double>::infinity();
  rep.mu_hat_exact = std::numeric_limits<double>::infinity();

  for (double alpha : rep.inputs.alphas) {
    BoundRow row;
    row.alpha = alpha;
    row.s = s_of_alpha(in.r, delta, in.lambda_c, alpha, in.d);
    row.t = 0.5 * (in.r + row.s);
    row.epsilon = epsilon_of_alpha(in.r, delta, in.lambda_c, alpha, in.d);
    row.nu = in.lambda_c + alpha * delta;
    row.p_nu = p_occupy(row.nu, row.epsilon, in.d);
    row.p_lambda = p_occupy(in.lambda, row.epsilon, in.d);
    const double exponent = std::pow(row.epsilon / in.r, in.d) / ball;
    row.ratio_power = std::exp(exponent * log_occupancy_ratio(in, alpha, row.epsilon));
    row.mu_relaxed = mu_bound_relaxed(in, alpha);
    try {
      row.delta_sites = delta_count(row.t, row.epsilon, in.d, axis_guard);
      row.q = q_coupling(row.p_nu, row.p_lambda, row.delta_sites);
      row.mu_exact_delta = mu_bound_exact_delta(in, alpha);
      row.exact_available = true;
    } catch (const ResourceError&) {
      row.mu_exact_delta = std::numeric_limits<double>::quiet_NaN();
      row.q = std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t idx = rep.rows.size();
    if (row.mu_relaxed < rep.mu_hat) {
      rep.mu_hat = row.mu_relaxed;
      rep.best_relaxed = idx;
    }
    if (row.exact_available && row.mu_exact_delta < rep.mu_hat_exact) {
      rep.mu_hat_exact = row.mu_exact_delta;
      rep.best_exact = idx;
      rep.any_exact = true;
    }
    rep.rows.push_back(row);
  }
  rep.asymptotic = asymptotic_constant(in.r, in.lambda_c, in.d);
  return rep;
}

void write_bound_csv(std::ostream& out, const BoundReport& report) {
  out << "alpha,s,t,epsilon,nu,p_nu,p_lambda,ratio_power,mu_relaxed,delta_sites,q,mu_exact_delta\n";
  for (const auto& r : report.rows) {
    out << format_real(r.alpha) << ',' << format_real(r.s) << ',' << format_real(r.t) << ','
        << format_real(r.epsilon) << ',' << format_real(r.nu) << ',' << format_real(r.p_nu) << ','
        << format_real(r.p_lambda) << ',' << format_real(r.ratio_power) << ','
        << format_real(r.mu_relaxed) << ',';
    if (r.exact_available)
      out << r.delta_sites << ',' << format_real(r.q) << ',' << format_real(r.mu_exact_delta);
    else
      out << ",,";
    out << '\n';
  }
}

}  // namespace abperc
