#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "abperc/pointprocess.hpp"

namespace abperc {

enum class GraphKind { one_type, ab };

/// Binomial proportion with a Wilson score interval.
struct ProbabilityEstimate {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

ProbabilityEstimate wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

/// One seeded realization of the coupled pair (P, Q) on the box [0, L)^d,
/// evaluated for crossings at arbitrary intensities. Indicators are monotone
/// in each intensity because patterns are nested prefixes; the trial caches
/// the smallest intensity seen crossing and the largest seen not crossing,
/// answers from that cache when it can, and throws std::logic_error if a
/// fresh evaluation ever contradicts it.
class CrossingTrial {
 public:
  CrossingTrial(double side, int dim, double r, std::uint64_t seed);
  ~CrossingTrial();
  CrossingTrial(CrossingTrial&&) noexcept;
  CrossingTrial& operator=(CrossingTrial&&) noexcept;

  /// Crossing of G(P_lambda, 2r): a component with a point within r of both
  /// faces normal to the first axis.
  bool one_type(double lambda);
  /// Crossing of G(P_lambda, Q_mu, r) (either type may touch the faces,
  /// within r). Nested in mu for a fixed lambda.
  bool ab(double lambda, double mu);

  /// Number of fresh (uncached) evaluations so far.
  std::size_t evaluations() const { return evaluations_; }

 private:
  struct AbState;
  struct MonotoneCache {
    double known_true = std::numeric_limits<double>::infinity();
    double known_false = -1.0;
  };

  bool ab_uncached(double mu);

  double side_;
  int dim_;
  double r_;
  CoupledSampler a_;
  CoupledSampler b_;
  MonotoneCache lambda_cache_;
  double ab_lambda_ = -1.0;
  MonotoneCache mu_cache_;
  std::unique_ptr<AbState> ab_state_;
  std::size_t evaluations_ = 0;
};

/// Fraction of `trials` seeded boxes of side L in which the graph crosses.
/// one_type uses G(P_lambda, 2r); ab uses G(P_lambda, Q_mu, r).
ProbabilityEstimate crossing_probability(GraphKind kind, double lambda, double mu, double r,
                                         double side, std::size_t trials, std::uint64_t seed,
                                         int jobs = 0, int dim = 2);

struct ProbeRecord {
  double value = 0.0;
  ProbabilityEstimate probability;
};

struct CriticalEstimate {
  std::string parameter;  // "lambda" or "mu"
  bool percolation_detected = true;
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
  double side = 0.0;
  std::size_t trials = 0;
  double target = 0.5;
  double r = 0.0;
  double companion = 0.0;  // lambda when estimating mu
  double tol = 0.0;
  std::uint64_t seed = 0;
  int dim = 2;
  std::vector<ProbeRecord> probes;
};

struct LambdaSearch {
  double low = 0.05;  // scaled by r^-d
  double high = 1.0;  // scaled by r^-d
  double target = 0.5;
  int dim = 2;
  int jobs = 0;
};

/// Pseudo-critical lambda of G(P_lambda, 2r) in a box of side L: bisection on
/// the crossing probability until the bracket straddling `target` is no wider
/// than tol. The same trial seeds are used at every probe.
CriticalEstimate estimate_lambda_c(double r, double side, std::size_t trials, double tol,
                                   std::uint64_t seed, const LambdaSearch& search = {});

struct MuSearch {
  double mu_start = 1.0;
  double mu_max = 1e6;
  double target = 0.5;
  int dim = 2;
  int jobs = 0;
};

/// Pseudo-critical mu of G(P_lambda, Q_mu, r): doubling from mu_start until
/// the crossing probability reaches `target` (capped at mu_max), then
/// bisection to width tol. If mu_max itself stays below target, the result
/// has percolation_detected = false and estimate = +inf.
CriticalEstimate estimate_mu_c(double r, double lambda, double side, std::size_t trials,
                               double tol, std::uint64_t seed, const MuSearch& search = {});

/// `value,trials,successes,probability,ci_low,ci_high`
void write_probe_csv(std::ostream& out, const CriticalEstimate& est);

}  // namespace abperc
