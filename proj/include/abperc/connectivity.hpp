#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "abperc/pointprocess.hpp"

namespace abperc {

/// One realization of the AB connectivity threshold on the unit square.
struct ThresholdSample {
  double n = 0.0;
  double tau = 0.0;
  std::size_t trial = 0;
  double rho = 0.0;        // +inf when |X| >= 2 and Y is empty
  double statistic = 0.0;  // n * pi * rho^2 / log n
  std::uint64_t seed = 0;
};

/// Exact smallest r with G1(X, Y, r) connected: a Kruskal sweep over A-B
/// pairs in increasing distance, restricted to pairs within a cap radius that
/// doubles until the X vertices merge. Returns 0 for |X| <= 1 and +inf when
/// |X| >= 2 and Y is empty.
double rho_threshold(const PointPattern& x, const PointPattern& y);

/// n * pi * rho^2 / log n. Requires n >= 2.
double lln_statistic(double n, double rho);

/// Limit of the normalized threshold in the unit square: max(1/tau, 1/4).
double lln_limit(double tau);

struct CellSummary {
  double n = 0.0;
  double tau = 0.0;
  std::size_t trials = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct LlnTable {
  std::vector<ThresholdSample> samples;  // ordered by (n, tau, trial)
  std::vector<CellSummary> summary;      // ordered by (n, tau)

  const CellSummary* cell(double n, double tau) const;
};

/// For each trial one pair of coupled samplers (A, B) on [0,1]^2 is shared by
/// every (n, tau) cell: X = first N(n) points of A, Y = first N'(tau n) of B.
LlnTable lln_sweep(const std::vector<double>& n_grid, const std::vector<double>& tau_grid,
                   std::size_t trials, std::uint64_t seed, int jobs = 0);

void write_samples_csv(std::ostream& out, const LlnTable& table);
void write_summary_csv(std::ostream& out, const LlnTable& table);

struct MinDegreeResult {
  double n = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  double radius = 0.0;
  std::size_t trials = 0;
  std::size_t zero_degree = 0;
  std::vector<std::uint8_t> per_trial;  // 1 when the minimum degree of G1 is 0
  std::optional<double> fraction;       // empty when trials == 0
};

/// Fraction of trials in which G1(n, tau, r_n) has minimum degree 0, with
/// r_n fixed by n * pi * r_n^2 / log n = alpha.
MinDegreeResult min_degree_diagnostic(double n, double tau, double alpha, std::size_t trials,
                                      std::uint64_t seed, int jobs = 0);

}  // namespace abperc
