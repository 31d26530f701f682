#include "abperc/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <tuple>

#include "abperc/bounds.hpp"
#include "abperc/csv.hpp"
#include "abperc/errors.hpp"
#include "abperc/geomgraph.hpp"
#include "abperc/parallel.hpp"
#include "abperc/rng.hpp"

namespace abperc {

namespace {

struct PairDistance {
  double d2;
  std::uint32_t a;
  std::uint32_t b;
};

// Kruskal over the pairs within `cap`; nullopt if X is still split.
std::optional<double> kruskal_within(const PointPattern& x, const PointPattern& y, double cap,
                                     bool all_pairs) {
  const std::size_t nx = x.size();
  std::vector<PairDistance> pairs;
  if (all_pairs) {
    pairs.reserve(nx * y.size());
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < y.size(); ++j)
        pairs.push_back({x.region().dist2(x.point(i), y.point(j)), static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(j)});
  } else {
    const NeighborGrid grid(y, cap);
    for (std::size_t i = 0; i < nx; ++i)
      grid.for_each_within(x.point(i), [&](std::size_t j, double d2) {
        pairs.push_back({d2, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      });
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairDistance& p, const PairDistance& q) {
    return std::tie(p.d2, p.a, p.b) < std::tie(q.d2, q.a, q.b);
  });

  DisjointSets sets(nx + y.size());
  std::vector<std::uint8_t> holds_x(nx + y.size(), 0);
  std::fill(holds_x.begin(), holds_x.begin() + static_cast<std::ptrdiff_t>(nx), 1);
  std::size_t x_groups = nx;
  for (const auto& p : pairs) {
    const std::size_t ra = sets.find(p.a);
    const std::size_t rb = sets.find(nx + p.b);
    if (ra == rb) continue;
    const bool both = holds_x[ra] && holds_x[rb];
    const std::uint8_t merged = holds_x[ra] | holds_x[rb];
    sets.unite(ra, rb);
    holds_x[sets.find(ra)] = merged;
    if (both && --x_groups == 1) return std::sqrt(p.d2);
  }
  return std::nullopt;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  if (w == 0.0) return v[lo];
  return v[lo] + w * (v[hi] - v[lo]);
}

}  // namespace

double rho_threshold(const PointPattern& x, const PointPattern& y) {
  if (!(x.region() == y.region())) throw ParameterError("patterns live in different regions");
  if (x.size() <= 1) return 0.0;
  if (y.empty()) return std::numeric_limits<double>::infinity();

  const Region& region = x.region();
  const double diameter = region.diameter();
  // start near the larger of the two isolation scales (no B neighbour / no
  // A neighbour within 2r) and widen by sqrt 2 per round
  const double nx = static_cast<double>(x.size());
  const double log_nx = std::log(nx + 1.0);
  const double ball = unit_ball_volume(region.dim);
  const double cap_b = region.volume() * log_nx / (ball * static_cast<double>(y.size()));
  const double cap_a = region.volume() * log_nx / (ball * std::pow(2.0, region.dim) * nx);
  double cap = std::pow(std::max(cap_a, cap_b), 1.0 / region.dim);
  for (;;) {
    const bool all = cap >= diameter;
    if (auto r = kruskal_within(x, y, cap, all)) return *r;
    if (all) break;
    cap *= std::sqrt(2.0);
  }
  // every X is adjacent to every Y once all pairs are in, so this is unreachable
  return std::numeric_limits<double>::infinity();
}

double lln_statistic(double n, double rho) {
  if (!(n >= 2.0)) throw DomainError("lln statistic needs n >= 2");
  if (std::isinf(rho)) return rho;
  return n * std::numbers::pi * rho * rho / std::log(n);
}

double lln_limit(double tau) {
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  return std::max(1.0 / tau, 0.25);
}

const CellSummary* LlnTable::cell(double n, double tau) const {
  for (const auto& c : summary)
    if (c.n == n && c.tau == tau) return &c;
  return nullptr;
}

LlnTable lln_sweep(const std::vector<double>& n_grid, const std::vector<double>& tau_grid,
                   std::size_t trials, std::uint64_t seed, int jobs) {
  for (double n : n_grid)
    if (!(n >= 2.0)) throw DomainError("lln sweep needs every n >= 2");
  for (double tau : tau_grid)
    if (!(tau > 0.0)) throw ParameterError("tau must be positive");

  const std::size_t cells = n_grid.size() * tau_grid.size();
  // per_trial[t][c] for cell c = in * |tau| + it
  std::vector<std::vector<ThresholdSample>> per_trial(trials);
  const Region unit = Region::box(1.0, 2);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(seed, {t});
    CoupledSampler a(unit, trial_seed, Stream::A);
    CoupledSampler b(unit, trial_seed, Stream::B);
    auto& row = per_trial[t];
    row.reserve(cells);
    for (double n : n_grid) {
      const PointPattern x = coupled_prefix(a, n);
      for (double tau : tau_grid) {
        const PointPattern y = coupled_prefix(b, tau * n);
        const double rho = rho_threshold(x, y);
        row.push_back({n, tau, t, rho, lln_statistic(n, rho), trial_seed});
      }
    }
  });

  LlnTable table;
  table.samples.reserve(cells * trials);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> stats;
    for (std::size_t t = 0; t < trials; ++t) {
      table.samples.push_back(per_trial[t][c]);
      stats.push_back(per_trial[t][c].statistic);
    }
    if (trials == 0) continue;
    const double n = n_grid[c / tau_grid.size()];
    const double tau = tau_grid[c % tau_grid.size()];
    table.summary.push_back(
        {n, tau, trials, quantile(stats, 0.5), quantile(stats, 0.25), quantile(stats, 0.75)});
  }
  return table;
}

void write_samples_csv(std::ostream& out, const LlnTable& table) {
  out << "n,tau,trial,rho,statistic\n";
  for (const auto& s : table.samples)
    out << format_real(s.n) << ',' << format_real(s.tau) << ',' << s.trial << ','
        << format_real(s.rho) << ',' << format_real(s.statistic) << '\n';
}

void write_summary_csv(std::ostream& out, const LlnTable& table) {
  out << "n,tau,trials,median,q1,q3,iqr,limit\n";
  for (const auto& c : table.summary)
    out << format_real(c.n) << ',' << format_real(c.tau) << ',' << c.trials << ','
        << format_real(c.median) << ',' << format_real(c.q1) << ',' << format_real(c.q3) << ','
        << format_real(c.q3 - c.q1) << ',' << format_real(lln_limit(c.tau)) << '\n';
}

MinDegreeResult min_degree_diagnostic(double n, double tau, double alpha, std::size_t trials,
                                      std::uint64_t seed, int jobs) {
  if (!(n >= 2.0)) throw DomainError("minimum-degree diagnostic needs n >= 2");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  MinDegreeResult res;
  res.n = n;
  res.tau = tau;
  res.alpha = alpha;
  res.radius = std::sqrt(alpha * std::log(n) / (n * std::numbers::pi));
  res.trials = trials;
  res.per_trial.assign(trials, 0);
  const Region unit = Region::box(1.0, 2);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(seed, {t});
    CoupledSampler a(unit, trial_seed, Stream::A);
    CoupledSampler b(unit, trial_seed, Stream::B);
    const PointPattern x = coupled_prefix(a, n);
    const PointPattern y = coupled_prefix(b, tau * n);
    // an empty A pattern has no minimum degree; count it as not isolated
    res.per_trial[t] = !x.empty() && g1_has_isolated_vertex(x, y, res.radius);
  });
  for (auto z : res.per_trial) res.zero_degree += z;
  if (trials > 0)
    res.fraction = static_cast<double>(res.zero_degree) / static_cast<double>(trials);
  return res;
}

}  // namespace abperc
