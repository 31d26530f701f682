#include "abperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "abperc/csv.hpp"
#include "abperc/errors.hpp"
#include "abperc/geomgraph.hpp"
#include "abperc/parallel.hpp"
#include "abperc/rng.hpp"

namespace abperc {

namespace {

// Fresh evaluations below this many points are repeated even when the
// monotone cache already knows the answer, as a consistency check.
constexpr std::uint64_t kVerifyBudget = 2'000'000;

void check_box(double r, double side, int dim) {
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
  if (!(side >= 4.0 * r)) throw ParameterError("box side must be at least 4r");
  if (dim < 2) throw ParameterError("crossing estimation needs dim >= 2");
}

}  // namespace

ProbabilityEstimate wilson_interval(std::size_t successes, std::size_t trials, double z) {
  ProbabilityEstimate e{trials, successes, 0.0, 0.0, 1.0};
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  e.value = p;
  e.ci_low = std::max(0.0, centre - half);
  e.ci_high = std::min(1.0, centre + half);
  if (successes == 0) e.ci_low = 0.0;
  if (successes == trials) e.ci_high = 1.0;
  return e;
}

// Incremental AB crossing for one lambda: B points are streamed in prefix
// order into a union-find over the A points only. A B point merges all its
// A neighbours and tags their component with the faces it touches.
struct CrossingTrial::AbState {
  double lambda;
  PointPattern a;
  NeighborGrid grid;
  bool possible;  // false when even G(A, 2r) does not cross with margin 2r
  DisjointSets sets;
  std::vector<std::uint8_t> faces;
  std::uint64_t processed = 0;
  bool crossing = false;

  AbState(double lam, PointPattern pattern, double r, bool can_cross)
      : lambda(lam),
        a(std::move(pattern)),
        grid(a, r),
        possible(can_cross),
        sets(a.size()),
        faces(a.size(), 0) {}
};

CrossingTrial::CrossingTrial(double side, int dim, double r, std::uint64_t seed)
    : side_(side),
      dim_(dim),
      r_(r),
      a_(Region::box(side, dim), seed, Stream::A),
      b_(Region::box(side, dim), seed, Stream::B) {
  check_box(r, side, dim);
}

CrossingTrial::~CrossingTrial() = default;
CrossingTrial::CrossingTrial(CrossingTrial&&) noexcept = default;
CrossingTrial& CrossingTrial::operator=(CrossingTrial&&) noexcept = default;

namespace {

std::uint8_t face_bits(double v, double margin, double side) {
  return static_cast<std::uint8_t>((v <= margin ? 1 : 0) | (v >= side - margin ? 2 : 0));
}

}  // namespace

bool CrossingTrial::one_type(double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("intensity must be nonnegative");
  auto& c = lambda_cache_;
  const bool known = lambda >= c.known_true || lambda <= c.known_false;
  const bool cached_value = lambda >= c.known_true;
  if (known && a_.count(lambda) > kVerifyBudget) return cached_value;

  const PointPattern x = coupled_prefix(a_, lambda);
  bool result = false;
  if (x.size() >= 2) result = crossing_exists(build_unigraph(x, 2.0 * r_), x, r_);
  ++evaluations_;
  if (known && result != cached_value)
    throw std::logic_error("one-type crossing indicator is not monotone in lambda");
  if (result)
    c.known_true = std::min(c.known_true, lambda);
  else
    c.known_false = std::max(c.known_false, lambda);
  return result;
}

bool CrossingTrial::ab_uncached(double mu) {
  AbState& s = *ab_state_;
  if (!s.possible || s.a.empty()) return false;
  const std::uint64_t target = b_.count(mu);
  if (target < s.processed) {
    s.sets = DisjointSets(s.a.size());
    std::fill(s.faces.begin(), s.faces.end(), 0);
    s.processed = 0;
    s.crossing = false;
  }
  if (s.processed == 0)
    for (std::size_t i = 0; i < s.a.size(); ++i) s.faces[i] = face_bits(s.a.coord(i, 0), r_, side_);
  if (s.crossing) return true;

  std::vector<double> y(static_cast<std::size_t>(dim_));
  std::vector<std::size_t> hits;
  for (; s.processed < target; ++s.processed) {
    b_.point(s.processed, y);
    hits.clear();
    s.grid.for_each_within(y, [&](std::size_t j, double) { hits.push_back(j); });
    if (hits.empty()) continue;
    std::uint8_t f = face_bits(y[0], r_, side_);
    for (std::size_t j : hits) f |= s.faces[s.sets.find(j)];
    for (std::size_t k = 1; k < hits.size(); ++k) s.sets.unite(hits[0], hits[k]);
    const std::size_t root = s.sets.find(hits[0]);
    s.faces[root] = f;
    if (f == 3) {
      s.crossing = true;
      s.processed = target;
      break;
    }
  }
  return s.crossing;
}

bool CrossingTrial::ab(double lambda, double mu) {
  if (!(lambda >= 0.0) || !(mu >= 0.0)) throw ParameterError("intensity must be nonnegative");
  if (!ab_state_ || ab_state_->lambda != lambda) {
    PointPattern x = coupled_prefix(a_, lambda);
    bool possible = false;
    if (x.size() >= 2) possible = crossing_exists(build_unigraph(x, 2.0 * r_), x, 2.0 * r_);
    ab_state_ = std::make_unique<AbState>(lambda, std::move(x), r_, possible);
    mu_cache_ = {};
  }
  auto& c = mu_cache_;
  const bool known = mu >= c.known_true || mu <= c.known_false || !ab_state_->possible;
  const bool cached_value = ab_state_->possible && mu >= c.known_true;
  if (known && (!ab_state_->possible || b_.count(mu) > kVerifyBudget)) return cached_value;

  const bool result = ab_uncached(mu);
  ++evaluations_;
  if (known && result != cached_value)
    throw std::logic_error("AB crossing indicator is not monotone in mu");
  if (result)
    c.known_true = std::min(c.known_true, mu);
  else
    c.known_false = std::max(c.known_false, mu);
  return result;
}

namespace {

ProbabilityEstimate probe(std::vector<CrossingTrial>& trials, int jobs, auto&& indicator) {
  std::vector<std::uint8_t> hit(trials.size(), 0);
  parallel_for(trials.size(), jobs, [&](std::size_t t) { hit[t] = indicator(trials[t]); });
  std::size_t successes = 0;
  for (auto h : hit) successes += h;
  return wilson_interval(successes, trials.size());
}

std::vector<CrossingTrial> make_trials(double side, int dim, double r, std::size_t trials,
                                       std::uint64_t seed) {
  std::vector<CrossingTrial> out;
  out.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) out.emplace_back(side, dim, r, derive_seed(seed, {t}));
  return out;
}

std::string describe_probes(const CriticalEstimate& est) {
  std::string s;
  for (const auto& p : est.probes)
    s += fmt::format(" [{}={:.6g}: {}/{}]", est.parameter, p.value, p.probability.successes,
                     p.probability.trials);
  return s;
}

}  // namespace

ProbabilityEstimate crossing_probability(GraphKind kind, double lambda, double mu, double r,
                                         double side, std::size_t trials, std::uint64_t seed,
                                         int jobs, int dim) {
  check_box(r, side, dim);
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (!(lambda >= 0.0) || !(mu >= 0.0)) throw ParameterError("intensity must be nonnegative");
  auto runs = make_trials(side, dim, r, trials, seed);
  if (kind == GraphKind::one_type)
    return probe(runs, jobs, [&](CrossingTrial& t) { return t.one_type(lambda); });
  return probe(runs, jobs, [&](CrossingTrial& t) { return t.ab(lambda, mu); });
}

CriticalEstimate estimate_lambda_c(double r, double side, std::size_t trials, double tol,
                                   std::uint64_t seed, const LambdaSearch& search) {
  check_box(r, side, search.dim);
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  const double scale = std::pow(r, -search.dim);
  CriticalEstimate est;
  est.parameter = "lambda";
  est.side = side;
  est.trials = trials;
  est.target = search.target;
  est.r = r;
  est.tol = tol;
  est.seed = seed;
  est.dim = search.dim;
  est.low = search.low * scale;
  est.high = search.high * scale;
  if (!(est.low >= 0.0 && est.low < est.high)) throw ParameterError("invalid initial bracket");

  if (est.high - est.low > tol) {
    auto runs = make_trials(side, search.dim, r, trials, seed);
    auto at = [&](double lambda) {
      const auto p = probe(runs, search.jobs, [&](CrossingTrial& t) { return t.one_type(lambda); });
      est.probes.push_back({lambda, p});
      return p.value;
    };
    const double p_low = at(est.low);
    const double p_high = at(est.high);
    if (p_low >= search.target || p_high < search.target)
      throw EstimationError("initial lambda bracket does not straddle the target probability:" +
                            describe_probes(est));
    while (est.high - est.low > tol) {
      const double mid = 0.5 * (est.low + est.high);
      (at(mid) >= search.target ? est.high : est.low) = mid;
    }
  }
  est.estimate = 0.5 * (est.low + est.high);
  return est;
}

CriticalEstimate estimate_mu_c(double r, double lambda, double side, std::size_t trials,
                               double tol, std::uint64_t seed, const MuSearch& search) {
  check_box(r, side, search.dim);
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (!(search.mu_start > 0.0 && search.mu_start <= search.mu_max))
    throw ParameterError("need 0 < mu_start <= mu_max");
  CriticalEstimate est;
  est.parameter = "mu";
  est.side = side;
  est.trials = trials;
  est.target = search.target;
  est.r = r;
  est.companion = lambda;
  est.tol = tol;
  est.seed = seed;
  est.dim = search.dim;

  auto runs = make_trials(side, search.dim, r, trials, seed);
  auto at = [&](double mu) {
    const auto p = probe(runs, search.jobs, [&](CrossingTrial& t) { return t.ab(lambda, mu); });
    est.probes.push_back({mu, p});
    return p.value;
  };

  // mu = 0 gives an edgeless graph, so the lower end always fails.
  est.low = 0.0;
  double mu = search.mu_start;
  for (;;) {
    if (at(mu) >= search.target) break;
    est.low = mu;
    if (mu >= search.mu_max) {
      est.percolation_detected = false;
      est.high = std::numeric_limits<double>::infinity();
      est.estimate = std::numeric_limits<double>::infinity();
      return est;
    }
    mu = std::min(2.0 * mu, search.mu_max);
  }
  est.high = mu;
  while (est.high - est.low > tol) {
    const double mid = 0.5 * (est.low + est.high);
    (at(mid) >= search.target ? est.high : est.low) = mid;
  }
  est.estimate = 0.5 * (est.low + est.high);
  return est;
}

void write_probe_csv(std::ostream& out, const CriticalEstimate& est) {
  out << "value,trials,successes,probability,ci_low,ci_high\n";
  for (const auto& p : est.probes)
    out << format_real(p.value) << ',' << p.probability.trials << ',' << p.probability.successes
        << ',' << format_real(p.probability.value) << ',' << format_real(p.probability.ci_low)
        << ',' << format_real(p.probability.ci_high) << '\n';
}

}  // namespace abperc
