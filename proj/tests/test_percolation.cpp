#include <doctest.h>

#include <cmath>
#include <sstream>

#include "abperc/errors.hpp"
#include "abperc/geomgraph.hpp"
#include "abperc/percolation.hpp"
#include "abperc/rng.hpp"

using namespace abperc;

TEST_SUITE("percolation") {
  TEST_CASE("wilson interval") {
    const auto w = wilson_interval(0, 10);
    CHECK(w.value == 0.0);
    CHECK(w.ci_low == 0.0);
    CHECK(w.ci_high > 0.0);
    const auto h = wilson_interval(50, 100);
    CHECK(h.value == 0.5);
    CHECK(h.ci_low == doctest::Approx(0.40382982859014716).epsilon(1e-14));
    CHECK(h.ci_high == doctest::Approx(0.5961701714098528).epsilon(1e-14));
    CHECK(wilson_interval(10, 10).ci_high == doctest::Approx(1.0));
  }

  TEST_CASE("zero intensities give probability exactly zero") {
    const auto a = crossing_probability(GraphKind::one_type, 0.0, 0.0, 1.0, 10.0, 50, 1);
    CHECK(a.successes == 0);
    CHECK(a.value == 0.0);
    const auto b = crossing_probability(GraphKind::ab, 5.0, 0.0, 1.0, 10.0, 50, 1);
    CHECK(b.value == 0.0);
  }

  TEST_CASE("very dense one-type graph always crosses") {
    const auto p = crossing_probability(GraphKind::one_type, 100 * 0.359, 0.0, 1.0, 6.0, 100, 2);
    CHECK(p.value >= 0.99);
  }

  TEST_CASE("degenerate box and bad arguments") {
    CHECK_THROWS_AS(crossing_probability(GraphKind::one_type, 1.0, 0.0, 1.0, 3.9, 10, 1), ParameterError);
    CHECK_THROWS_AS(crossing_probability(GraphKind::one_type, 1.0, 0.0, 0.0, 10.0, 10, 1), ParameterError);
    CHECK_THROWS_AS(crossing_probability(GraphKind::one_type, 1.0, 0.0, 1.0, 10.0, 0, 1), ParameterError);
    CHECK_THROWS_AS(estimate_mu_c(1.0, 0.0, 10.0, 10, 0.1, 1), ParameterError);
  }

  TEST_CASE("streamed AB crossing agrees with the explicit bipartite graph") {
    const double side = 12.0, r = 1.0;
    for (std::uint64_t s = 0; s < 40; ++s) {
      const std::uint64_t seed = derive_seed(77, {s});
      CrossingTrial trial(side, 2, r, seed);
      CoupledSampler a(Region::box(side), seed, Stream::A);
      CoupledSampler b(Region::box(side), seed, Stream::B);
      const double lambda = 0.5 + 0.02 * s;
      const auto x = coupled_prefix(a, lambda);
      for (double mu : {0.2, 0.8, 1.5, 3.0, 8.0}) {
        const auto y = coupled_prefix(b, mu);
        CHECK(trial.ab(lambda, mu) == crossing_exists(build_bipartite(x, y, r), r));
      }
      CHECK(trial.one_type(lambda) == crossing_exists(build_unigraph(x, 2 * r), x, r));
    }
  }

  TEST_CASE("per-seed indicators are monotone along a probe sweep") {
    CrossingTrial trial(10.0, 2, 1.0, 5);
    bool prev = false;
    for (double mu = 0.1; mu < 20; mu *= 1.3) {
      const bool c = trial.ab(0.8, mu);
      CHECK((!prev || c));
      prev = c;
    }
    prev = false;
    for (double l = 0.05; l < 1.5; l += 0.05) {
      const bool c = trial.one_type(l);
      CHECK((!prev || c));
      prev = c;
    }
  }

  TEST_CASE("zero-iteration bisection returns the midpoint") {
    LambdaSearch s;
    const auto e = estimate_lambda_c(1.0, 10.0, 20, 10.0, 1, s);
    CHECK(e.estimate == doctest::Approx(0.525));
    CHECK(e.low == doctest::Approx(0.05));
    CHECK(e.high == doctest::Approx(1.0));
  }

  TEST_CASE("non-bracketing interval is an estimation error") {
    LambdaSearch s;
    s.low = 2.0;
    s.high = 4.0;
    CHECK_THROWS_AS(estimate_lambda_c(1.0, 10.0, 40, 0.05, 1, s), EstimationError);
  }

  TEST_CASE("bisection narrows to tol and probes are monotone") {
    const auto e = estimate_lambda_c(1.0, 12.0, 60, 0.02, 3);
    CHECK(e.high - e.low <= 0.02 + 1e-12);
    CHECK(e.low < e.estimate);
    CHECK(e.estimate < e.high);
    auto probes = e.probes;
    std::sort(probes.begin(), probes.end(), [](auto& a, auto& b) { return a.value < b.value; });
    for (std::size_t i = 1; i < probes.size(); ++i)
      CHECK(probes[i].probability.successes >= probes[i - 1].probability.successes);
    std::ostringstream os;
    write_probe_csv(os, e);
    CHECK(os.str().rfind("value,trials,successes,probability,ci_low,ci_high\n", 0) == 0);
  }

  TEST_CASE("mu search: finite above lambda_c, undetected below") {
    MuSearch s;
    s.mu_max = 1e4;
    const auto hi = estimate_mu_c(1.0, 0.75, 12.0, 40, 0.1, 4, s);
    CHECK(hi.percolation_detected);
    CHECK(std::isfinite(hi.estimate));
    CHECK(hi.low < hi.estimate);
    const auto lo = estimate_mu_c(1.0, 0.15, 12.0, 40, 0.1, 4, s);
    CHECK_FALSE(lo.percolation_detected);
    CHECK(std::isinf(lo.estimate));
  }

  TEST_CASE("results do not depend on the thread count") {
    const auto a = crossing_probability(GraphKind::ab, 0.8, 2.0, 1.0, 10.0, 30, 9, 1);
    const auto b = crossing_probability(GraphKind::ab, 0.8, 2.0, 1.0, 10.0, 30, 9, 4);
    CHECK(a.successes == b.successes);
  }
}
