#include <doctest.h>

#include <random>

#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "abperc/errors.hpp"
#include "abperc/pointprocess.hpp"
#include "abperc/rng.hpp"

using namespace abperc;

namespace {

// Pearson statistic of observed counts against Poisson(mean), tails pooled so
// that every bin expects at least 5. Returns (statistic, degrees of freedom).
std::pair<double, int> poisson_chi_square(const std::map<std::uint64_t, std::size_t>& hist,
                                          std::size_t trials, double mean) {
  const boost::math::poisson_distribution<double> pois(mean);
  const double n = static_cast<double>(trials);
  std::uint64_t lo = 0;
  while (n * boost::math::cdf(pois, static_cast<double>(lo)) < 5.0) ++lo;
  std::uint64_t hi = lo;
  while (n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(hi))) >= 5.0) ++hi;
  double stat = 0.0;
  int bins = 0;
  auto add = [&](double observed, double expected) {
    stat += (observed - expected) * (observed - expected) / expected;
    ++bins;
  };
  double below = 0, above = 0;
  for (auto [k, c] : hist) {
    if (k <= lo) below += static_cast<double>(c);
    if (k > hi) above += static_cast<double>(c);
  }
  add(below, n * boost::math::cdf(pois, static_cast<double>(lo)));
  for (std::uint64_t k = lo + 1; k <= hi; ++k) {
    auto it = hist.find(k);
    add(it == hist.end() ? 0.0 : static_cast<double>(it->second),
        n * boost::math::pdf(pois, static_cast<double>(k)));
  }
  add(above, n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(hi))));
  return {stat, bins - 1};
}

double chi_square_critical(int dof, double level) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), level));
}

}  // namespace

TEST_SUITE("pointprocess") {
  TEST_CASE("zero intensity gives the empty pattern") {
    const auto p = sample_poisson(Region::box(1.0), 0.0, 42);
    CHECK(p.empty());
    CHECK(p.size() == 0);
  }

  TEST_CASE("negative intensity and bad regions are parameter errors") {
    CHECK_THROWS_AS(sample_poisson(Region::box(1.0), -1.0, 1), ParameterError);
    CHECK_THROWS_AS(Region::box(0.0), ParameterError);
    CHECK_THROWS_AS(Region::box(1.0, 0), ParameterError);
    CoupledSampler s(Region::box(1.0), 1, Stream::A);
    CHECK_THROWS_AS(s.count(-0.5), ParameterError);
  }

  TEST_CASE("coordinates lie in [0, L)") {
    const auto p = sample_poisson(Region::box(3.0, 3), 50.0, 7);
    for (double x : p.coords()) {
      CHECK(x >= 0.0);
      CHECK(x < 3.0);
    }
  }

  TEST_CASE("sampling is deterministic in the seed") {
    const auto a = sample_poisson(Region::box(2.0), 30.0, 99);
    const auto b = sample_poisson(Region::box(2.0), 30.0, 99);
    const auto c = sample_poisson(Region::box(2.0), 30.0, 100);
    REQUIRE(a.size() == b.size());
    CHECK(std::equal(a.coords().begin(), a.coords().end(), b.coords().begin()));
    CHECK_FALSE((a.size() == c.size() &&
                 std::equal(a.coords().begin(), a.coords().end(), c.coords().begin())));
  }

  TEST_CASE("counts follow Poisson(lambda L^d)") {
    constexpr std::size_t trials = 10'000;
    std::map<std::uint64_t, std::size_t> hist;
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto n = sample_poisson(Region::box(1.0), 100.0, derive_seed(5, {t})).size();
      ++hist[n];
      sum += static_cast<double>(n);
    }
    CHECK(std::abs(sum / trials - 100.0) <= 3.0 * std::sqrt(100.0 / trials) * 10.0);
    const auto [stat, dof] = poisson_chi_square(hist, trials, 100.0);
    CHECK(stat < chi_square_critical(dof, 1e-3));
  }

  TEST_CASE("side 2 at intensity 25 matches side 1 at intensity 100") {
    constexpr std::size_t trials = 10'000;
    std::map<std::uint64_t, std::pair<double, double>> table;
    for (std::size_t t = 0; t < trials; ++t) {
      table[sample_poisson(Region::box(2.0), 25.0, derive_seed(11, {t})).size()].first += 1;
      table[sample_poisson(Region::box(1.0), 100.0, derive_seed(12, {t})).size()].second += 1;
    }
    // two-sample chi-square homogeneity test on pooled bins with >= 10 total
    std::vector<std::pair<double, double>> bins;
    std::pair<double, double> acc{0, 0};
    for (auto& [k, c] : table) {
      acc.first += c.first;
      acc.second += c.second;
      if (acc.first + acc.second >= 20) {
        bins.push_back(acc);
        acc = {0, 0};
      }
    }
    bins.back().first += acc.first;
    bins.back().second += acc.second;
    double stat = 0.0;
    for (auto [a, b] : bins) {
      const double e = (a + b) / 2.0;
      stat += (a - e) * (a - e) / e + (b - e) * (b - e) / e;
    }
    CHECK(stat < chi_square_critical(static_cast<int>(bins.size()) - 1, 1e-3));
  }

  TEST_CASE("torus metric wraps around") {
    const Region t = Region::torus(1.0);
    const std::vector<double> a{0.1, 0.5}, b{0.9, 0.5};
    CHECK(t.dist2(a, b) == doctest::Approx(0.04));
    CHECK(Region::box(1.0).dist2(a, b) == doctest::Approx(0.64));
  }

  TEST_CASE("coupled prefix at intensity 0 is empty") {
    CoupledSampler s(Region::box(1.0), 3, Stream::A);
    CHECK(coupled_prefix(s, 0.0).empty());
  }

  TEST_CASE("coupled prefixes are nested") {
    CoupledSampler s(Region::box(1.0), 17, Stream::B);
    const auto small = coupled_prefix(s, 5.0);
    const auto large = coupled_prefix(s, 10.0);
    REQUIRE(small.size() <= large.size());
    CHECK(std::equal(small.coords().begin(), small.coords().end(), large.coords().begin()));
  }

  TEST_CASE("prefix sizes are nondecreasing along an intensity sweep") {
    CoupledSampler s(Region::box(1.0), 23, Stream::A);
    std::uint64_t last = 0;
    for (int lam = 1; lam <= 100; ++lam) {
      const auto n = s.count(lam);
      CHECK(n >= last);
      last = n;
    }
  }

  TEST_CASE("property: nesting holds for random seeds and intensity pairs") {
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> u(0.0, 3000.0);
    for (int rep = 0; rep < 200; ++rep) {
      double l1 = u(g), l2 = u(g);
      if (l1 > l2) std::swap(l1, l2);
      CoupledSampler s(Region::box(1.0 + rep % 3), g(), rep % 2 ? Stream::A : Stream::B);
      const auto n2 = s.count(l2);
      const auto n1 = s.count(l1);
      CHECK(n1 <= n2);
      const auto a = coupled_prefix(s, l1);
      const auto b = coupled_prefix(s, l2);
      CHECK(std::equal(a.coords().begin(), a.coords().end(), b.coords().begin()));
    }
  }

  TEST_CASE("coupled counts do not depend on query order") {
    CoupledSampler fresh(Region::box(1.0), 8, Stream::A);
    CoupledSampler warmed(Region::box(1.0), 8, Stream::A);
    warmed.count(5000.0);
    warmed.count(12.5);
    for (double lam : {0.3, 12.5, 256.0, 257.1, 4000.0}) CHECK(fresh.count(lam) == warmed.count(lam));
  }

  TEST_CASE("coupled counts follow Poisson and streams differ") {
    constexpr std::size_t trials = 10'000;
    std::map<std::uint64_t, std::size_t> hist;
    double sa = 0, sb = 0, sab = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      CoupledSampler a(Region::box(1.0), derive_seed(77, {t}), Stream::A);
      CoupledSampler b(Region::box(1.0), derive_seed(77, {t}), Stream::B);
      const double na = static_cast<double>(a.count(300.0));
      const double nb = static_cast<double>(b.count(300.0));
      ++hist[static_cast<std::uint64_t>(na)];
      sa += na;
      sb += nb;
      sab += na * nb;
    }
    const auto [stat, dof] = poisson_chi_square(hist, trials, 300.0);
    CHECK(stat < chi_square_critical(dof, 1e-3));
    const double n = trials;
    const double corr = (sab / n - sa / n * sb / n) / 300.0;
    CHECK(std::abs(corr) < 4.0 / std::sqrt(n));
  }

  TEST_CASE("pattern CSV has a header and one row per point") {
    const auto p = sample_poisson(Region::box(1.0), 10.0, 4);
    std::ostringstream os;
    write_csv(os, p);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "index,x1,x2");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == p.size());
  }
}
