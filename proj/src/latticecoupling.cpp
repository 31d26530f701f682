#include "abperc/latticecoupling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/distributions/binomial.hpp>

#include "abperc/bounds.hpp"
#include "abperc/errors.hpp"
#include "abperc/parallel.hpp"
#include "abperc/rng.hpp"

namespace abperc {

namespace {

constexpr std::uint64_t kFieldTag = 0x6669656c64ULL;

bool lattice_within(long long k2, double t, double epsilon) {
  return epsilon * std::sqrt(static_cast<double>(k2)) <= t;
}

long long norm2(std::span<const long long> a, std::span<const long long> b) {
  long long s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

struct Moments {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  void merge(const Moments& o) {
    n += o.n;
    sx += o.sx;
    sy += o.sy;
    sxx += o.sxx;
    syy += o.syy;
    sxy += o.sxy;
  }
  double correlation() const {
    if (n < 2) return 0.0;
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return (sxy - sx * sy / n) / std::sqrt(vx * vy);
  }
};

}  // namespace

bool SiteSet::contains(std::span<const long long> z) const {
  const auto d = static_cast<std::size_t>(dim);
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto s = site(mid);
    if (std::lexicographical_compare(s.begin(), s.end(), z.begin(), z.begin() + d))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < size() && std::equal(z.begin(), z.begin() + d, site(lo).begin());
}

SiteSet discretize(const PointPattern& pattern, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  SiteSet out;
  out.dim = pattern.dim();
  const double cells = pattern.region().side / epsilon;
  out.truncated = cells != std::floor(cells);
  const auto d = static_cast<std::size_t>(out.dim);
  std::vector<std::vector<long long>> sites(pattern.size(), std::vector<long long>(d));
  for (std::size_t i = 0; i < pattern.size(); ++i)
    for (std::size_t k = 0; k < d; ++k)
      sites[i][k] = static_cast<long long>(std::floor(pattern.coord(i, static_cast<int>(k)) / epsilon));
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  for (const auto& s : sites) out.coords.insert(out.coords.end(), s.begin(), s.end());
  return out;
}

std::vector<long long> ball_offsets(double t, double epsilon, int d) {
  const std::uint64_t expected = delta_count(t, epsilon, d);  // also applies the guard
  const auto R = static_cast<long long>(std::ceil(t / epsilon));
  std::vector<long long> out;
  out.reserve(expected * static_cast<std::uint64_t>(d));
  std::vector<long long> k(static_cast<std::size_t>(d), -R);
  for (;;) {
    long long k2 = 0;
    bool zero = true;
    for (long long c : k) {
      k2 += c * c;
      zero = zero && c == 0;
    }
    if (!zero && lattice_within(k2, t, epsilon)) out.insert(out.end(), k.begin(), k.end());
    int a = d - 1;
    while (a >= 0 && k[static_cast<std::size_t>(a)] == R) k[static_cast<std::size_t>(a--)] = -R;
    if (a < 0) break;
    ++k[static_cast<std::size_t>(a)];
  }
  if (out.size() != expected * static_cast<std::uint64_t>(d))
    throw std::logic_error("ball enumeration disagrees with delta_count");
  return out;
}

bool site_related(std::span<const long long> u, std::span<const long long> v, double t,
                  double epsilon) {
  if (u.size() != v.size()) throw ParameterError("site dimension mismatch");
  if (!(t > 0.0) || !(epsilon > 0.0)) throw ParameterError("t and epsilon must be positive");
  if (!lattice_within(norm2(u, v), 2.0 * t, epsilon)) return false;
  const int d = static_cast<int>(u.size());
  if (lattice_within(norm2(u, v), t, epsilon)) return true;  // w = u
  const std::vector<long long> offs = ball_offsets(t, epsilon, d);
  std::vector<long long> w(u.size());
  for (std::size_t i = 0; i < offs.size(); i += u.size()) {
    for (std::size_t k = 0; k < u.size(); ++k) w[k] = u[k] + offs[i + k];
    if (lattice_within(norm2(w, v), t, epsilon)) return true;
  }
  return false;
}

std::size_t SiteField::index(std::span<const long long> z) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < extent.size(); ++k)
    idx = idx * static_cast<std::size_t>(extent[k]) + static_cast<std::size_t>(z[k]);
  return idx;
}

std::vector<long long> SiteField::coords(std::size_t site) const {
  std::vector<long long> z(extent.size());
  for (std::size_t k = extent.size(); k-- > 0;) {
    z[k] = static_cast<long long>(site % static_cast<std::size_t>(extent[k]));
    site /= static_cast<std::size_t>(extent[k]);
  }
  return z;
}

bool SiteField::in_window(std::span<const long long> z) const {
  for (std::size_t k = 0; k < extent.size(); ++k)
    if (z[k] < 0 || z[k] >= extent[k]) return false;
  return true;
}

std::vector<long long> default_window(int d) {
  return std::vector<long long>(static_cast<std::size_t>(d), 128);
}

SiteField sample_coupled_fields(const std::vector<long long>& window, double epsilon, double t,
                                double p_lambda, double p_nu, std::uint64_t seed) {
  if (window.empty()) throw ParameterError("window must have at least one axis");
  if (!(p_nu > 0.0 && p_nu <= p_lambda && p_lambda <= 1.0))
    throw ParameterError("need 0 < p_nu <= p_lambda <= 1");
  SiteField f;
  f.dim = static_cast<int>(window.size());
  f.extent = window;
  f.epsilon = epsilon;
  f.t = t;
  f.p_lambda = p_lambda;
  f.p_nu = p_nu;
  f.offsets = ball_offsets(t, epsilon, f.dim);
  f.delta_sites = f.offsets.size() / window.size();
  f.u_param = std::exp((std::log(p_nu) - std::log(p_lambda)) / static_cast<double>(f.delta_sites));
  f.margin = static_cast<long long>(std::ceil(t / epsilon));
  for (long long e : window)
    if (e <= 2 * f.margin) throw ParameterError("window too small to have interior sites");

  std::size_t n = 1;
  for (long long e : window) n *= static_cast<std::size_t>(e);
  const std::size_t deg = f.delta_sites;
  const std::size_t d = window.size();

  Xoshiro256 eng(derive_seed(seed, {kFieldTag}));
  f.T.resize(n);
  for (auto& b : f.T) b = eng.uniform() < p_lambda;
  f.U.resize(n * deg);
  for (auto& b : f.U) b = eng.uniform() < f.u_param;

  f.V.resize(n);
  f.W.assign(n, 0);
  f.interior.resize(n);
  std::vector<long long> z(d), w(d);
  for (std::size_t s = 0; s < n; ++s) {
    const auto* u = &f.U[s * deg];
    f.V[s] = f.T[s] && std::all_of(u, u + deg, [](std::uint8_t b) { return b != 0; });
    z = f.coords(s);
    bool inner = true;
    for (std::size_t k = 0; k < d; ++k)
      inner = inner && z[k] >= f.margin && z[k] < window[k] - f.margin;
    f.interior[s] = inner;
    // W_v = 1 - prod over u in the ball of v of (1 - U_{u,v}); u = v - offset_k
    std::uint8_t any = 0;
    for (std::size_t k = 0; k < deg && !any; ++k) {
      for (std::size_t a = 0; a < d; ++a) w[a] = z[a] - f.offsets[k * d + a];
      if (f.in_window(w)) any = f.U[f.index(w) * deg + k];
    }
    f.W[s] = any;
  }
  return f;
}

std::size_t implication_violations(const SiteField& f) {
  const std::size_t d = f.extent.size();
  const std::size_t deg = f.delta_sites;
  std::size_t bad = 0;
  std::vector<long long> v(d);
  for (std::size_t s = 0; s < f.sites(); ++s) {
    if (!f.V[s]) continue;
    const auto z = f.coords(s);
    for (std::size_t k = 0; k < deg; ++k) {
      for (std::size_t a = 0; a < d; ++a) v[a] = z[a] + f.offsets[k * d + a];
      if (!f.in_window(v)) continue;
      const std::size_t vi = f.index(v);
      if (f.interior[vi] && !f.W[vi]) ++bad;
    }
  }
  return bad;
}

double binomial_two_sided_p(std::size_t successes, std::size_t trials, double p) {
  if (successes > trials) throw ParameterError("successes exceed trials");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("p must lie in [0, 1]");
  if (trials == 0) return 1.0;
  if (p == 0.0) return successes == 0 ? 1.0 : 0.0;
  if (p == 1.0) return successes == trials ? 1.0 : 0.0;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(trials), p);
  const auto k = static_cast<double>(successes);
  const double lower = boost::math::cdf(dist, k);
  const double upper = successes == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, k - 1));
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

namespace {

MarginalTest finish(std::size_t successes, std::size_t trials, double expected) {
  MarginalTest m;
  m.trials = trials;
  m.successes = successes;
  m.expected = expected;
  m.mean = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  m.p_value = binomial_two_sided_p(successes, trials, expected);
  return m;
}

}  // namespace

CouplingCheck check_coupled_fields(const std::vector<long long>& window, double epsilon, double t,
                                   double p_lambda, double p_nu, std::size_t fields,
                                   std::uint64_t seed, int jobs) {
  struct Partial {
    std::size_t interior = 0, t_ones = 0, v_ones = 0, w_ones = 0, violations = 0;
    Moments vv, tw;
    std::uint64_t delta_sites = 0;
  };
  std::vector<Partial> parts(fields);
  parallel_for(fields, jobs, [&](std::size_t i) {
    const SiteField f = sample_coupled_fields(window, epsilon, t, p_lambda, p_nu,
                                              derive_seed(seed, {i}));
    Partial& p = parts[i];
    p.delta_sites = f.delta_sites;
    p.violations = implication_violations(f);
    const long long jump = 2 * f.margin + 1;
    for (std::size_t s = 0; s < f.sites(); ++s) {
      if (!f.interior[s]) continue;
      ++p.interior;
      p.t_ones += f.T[s];
      p.v_ones += f.V[s];
      p.w_ones += f.W[s];
      auto z = f.coords(s);
      if (z[0] % 2 == 0) {
        z[0] += 1;
        if (f.in_window(z) && f.interior[f.index(z)]) p.vv.add(f.V[s], f.V[f.index(z)]);
        z[0] -= 1;
      }
      if (z[0] % (2 * jump) < jump) {
        z[0] += jump;
        if (f.in_window(z) && f.interior[f.index(z)]) p.tw.add(f.T[s], f.W[f.index(z)]);
      }
    }
  });

  CouplingCheck out;
  out.fields = fields;
  Partial total;
  for (const auto& p : parts) {
    total.interior += p.interior;
    total.t_ones += p.t_ones;
    total.v_ones += p.v_ones;
    total.w_ones += p.w_ones;
    total.violations += p.violations;
    total.vv.merge(p.vv);
    total.tw.merge(p.tw);
    total.delta_sites = p.delta_sites;
  }
  const double q = fields ? q_coupling(p_nu, p_lambda, total.delta_sites) : 0.0;
  out.t_marginal = finish(total.t_ones, total.interior, p_lambda);
  out.v_marginal = finish(total.v_ones, total.interior, p_nu);
  out.w_marginal = finish(total.w_ones, total.interior, q);
  out.implication_violations = total.violations;
  out.v_pair_correlation = total.vv.correlation();
  out.v_pairs = static_cast<std::size_t>(total.vv.n);
  out.tw_correlation = total.tw.correlation();
  out.tw_pairs = static_cast<std::size_t>(total.tw.n);
  return out;
}

void write_field_csv(std::ostream& out, const SiteField& field) {
  out << "site";
  for (int k = 1; k <= field.dim; ++k) out << ",z" << k;
  out << ",T,V,W,interior\n";
  for (std::size_t s = 0; s < field.sites(); ++s) {
    out << s;
    for (long long c : field.coords(s)) out << ',' << c;
    out << ',' << int(field.T[s]) << ',' << int(field.V[s]) << ',' << int(field.W[s]) << ','
        << int(field.interior[s]) << '\n';
  }
}

}  // namespace abperc
