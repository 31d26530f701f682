// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <omp.h>

#include "abperc/bounds.hpp"
#include "abperc/connectivity.hpp"
#include "abperc/csv.hpp"
#include "abperc/geomgraph.hpp"
#include "abperc/latticecoupling.hpp"
#include "abperc/percolation.hpp"
#include "oracles.hpp"

using namespace abperc;

namespace {

constexpr double kLambdaC2 = 0.35911;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string csv;  // compared across thread counts
};

struct Shared {
  CriticalEstimate lambda_r1;
  CriticalEstimate mu_above;
};

Outcome c1_rho_oracle(int) {
  std::mt19937_64 g(101);
  std::uniform_int_distribution<std::size_t> size(1, 40);
  Outcome o;
  std::ostringstream csv;
  csv << "instance,nx,ny,rho\n";
  std::size_t agree = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto x = oracle::uniform_pattern(Region::box(1.0), size(g), g);
    const auto y = oracle::uniform_pattern(Region::box(1.0), size(g), g);
    const double rho = rho_threshold(x, y);
    if (rho == oracle::rho_candidate_scan(x, y)) ++agree;
    csv << i << ',' << x.size() << ',' << y.size() << ',' << format_real(rho) << '\n';
  }
  o.pass = agree == 100;
  o.detail = fmt::format("{}/100 exact matches", agree);
  o.csv = csv.str();
  return o;
}

Outcome c2_g1_equivalence(int) {
  std::mt19937_64 g(202);
  std::uniform_int_distribution<std::size_t> size(1, 30);
  std::uniform_real_distribution<double> radius(0.05, 0.4);
  Outcome o;
  std::ostringstream csv;
  csv << "instance,nx,ny,r,connected\n";
  std::size_t agree = 0, connected = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto x = oracle::uniform_pattern(Region::box(1.0), size(g), g);
    const auto y = oracle::uniform_pattern(Region::box(1.0), size(g), g);
    const double r = radius(g);
    const bool fast = is_connected_g1(x, y, r);
    const bool explicit_g1 = oracle::connected(oracle::g1_lists(x, y, r));
    const bool built = components(build_g1(x, y, r)).count <= 1;
    if (fast == explicit_g1 && fast == built) ++agree;
    connected += fast;
    csv << i << ',' << x.size() << ',' << y.size() << ',' << format_real(r) << ',' << fast << '\n';
  }
  o.pass = agree == 200;
  o.detail = fmt::format("{}/200 agree ({} connected, {} not)", agree, connected, 200 - connected);
  o.csv = csv.str();
  return o;
}

std::string probes_csv(const CriticalEstimate& e) {
  std::ostringstream s;
  write_probe_csv(s, e);
  return s.str();
}

Outcome c3_lambda_c(int jobs, Shared& sh) {
  LambdaSearch s;
  s.jobs = jobs;
  const auto e = estimate_lambda_c(1.0, 30.0, 400, 0.02, 3001, s);
  sh.lambda_r1 = e;
  Outcome o;
  o.pass = e.estimate >= 0.287 && e.estimate <= 0.431;
  o.detail = fmt::format("lambda_hat={:.5f} bracket=[{:.5f},{:.5f}] reference {} band [0.287,0.431]", e.estimate,
                         e.low, e.high, kLambdaC2);
  o.csv = probes_csv(e);
  return o;
}

Outcome c4_scaling(int jobs, Shared& sh) {
  LambdaSearch s;
  s.jobs = jobs;
  // same box in units of r, tolerance scaled by r^-d
  const auto e = estimate_lambda_c(2.0, 60.0, 400, 0.02 / 4, 4001, s);
  const auto& a = sh.lambda_r1;
  const double lo = std::max(a.low / 4, e.low), hi = std::min(a.high / 4, e.high);
  Outcome o;
  o.pass = lo <= hi;
  o.detail = fmt::format("r=2: {:.5f} in [{:.5f},{:.5f}]; r=1 / 4: {:.5f} in [{:.5f},{:.5f}]", e.estimate, e.low,
                         e.high, a.estimate / 4, a.low / 4, a.high / 4);
  o.csv = probes_csv(e);
  return o;
}

Outcome c5_mu_c(int jobs, Shared& sh) {
  const double lc = sh.lambda_r1.estimate;
  MuSearch s;
  s.jobs = jobs;
  const auto above = estimate_mu_c(1.0, 2 * lc, 30.0, 400, 0.05, 5001, s);
  const auto below = estimate_mu_c(1.0, 0.5 * lc, 30.0, 400, 0.05, 5002, s);
  sh.mu_above = above;
  Outcome o;
  o.pass = above.percolation_detected && std::isfinite(above.estimate) && !below.percolation_detected;
  o.detail = fmt::format("lambda=2*{:.5f}: mu_hat={:.4f}; lambda=0.5*{:.5f}: {} up to mu_max={:g}", lc,
                         above.estimate, lc, below.percolation_detected ? "percolation detected" : "no percolation",
                         s.mu_max);
  o.csv = probes_csv(above) + probes_csv(below);
  return o;
}

std::string bound_csv(const BoundReport& r) {
  std::ostringstream s;
  write_bound_csv(s, r);
  return s.str();
}

Outcome c6_bound_dominance(int, Shared& sh) {
  Outcome o;
  BoundInputs in;
  in.d = 2;
  in.r = 1.0;
  in.lambda_c = sh.lambda_r1.estimate;
  in.lambda = 2 * in.lambda_c;
  const auto rep = mu_bound_optimized(in);
  BoundInputs ref = in;
  ref.lambda_c = kLambdaC2;
  ref.lambda = 2 * kLambdaC2;
  const auto rep_ref = mu_bound_optimized(ref);
  const double mu_sim = sh.mu_above.estimate;
  o.pass = rep.mu_hat > mu_sim && rep_ref.mu_hat > mu_sim;
  o.detail = fmt::format("bound {:.6g} (lambda_c={:.5f}), {:.6g} (lambda_c={}) vs simulated {:.4f}", rep.mu_hat,
                         in.lambda_c, rep_ref.mu_hat, kLambdaC2, mu_sim);
  o.csv = bound_csv(rep) + bound_csv(rep_ref);
  return o;
}

Outcome c7_rate(int) {
  const auto start = std::chrono::steady_clock::now();
  const double c = asymptotic_constant(1.0, kLambdaC2, 2);
  Outcome o;
  std::vector<double> v;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    BoundInputs in;
    in.d = 2;
    in.r = 1.0;
    in.lambda_c = kLambdaC2;
    in.lambda = kLambdaC2 + delta;
    const auto rep = mu_bound_optimized(in);
    v.push_back(rep.mu_hat * std::pow(delta, 4) / std::abs(std::log(delta)));
    o.csv += bound_csv(rep);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass = v[0] >= v[1] && v[1] >= v[2] && v[2] <= 1.5 * c && secs < 1.0;
  o.detail = fmt::format("ratios {:.2f}, {:.2f}, {:.2f} vs C={:.2f} (1.5C={:.2f}); {:.3f} s", v[0], v[1], v[2], c,
                         1.5 * c, secs);
  return o;
}

std::string samples_csv(const LlnTable& t) {
  std::ostringstream s;
  write_samples_csv(s, t);
  return s.str();
}

Outcome c8_lln(int jobs) {
  const auto t4 = lln_sweep({1e3, 1e4, 1e5}, {4}, 30, 8001, jobs);
  const auto tt = lln_sweep({1e4}, {1, 16}, 30, 8002, jobs);
  const double m3 = t4.cell(1e3, 4)->median, m4 = t4.cell(1e4, 4)->median, m5 = t4.cell(1e5, 4)->median;
  const double a = tt.cell(1e4, 1)->median, b = tt.cell(1e4, 16)->median;
  Outcome o;
  o.pass = m3 >= m4 && m4 >= m5 && m5 >= 0.25 && m5 <= 0.6 && a > b;
  o.detail = fmt::format("tau=4 medians {:.4f}, {:.4f}, {:.4f}; n=1e4 tau=1 {:.4f} vs tau=16 {:.4f}", m3, m4, m5, a,
                         b);
  o.csv = samples_csv(t4) + samples_csv(tt);
  return o;
}

Outcome c9_min_degree(int jobs) {
  const double tau = 1.0;
  const auto lo = min_degree_diagnostic(1e5, tau, 0.5, 30, 9001, jobs);
  const auto hi = min_degree_diagnostic(1e5, tau, 3 * lln_limit(tau), 30, 9002, jobs);
  Outcome o;
  o.pass = *lo.fraction >= 0.9 && *hi.fraction <= 0.1;
  o.detail = fmt::format("alpha=0.5: {:.3f}; alpha={}: {:.3f}", *lo.fraction, 3 * lln_limit(tau), *hi.fraction);
  for (const auto* m : {&lo, &hi})
    for (auto bit : m->per_trial) o.csv += std::to_string(bit) + '\n';
  return o;
}

std::string check_csv(const CouplingCheck& c) {
  std::string s;
  for (const auto* m : {&c.t_marginal, &c.v_marginal, &c.w_marginal})
    s += fmt::format("{},{},{}\n", m->trials, m->successes, format_real(m->p_value));
  s += fmt::format("{},{}\n", c.implication_violations, format_real(c.v_pair_correlation));
  return s;
}

Outcome c10_coupling(int jobs) {
  // derived from the bound pipeline at d=2, r=1, lambda=2 lambda_c, alpha=0.5
  const double lc = kLambdaC2, delta = lc, alpha = 0.5;
  const double s = s_of_alpha(1.0, delta, lc, alpha, 2);
  const double eps = epsilon_of_alpha(1.0, delta, lc, alpha, 2);
  const double t = (1.0 + s) / 2;
  const double pl = p_occupy(lc + delta, eps, 2), pn = p_occupy(lc + alpha * delta, eps, 2);
  const auto derived = check_coupled_fields(default_window(2), eps, t, pl, pn, 12, 10001, jobs);
  // small ball, q far from 1
  const auto small = check_coupled_fields(default_window(2), 1.0, 1.0, 0.5, 5e-7, 12, 10002, jobs);
  auto ok = [](const CouplingCheck& c) {
    return c.t_marginal.p_value >= 1e-3 && c.v_marginal.p_value >= 1e-3 && c.w_marginal.p_value >= 1e-3 &&
           c.implication_violations == 0;
  };
  Outcome o;
  o.pass = ok(derived) && ok(small);
  auto line = [](const char* name, const CouplingCheck& c) {
    return fmt::format("{}: p(T)={:.3g} p(V)={:.3g} p(W)={:.3g} q={:.4g} n={} violations={}", name,
                       c.t_marginal.p_value, c.v_marginal.p_value, c.w_marginal.p_value, c.w_marginal.expected,
                       c.w_marginal.trials, c.implication_violations);
  };
  o.detail = line("derived", derived) + "; " + line("small-ball", small);
  o.csv = check_csv(derived) + check_csv(small);
  return o;
}

struct Criterion {
  std::string name;
  std::function<Outcome(int)> run;
  double limit_seconds;  // 0 = none
};

}  // namespace

int main() {
  Shared shared;
  std::vector<Criterion> all = {
      {"C1 rho oracle equivalence", c1_rho_oracle, 10.0},
      {"C2 G1 equivalence", c2_g1_equivalence, 10.0},
      {"C3 one-type critical intensity", [&](int j) { return c3_lambda_c(j, shared); }, 0},
      {"C4 scaling law", [&](int j) { return c4_scaling(j, shared); }, 0},
      {"C5 mu_c finite above, absent below", [&](int j) { return c5_mu_c(j, shared); }, 0},
      {"C6 bound dominance", [&](int j) { return c6_bound_dominance(j, shared); }, 0},
      {"C7 divergence rate", c7_rate, 1.0},
      {"C8 threshold trend", c8_lln, 0},
      {"C9 minimum degree", c9_min_degree, 0},
      {"C10 coupling laws", c10_coupling, 0},
  };

  const int threads = omp_get_max_threads();
  const int alt = threads > 1 ? 1 : 3;
  std::vector<std::string> csv(all.size());
  bool all_pass = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run(0);
    } catch (const std::exception& ex) {
      o.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (all[i].limit_seconds > 0 && secs >= all[i].limit_seconds) {
      o.pass = false;
      o.detail += fmt::format(" [limit {} s exceeded]", all[i].limit_seconds);
    }
    csv[i] = o.csv;
    all_pass = all_pass && o.pass;
    std::cout << fmt::format("{} {}: {} ({:.1f} s)", o.pass ? "PASS" : "FAIL", all[i].name, o.detail, secs)
              << std::endl;
  }

  // rerun everything on a different thread count
  const auto start = std::chrono::steady_clock::now();
  std::size_t same = 0;
  std::string diffs;
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::string again;
    try {
      again = all[i].run(alt).csv;
    } catch (const std::exception& ex) {
      again = ex.what();
    }
    if (!csv[i].empty() && again == csv[i])
      ++same;
    else
      diffs += " " + all[i].name.substr(0, all[i].name.find(' '));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass11 = same == all.size();
  all_pass = all_pass && pass11;
  std::cout << fmt::format("{} C11 reproducibility: {}/{} criteria byte-identical, jobs={} vs jobs={}{} ({:.1f} s)",
                           pass11 ? "PASS" : "FAIL", same, all.size(), threads, alt,
                           diffs.empty() ? "" : "; differs:" + diffs, secs)
            << std::endl;
  return all_pass ? 0 : 1;
}
