#include "abperc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "abperc/bounds.hpp"
#include "abperc/connectivity.hpp"
#include "abperc/csv.hpp"
#include "abperc/errors.hpp"
#include "abperc/latticecoupling.hpp"
#include "abperc/percolation.hpp"
#include "abperc/pointprocess.hpp"

namespace abperc {

namespace {

using nlohmann::json;

struct Global {
  std::uint64_t seed = 1;
  std::string out = "abperc";
  int jobs = 0;
};

json real(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open output file " + path);
  return f;
}

void write_summary(const Global& g, const CLI::App& app, const std::string& subcommand,
                   json result) {
  json doc;
  doc["subcommand"] = subcommand;
  doc["seed"] = g.seed;
  doc["config"] = app.config_to_str(true, false);
  doc["generated"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  doc["result"] = std::move(result);
  auto f = open_output(g.out + ".summary.json");
  f << doc.dump(2) << '\n';
}

json estimate_json(const CriticalEstimate& e) {
  return {{"parameter", e.parameter},
          {"percolation_detected", e.percolation_detected},
          {"estimate", real(e.estimate)},
          {"bracket", {real(e.low), real(e.high)}},
          {"side", e.side},
          {"trials_per_probe", e.trials},
          {"target", e.target},
          {"r", e.r},
          {"companion_lambda", e.companion},
          {"tol", e.tol},
          {"dim", e.dim},
          {"probes", e.probes.size()}};
}

GraphKind parse_graph(const std::string& s) {
  if (s == "one-type") return GraphKind::one_type;
  if (s == "ab") return GraphKind::ab;
  throw ParameterError("unknown graph kind " + s);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continuum AB percolation and AB random geometric graph experiments", "abperc"};
  app.set_config("--config", "", "key = value configuration file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out", g.out, "output path prefix")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (0 = all)")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "sample a homogeneous Poisson pattern");
  std::string region_kind = "box";
  double side = 1.0, intensity = 0.0;
  int dim = 2;
  bool coupled = false;
  sample->add_option("--region", region_kind, "box or torus")
      ->check(CLI::IsMember({"box", "torus"}))
      ->capture_default_str();
  sample->add_option("--side", side)->capture_default_str();
  sample->add_option("--dim", dim)->capture_default_str();
  sample->add_option("--intensity", intensity)->required();
  sample->add_flag("--coupled", coupled, "take the prefix of a coupled sampler (stream A)");

  // percolate
  auto* percolate = app.add_subcommand(
      "percolate", "crossing probability, or the pseudo-critical lambda of G(P, 2r) by bisection");
  std::string graph = "one-type";
  double r = 1.0, pside = 30.0, tol = 0.02, lambda_low = 0.05, lambda_high = 1.0, target = 0.5;
  std::size_t trials = 400;
  std::optional<double> lambda_opt, mu_opt;
  int pdim = 2;
  percolate->add_option("--graph", graph, "one-type or ab")
      ->check(CLI::IsMember({"one-type", "ab"}))
      ->capture_default_str();
  percolate->add_option("--r", r, "half the one-type connection distance / AB radius")
      ->capture_default_str();
  percolate->add_option("--side", pside)->capture_default_str();
  percolate->add_option("--trials", trials)->capture_default_str();
  percolate->add_option("--tol", tol)->capture_default_str();
  percolate->add_option("--lambda", lambda_opt, "evaluate a single crossing probability");
  percolate->add_option("--mu", mu_opt, "B intensity for --graph ab");
  percolate->add_option("--lambda-low", lambda_low, "initial bracket, units of r^-d")
      ->capture_default_str();
  percolate->add_option("--lambda-high", lambda_high, "initial bracket, units of r^-d")
      ->capture_default_str();
  percolate->add_option("--target", target)->capture_default_str();
  percolate->add_option("--dim", pdim)->capture_default_str();

  // mu-c
  auto* muc = app.add_subcommand("mu-c", "pseudo-critical B intensity of G(P, Q, r)");
  double mr = 1.0, mside = 30.0, mtol = 0.05, mu_max = 1e6, mu_start = 1.0, mtarget = 0.5;
  std::optional<double> mlambda, mlambda_c, mfactor;
  std::size_t mtrials = 400;
  int mdim = 2;
  muc->add_option("--r", mr)->capture_default_str();
  muc->add_option("--lambda", mlambda, "A intensity");
  muc->add_option("--lambda-c", mlambda_c, "reference lambda_c(2r) for --lambda-factor");
  muc->add_option("--lambda-factor", mfactor, "A intensity as a multiple of --lambda-c");
  muc->add_option("--side", mside)->capture_default_str();
  muc->add_option("--trials", mtrials)->capture_default_str();
  muc->add_option("--tol", mtol)->capture_default_str();
  muc->add_option("--mu-max", mu_max)->capture_default_str();
  muc->add_option("--mu-start", mu_start)->capture_default_str();
  muc->add_option("--target", mtarget)->capture_default_str();
  muc->add_option("--dim", mdim)->capture_default_str();

  // bound
  auto* bound = app.add_subcommand("bound", "explicit upper bound on mu_c(r, lambda)");
  int bd = 2;
  double br = 1.0, blambda = 0.0, blambda_c = 0.0, alpha_lo = 0.01, alpha_hi = 0.99;
  std::size_t grid = 64;
  std::uint64_t guard = 10'000;
  bound->add_option("--d", bd)->capture_default_str();
  bound->add_option("--r", br)->capture_default_str();
  bound->add_option("--lambda", blambda)->required();
  bound->add_option("--lambda-c", blambda_c)->required();
  bound->add_option("--grid", grid, "alpha grid size")->capture_default_str();
  bound->add_option("--alpha-lo", alpha_lo)->capture_default_str();
  bound->add_option("--alpha-hi", alpha_hi)->capture_default_str();
  bound->add_option("--axis-guard", guard, "lattice enumeration guard")->capture_default_str();

  // lln
  auto* lln = app.add_subcommand("lln", "normalized AB connectivity threshold sweep");
  std::vector<double> ns{1000, 10000, 100000}, taus{4};
  std::size_t ltrials = 30;
  lln->add_option("--n", ns, "A intensities")->delimiter(',')->capture_default_str();
  lln->add_option("--tau", taus, "B/A intensity ratios")->delimiter(',')->capture_default_str();
  lln->add_option("--trials", ltrials)->capture_default_str();

  // mindeg
  auto* mindeg = app.add_subcommand("mindeg", "fraction of trials where G1 has an isolated vertex");
  double dn = 1e5, dtau = 1.0, dalpha = 0.5;
  std::size_t dtrials = 30;
  mindeg->add_option("--n", dn)->capture_default_str();
  mindeg->add_option("--tau", dtau)->capture_default_str();
  mindeg->add_option("--alpha", dalpha, "n pi r^2 / log n")->capture_default_str();
  mindeg->add_option("--trials", dtrials)->capture_default_str();

  // couple-test
  auto* couple = app.add_subcommand("couple-test", "sample and test the coupled lattice fields");
  std::vector<long long> window{128, 128};
  double ceps = 0.0, ct = 0.0, cpl = 0.0, cpn = 0.0;
  std::optional<double> clambda, clambda_c, calpha;
  double cr = 1.0;
  std::size_t cfields = 12;
  bool dump = false;
  couple->add_option("--window", window, "sites per axis")->delimiter(',')->capture_default_str();
  couple->add_option("--epsilon", ceps);
  couple->add_option("--t", ct);
  couple->add_option("--p-lambda", cpl);
  couple->add_option("--p-nu", cpn);
  couple->add_option("--lambda", clambda, "derive epsilon, t, p from the bound pipeline");
  couple->add_option("--lambda-c", clambda_c);
  couple->add_option("--alpha", calpha);
  couple->add_option("--r", cr)->capture_default_str();
  couple->add_option("--fields", cfields)->capture_default_str();
  couple->add_flag("--dump", dump, "also write the first field to <out>.field.csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sample) {
      const Region region = region_kind == "box" ? Region::box(side, dim) : Region::torus(side, dim);
      PointPattern p;
      if (coupled) {
        CoupledSampler s(region, g.seed, Stream::A);
        p = coupled_prefix(s, intensity);
      } else {
        p = sample_poisson(region, intensity, g.seed);
      }
      auto f = open_output(g.out + ".csv");
      write_csv(f, p);
      write_summary(g, app, "sample",
                    {{"points", p.size()}, {"intensity", intensity}, {"side", side},
                     {"dim", dim}, {"region", region_kind}});
    } else if (*percolate) {
      if (lambda_opt) {
        const GraphKind kind = parse_graph(graph);
        const double mu = mu_opt.value_or(0.0);
        const auto p = crossing_probability(kind, *lambda_opt, mu, r, pside, trials, g.seed, g.jobs,
                                            pdim);
        auto f = open_output(g.out + ".csv");
        f << "graph,lambda,mu,trials,successes,probability,ci_low,ci_high\n"
          << graph << ',' << format_real(*lambda_opt) << ',' << format_real(mu) << ','
          << p.trials << ',' << p.successes << ',' << format_real(p.value) << ','
          << format_real(p.ci_low) << ',' << format_real(p.ci_high) << '\n';
        write_summary(g, app, "percolate",
                      {{"probability", p.value}, {"ci", {p.ci_low, p.ci_high}},
                       {"successes", p.successes}, {"trials", p.trials}});
        out << "crossing probability " << format_real(p.value) << '\n';
      } else {
        if (graph != "one-type") throw ParameterError("bisection needs --graph one-type; use mu-c");
        LambdaSearch search{lambda_low, lambda_high, target, pdim, g.jobs};
        const auto est = estimate_lambda_c(r, pside, trials, tol, g.seed, search);
        auto f = open_output(g.out + ".csv");
        write_probe_csv(f, est);
        write_summary(g, app, "percolate", estimate_json(est));
        out << "lambda_c estimate " << format_real(est.estimate) << " bracket ["
            << format_real(est.low) << ", " << format_real(est.high) << "]\n";
      }
    } else if (*muc) {
      double lam = 0.0;
      if (mlambda) {
        lam = *mlambda;
      } else if (mfactor && mlambda_c) {
        lam = *mfactor * *mlambda_c;
      } else {
        throw ParameterError("mu-c needs --lambda or --lambda-factor with --lambda-c");
      }
      MuSearch search{mu_start, mu_max, mtarget, mdim, g.jobs};
      const auto est = estimate_mu_c(mr, lam, mside, mtrials, mtol, g.seed, search);
      auto f = open_output(g.out + ".csv");
      write_probe_csv(f, est);
      write_summary(g, app, "mu-c", estimate_json(est));
      if (est.percolation_detected)
        out << "mu_c estimate " << format_real(est.estimate) << '\n';
      else
        out << "no percolation detected up to mu_max " << format_real(mu_max) << '\n';
    } else if (*bound) {
      BoundInputs in{bd, br, blambda, blambda_c, default_alpha_grid(grid, alpha_lo, alpha_hi)};
      if (in.alphas.empty()) throw ParameterError("alpha grid must be nonempty");
      const auto rep = mu_bound_optimized(in, guard);
      auto f = open_output(g.out + ".csv");
      write_bound_csv(f, rep);
      const auto& best = rep.rows[rep.best_relaxed];
      json result{{"mu_hat", rep.mu_hat},
                  {"alpha_opt", best.alpha},
                  {"epsilon_opt", best.epsilon},
                  {"asymptotic_constant", rep.asymptotic},
                  {"delta", in.delta()},
                  {"grid_points", rep.rows.size()}};
      if (rep.any_exact) {
        result["mu_hat_exact_delta"] = rep.mu_hat_exact;
        result["alpha_opt_exact_delta"] = rep.rows[rep.best_exact].alpha;
      }
      write_summary(g, app, "bound", result);
      out << "mu_c upper bound " << format_real(rep.mu_hat) << '\n';
    } else if (*lln) {
      const auto table = lln_sweep(ns, taus, ltrials, g.seed, g.jobs);
      auto f = open_output(g.out + ".csv");
      write_samples_csv(f, table);
      auto cells = open_output(g.out + ".cells.csv");
      write_summary_csv(cells, table);
      json cells_json = json::array();
      for (const auto& c : table.summary)
        cells_json.push_back({{"n", c.n}, {"tau", c.tau}, {"median", c.median},
                              {"q1", c.q1}, {"q3", c.q3}, {"limit", lln_limit(c.tau)}});
      write_summary(g, app, "lln", {{"cells", cells_json}, {"trials", ltrials}});
      for (const auto& c : table.summary)
        out << "n=" << format_real(c.n) << " tau=" << format_real(c.tau)
            << " median=" << format_real(c.median) << '\n';
    } else if (*mindeg) {
      const auto res = min_degree_diagnostic(dn, dtau, dalpha, dtrials, g.seed, g.jobs);
      auto f = open_output(g.out + ".csv");
      f << "trial,min_degree_zero\n";
      for (std::size_t t = 0; t < res.per_trial.size(); ++t)
        f << t << ',' << int(res.per_trial[t]) << '\n';
      json result{{"n", dn}, {"tau", dtau}, {"alpha", dalpha}, {"radius", res.radius},
                  {"trials", res.trials}, {"zero_degree", res.zero_degree}};
      result["fraction"] = res.fraction ? json(*res.fraction) : json(nullptr);
      write_summary(g, app, "mindeg", result);
      if (res.fraction) out << "fraction with minimum degree 0: " << format_real(*res.fraction) << '\n';
    } else if (*couple) {
      if (clambda || clambda_c || calpha) {
        if (!(clambda && clambda_c && calpha))
          throw ParameterError("derived mode needs --lambda, --lambda-c and --alpha");
        const int d = static_cast<int>(window.size());
        const double delta = *clambda - *clambda_c;
        ceps = epsilon_of_alpha(cr, delta, *clambda_c, *calpha, d);
        ct = 0.5 * (cr + s_of_alpha(cr, delta, *clambda_c, *calpha, d));
        cpl = p_occupy(*clambda, ceps, d);
        cpn = p_occupy(*clambda_c + *calpha * delta, ceps, d);
      }
      const auto chk = check_coupled_fields(window, ceps, ct, cpl, cpn, cfields, g.seed, g.jobs);
      auto f = open_output(g.out + ".csv");
      f << "field,trials,successes,expected,mean,p_value\n";
      auto row = [&](const char* name, const MarginalTest& m) {
        f << name << ',' << m.trials << ',' << m.successes << ',' << format_real(m.expected) << ','
          << format_real(m.mean) << ',' << format_real(m.p_value) << '\n';
      };
      row("T", chk.t_marginal);
      row("V", chk.v_marginal);
      row("W", chk.w_marginal);
      if (dump) {
        auto ff = open_output(g.out + ".field.csv");
        write_field_csv(ff, sample_coupled_fields(window, ceps, ct, cpl, cpn, g.seed));
      }
      write_summary(g, app, "couple-test",
                    {{"epsilon", ceps}, {"t", ct}, {"p_lambda", cpl}, {"p_nu", cpn},
                     {"fields", cfields}, {"implication_violations", chk.implication_violations},
                     {"v_pair_correlation", chk.v_pair_correlation},
                     {"tw_correlation", chk.tw_correlation},
                     {"p_values", {chk.t_marginal.p_value, chk.v_marginal.p_value,
                                   chk.w_marginal.p_value}}});
      out << "implication violations " << chk.implication_violations << '\n';
    }
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 1;
  } catch (const EstimationError& e) {
    err << "estimation error: " << e.what() << '\n';
    return 1;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace abperc
