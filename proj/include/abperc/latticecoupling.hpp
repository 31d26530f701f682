#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "abperc/pointprocess.hpp"

namespace abperc {

/// Occupied cubes Q_z = epsilon z + [0, epsilon)^d of a point pattern, as
/// integer lattice coordinates (row-major, sorted, unique).
struct SiteSet {
  int dim = 2;
  std::vector<long long> coords;
  bool truncated = false;  // side / epsilon not an integer: last cubes cut by the boundary

  std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
  std::span<const long long> site(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  bool contains(std::span<const long long> z) const;
};

SiteSet discretize(const PointPattern& pattern, double epsilon);

/// Integer offsets k != 0 with ||epsilon k|| <= t, in lexicographic order.
/// Its size equals delta_count(t, epsilon, d).
std::vector<long long> ball_offsets(double t, double epsilon, int d);

/// u ~ v: some lattice site w has ||w - u|| <= t and ||w - v|| <= t
/// (sites given in integer coordinates of epsilon Z^d).
bool site_related(std::span<const long long> u, std::span<const long long> v, double t,
                  double epsilon);

/// Realization of the coupled Bernoulli fields on a finite window of
/// epsilon Z^d. U bits are stored per source site u for every offset in the
/// t-ball, so V is exact on the whole window; W_v needs U_{u,v} from all u
/// in the ball of v and is exact only on interior sites.
struct SiteField {
  int dim = 2;
  std::vector<long long> extent;  // sites per axis
  double epsilon = 0.0;
  double t = 0.0;
  double p_lambda = 0.0;
  double p_nu = 0.0;
  double u_param = 0.0;  // (p_nu / p_lambda)^(1 / Delta)
  std::uint64_t delta_sites = 0;
  long long margin = 0;
  std::vector<long long> offsets;  // ball_offsets(t, epsilon, dim)
  std::vector<std::uint8_t> T, V, W, interior;
  std::vector<std::uint8_t> U;  // U[site * delta_sites + k] = U_{u, u + offset_k}

  std::size_t sites() const { return T.size(); }
  std::size_t index(std::span<const long long> z) const;
  std::vector<long long> coords(std::size_t site) const;
  bool in_window(std::span<const long long> z) const;
};

/// Default window 128 x 128 in two dimensions.
std::vector<long long> default_window(int d = 2);

SiteField sample_coupled_fields(const std::vector<long long>& window, double epsilon, double t,
                                double p_lambda, double p_nu, std::uint64_t seed);

/// Number of (u, v) pairs with V_u = 1, 0 < ||v - u|| <= t, v in the window,
/// interior v, and W_v = 0. Always zero for a correct construction.
std::size_t implication_violations(const SiteField& field);

/// Exact two-sided binomial p-value for `successes` out of `trials` under p.
double binomial_two_sided_p(std::size_t successes, std::size_t trials, double p);

struct MarginalTest {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double expected = 0.0;
  double mean = 0.0;
  double p_value = 1.0;
};

struct CouplingCheck {
  std::size_t fields = 0;
  MarginalTest t_marginal;  // against p_lambda
  MarginalTest v_marginal;  // against p_nu
  MarginalTest w_marginal;  // against q
  std::size_t implication_violations = 0;
  double v_pair_correlation = 0.0;  // V_u vs V_{u + e1}, disjoint pairs
  std::size_t v_pairs = 0;
  double tw_correlation = 0.0;      // T_u vs W_v with ||u - v|| > 2t
  std::size_t tw_pairs = 0;
};

/// Samples `fields` independent fields (sub-seeds of `seed`) and pools the
/// interior statistics.
CouplingCheck check_coupled_fields(const std::vector<long long>& window, double epsilon, double t,
                                   double p_lambda, double p_nu, std::size_t fields,
                                   std::uint64_t seed, int jobs = 0);

/// CSV: `site,z1..zd,T,V,W,interior`.
void write_field_csv(std::ostream& out, const SiteField& field);

}  // namespace abperc
