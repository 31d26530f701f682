#include "abperc/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "abperc/csv.hpp"
#include "abperc/errors.hpp"
#include "abperc/rng.hpp"

namespace abperc {

namespace {

constexpr std::uint64_t kPointTag = 0x706f696e74ULL;
constexpr std::uint64_t kCountTag = 0x636f756e74ULL;
constexpr std::uint64_t kSampleTag = 0x73616d706cULL;

void validate_region(const Region& r) {
  if (!(r.side > 0.0) || !std::isfinite(r.side)) throw ParameterError("region side must be positive");
  if (r.dim < 1) throw ParameterError("region dimension must be >= 1");
}

// u in [0,1) mapped into [0, side); guards the rare round-up to side.
double scale_into(double u, double side) {
  const double x = u * side;
  return x < side ? x : std::nextafter(side, 0.0);
}

std::uint64_t draw_poisson(double mean, Xoshiro256& eng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<std::uint64_t>(dist(eng));
}

}  // namespace

Region Region::box(double side, int dim) {
  Region r{RegionKind::box, side, dim};
  validate_region(r);
  return r;
}

Region Region::torus(double side, int dim) {
  Region r{RegionKind::torus, side, dim};
  validate_region(r);
  return r;
}

double Region::volume() const { return std::pow(side, dim); }

double Region::dist2(std::span<const double> a, std::span<const double> b) const {
  double acc = 0.0;
  for (int k = 0; k < dim; ++k) {
    double dx = std::abs(a[k] - b[k]);
    if (kind == RegionKind::torus) dx = std::min(dx, side - dx);
    acc += dx * dx;
  }
  return acc;
}

double Region::diameter() const {
  const double per_axis = kind == RegionKind::torus ? side / 2.0 : side;
  return per_axis * std::sqrt(static_cast<double>(dim));
}

PointPattern::PointPattern(Region region, std::vector<double> coords, double intensity,
                           std::uint64_t seed)
    : region_(region), coords_(std::move(coords)), intensity_(intensity), seed_(seed) {
  validate_region(region_);
  if (coords_.size() % static_cast<std::size_t>(region_.dim) != 0)
    throw ParameterError("coordinate count is not a multiple of the dimension");
  for (double x : coords_)
    if (!(x >= 0.0 && x < region_.side)) throw ParameterError("point outside the region");
}

PointPattern PointPattern::scaled(double c) const {
  if (!(c > 0.0)) throw ParameterError("scale factor must be positive");
  Region r = region_;
  r.side *= c;
  std::vector<double> xs(coords_.size());
  std::transform(coords_.begin(), coords_.end(), xs.begin(),
                 [&](double x) { return std::min(x * c, std::nextafter(r.side, 0.0)); });
  return PointPattern(r, std::move(xs), intensity_ / std::pow(c, region_.dim), seed_);
}

PointPattern PointPattern::with_point(std::span<const double> p) const {
  if (p.size() != static_cast<std::size_t>(region_.dim)) throw ParameterError("dimension mismatch");
  std::vector<double> xs = coords_;
  xs.insert(xs.end(), p.begin(), p.end());
  return PointPattern(region_, std::move(xs), intensity_, seed_);
}

PointPattern PointPattern::without_point(std::size_t i) const {
  if (i >= size()) throw ParameterError("point index out of range");
  std::vector<double> xs = coords_;
  const auto d = static_cast<std::ptrdiff_t>(region_.dim);
  xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(i) * d,
           xs.begin() + static_cast<std::ptrdiff_t>(i + 1) * d);
  return PointPattern(region_, std::move(xs), intensity_, seed_);
}

PointPattern sample_poisson(const Region& region, double intensity, std::uint64_t seed) {
  validate_region(region);
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw ParameterError("intensity must be nonnegative");
  Xoshiro256 eng(derive_seed(seed, {kSampleTag}));
  const std::uint64_t n = draw_poisson(intensity * region.volume(), eng);
  std::vector<double> coords(n * static_cast<std::uint64_t>(region.dim));
  for (double& x : coords) x = scale_into(eng.uniform(), region.side);
  return PointPattern(region, std::move(coords), intensity, seed);
}

CoupledSampler::CoupledSampler(Region region, std::uint64_t seed, Stream stream)
    : region_(region),
      seed_(seed),
      stream_(stream),
      point_key_(derive_seed(seed, {static_cast<std::uint64_t>(stream), kPointTag})),
      count_key_(derive_seed(seed, {static_cast<std::uint64_t>(stream), kCountTag})) {
  validate_region(region_);
}

void CoupledSampler::extend_blocks(std::size_t blocks) {
  // block_prefix_ holds blocks + 1 entries once extended.
  if (block_prefix_.size() > blocks) return;
  const std::size_t target = std::max(blocks + 1, 2 * block_prefix_.size());
  block_prefix_.reserve(target);
  for (std::size_t j = block_prefix_.size() - 1; j + 1 < target; ++j) {
    Xoshiro256 eng(derive_seed(count_key_, {j}));
    block_prefix_.push_back(block_prefix_.back() + draw_poisson(kBlockMass, eng));
  }
}

std::uint64_t CoupledSampler::count_mass(double mass) {
  const double blocks = mass / kBlockMass;
  if (blocks >= 1e12) throw ResourceError("coupled sampler: intensity too large");
  const double whole = std::floor(blocks);
  const double frac = blocks - whole;  // exact: fractional part extraction
  const auto j = static_cast<std::size_t>(whole);
  extend_blocks(j + 1);
  std::uint64_t n = block_prefix_[j];
  const std::uint64_t in_block = block_prefix_[j + 1] - block_prefix_[j];
  // Event times within block j are kBlockMass * (j + u_m) with u_m i.i.d. uniform.
  const std::uint64_t key = derive_seed(count_key_, {j, 1});
  for (std::uint64_t m = 0; m < in_block; ++m)
    if (hashed_unit(key, m) <= frac) ++n;
  return n;
}

std::uint64_t CoupledSampler::count(double intensity) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw ParameterError("intensity must be nonnegative");
  if (intensity == 0.0) return 0;
  return count_mass(intensity * region_.volume());
}

void CoupledSampler::point(std::uint64_t i, std::span<double> out) const {
  const auto d = static_cast<std::uint64_t>(region_.dim);
  for (std::uint64_t k = 0; k < d; ++k)
    out[k] = scale_into(hashed_unit(point_key_, i * d + k), region_.side);
}

PointPattern coupled_prefix(CoupledSampler& sampler, double intensity) {
  const std::uint64_t n = sampler.count(intensity);
  const auto d = static_cast<std::size_t>(sampler.region().dim);
  std::vector<double> coords(n * d);
  for (std::uint64_t i = 0; i < n; ++i)
    sampler.point(i, std::span<double>(coords.data() + i * d, d));
  return PointPattern(sampler.region(), std::move(coords), intensity, sampler.seed());
}

void write_csv(std::ostream& out, const PointPattern& pattern) {
  out << "index";
  for (int k = 1; k <= pattern.dim(); ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    out << i;
    for (double x : pattern.point(i)) out << ',' << format_real(x);
    out << '\n';
  }
}

}  // namespace abperc
