#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace abperc {

enum class RegionKind { box, torus };

/// The observation window [0, side)^dim, either with the Euclidean metric
/// (box) or the wraparound metric (torus).
struct Region {
  RegionKind kind = RegionKind::box;
  double side = 1.0;
  int dim = 2;

  static Region box(double side, int dim = 2);
  static Region torus(double side, int dim = 2);

  double volume() const;
  /// Squared distance under the region metric.
  double dist2(std::span<const double> a, std::span<const double> b) const;
  /// Largest possible distance between two points of the region.
  double diameter() const;

  friend bool operator==(const Region&, const Region&) = default;
};

/// A finite point configuration in a region. Coordinates are stored
/// row-major, `dim` per point. Immutable once produced by a sampler.
class PointPattern {
 public:
  PointPattern() = default;
  PointPattern(Region region, std::vector<double> coords, double intensity = 0.0,
               std::uint64_t seed = 0);

  const Region& region() const { return region_; }
  int dim() const { return region_.dim; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(region_.dim); }
  bool empty() const { return coords_.empty(); }
  double intensity() const { return intensity_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(region_.dim),
            static_cast<std::size_t>(region_.dim)};
  }
  double coord(std::size_t i, int axis) const {
    return coords_[i * static_cast<std::size_t>(region_.dim) + static_cast<std::size_t>(axis)];
  }
  std::span<const double> coords() const { return coords_; }

  /// Same points with every coordinate and the region side multiplied by c.
  PointPattern scaled(double c) const;
  /// Copy with one point appended / removed.
  PointPattern with_point(std::span<const double> p) const;
  PointPattern without_point(std::size_t i) const;

 private:
  Region region_{};
  std::vector<double> coords_;
  double intensity_ = 0.0;
  std::uint64_t seed_ = 0;
};

/// Homogeneous Poisson process of the given intensity on the region.
/// Deterministic in (region, intensity, seed).
PointPattern sample_poisson(const Region& region, double intensity, std::uint64_t seed);

enum class Stream : std::uint64_t { A = 0, B = 1 };

/// Monotone coupling of finite Poisson processes across intensities:
/// a sequence of i.i.d. uniform points X_1, X_2, ... together with an
/// independent unit-rate counting process N. The pattern at intensity a is
/// {X_1, ..., X_{N(a * volume)}}, so patterns are nested in a.
///
/// Everything is counter-based: X_i is a hash of (seed, stream, i), and the
/// counting process is cut into blocks of fixed mass whose Poisson counts
/// are cached lazily (geometric growth). Point i and N(t) therefore never
/// depend on the order of queries.
class CoupledSampler {
 public:
  static constexpr double kBlockMass = 256.0;

  CoupledSampler(Region region, std::uint64_t seed, Stream stream);

  const Region& region() const { return region_; }
  std::uint64_t seed() const { return seed_; }
  Stream stream() const { return stream_; }

  /// N(intensity * volume): number of points at this intensity.
  std::uint64_t count(double intensity);
  /// Writes the coordinates of X_{i+1} (0-based i) into `out` (size dim).
  void point(std::uint64_t i, std::span<double> out) const;

 private:
  std::uint64_t count_mass(double mass);
  void extend_blocks(std::size_t blocks);

  Region region_;
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t point_key_;
  std::uint64_t count_key_;
  // block_prefix_[j] = number of events with time < j * kBlockMass.
  std::vector<std::uint64_t> block_prefix_{0};
};

/// {X_1, ..., X_{N(intensity)}} from the sampler; nested in intensity.
PointPattern coupled_prefix(CoupledSampler& sampler, double intensity);

/// CSV: header `index,x1,...,xd`, one point per row, 17 significant digits.
void write_csv(std::ostream& out, const PointPattern& pattern);

}  // namespace abperc
