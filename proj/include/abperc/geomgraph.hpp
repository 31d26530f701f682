#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "abperc/pointprocess.hpp"

namespace abperc {

/// Closed-ball edge rule ||x - y|| <= r. The comparison is done on the
/// correctly rounded distance so that it is monotone in the same quantity
/// reported by threshold computations.
inline bool within(double dist2, double r) { return std::sqrt(dist2) <= r; }

/// within() with the square root skipped away from the boundary of the ball.
class RadiusTest {
 public:
  explicit RadiusTest(double r) : r_(r), inner_(r * r * (1 - 4e-15)), outer_(r * r * (1 + 4e-15)) {}
  bool operator()(double dist2) const {
    if (dist2 <= inner_) return true;
    if (dist2 >= outer_) return false;
    return within(dist2, r_);
  }

 private:
  double r_, inner_, outer_;
};

/// Union-find with union by rank and path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0);

  std::size_t size() const { return parent_.size(); }
  std::size_t components() const { return components_; }

  std::size_t find(std::size_t v);
  /// Merges the sets of a and b; returns false if they were already merged.
  bool unite(std::size_t a, std::size_t b);
  bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::size_t components_ = 0;
};

/// Cell list over a point set for fixed-radius neighbour enumeration. Cell
/// side is at least the query radius, so a query touches at most 3^d cells.
class NeighborGrid {
 public:
  static constexpr int kMaxDim = 8;

  NeighborGrid(const Region& region, std::span<const double> coords, double radius);
  explicit NeighborGrid(const PointPattern& pattern, double radius)
      : NeighborGrid(pattern.region(), pattern.coords(), radius) {}

  double cell_side() const { return cell_; }
  std::size_t cells_per_axis() const { return m_; }

  /// Calls fn(j, dist2) for every indexed point j with ||p - x_j|| <= radius.
  template <class Fn>
  void for_each_within(std::span<const double> p, Fn&& fn) const {
    for_each_within(p, radius_, std::forward<Fn>(fn));
  }

  /// Same as for_each_within but with an explicit radius <= cell side.
  template <class Fn>
  void for_each_within(std::span<const double> p, double r, Fn&& fn) const {
    const RadiusTest inside(r);
    const bool planar = region_.dim == 2 && region_.kind == RegionKind::box;
    visit_cells(p, [&](std::size_t cell) {
      for (std::size_t s = start_[cell]; s < start_[cell + 1]; ++s) {
        const std::size_t j = order_[s];
        double d2;
        if (planar) {
          const double dx = p[0] - sorted_[2 * s];
          const double dy = p[1] - sorted_[2 * s + 1];
          d2 = dx * dx + dy * dy;
        } else {
          d2 = region_.dist2(p, slot(s));
        }
        if (inside(d2)) fn(j, d2);
      }
    });
  }

 private:
  std::span<const double> slot(std::size_t s) const {
    const auto d = static_cast<std::size_t>(region_.dim);
    return {sorted_.data() + s * d, d};
  }
  std::size_t cell_coord(double x) const;

  template <class Fn>
  void visit_cells(std::span<const double> p, Fn&& fn) const {
    if (m_ == 1) {
      fn(std::size_t{0});
      return;
    }
    const int d = region_.dim;
    const auto m = static_cast<long long>(m_);
    long long base[kMaxDim];
    long long off[kMaxDim];
    for (int k = 0; k < d; ++k) {
      base[k] = static_cast<long long>(cell_coord(p[k]));
      off[k] = -1;
    }
    for (;;) {
      bool valid = true;
      std::size_t cell = 0;
      for (int k = 0; k < d && valid; ++k) {
        long long c = base[k] + off[k];
        if (region_.kind == RegionKind::torus)
          c = (c + m) % m;
        else if (c < 0 || c >= m)
          valid = false;
        cell = cell * m_ + static_cast<std::size_t>(c);
      }
      if (valid) fn(cell);
      int k = 0;
      while (k < d && off[k] == 1) off[k++] = -1;
      if (k == d) break;
      ++off[k];
    }
  }

  Region region_;
  double radius_;
  double cell_ = 0.0;
  std::size_t m_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;  // slot -> original index
  std::vector<double> sorted_;      // coordinates in slot order
};

/// Undirected graph in compressed adjacency form.
struct Graph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> targets;

  std::size_t size() const { return offsets.size() - 1; }
  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const std::size_t> neighbors(std::size_t v) const {
    return {targets.data() + offsets[v], degree(v)};
  }
  std::size_t edge_count() const { return targets.size() / 2; }

  /// Builds from per-vertex neighbour lists (each list sorted on output).
  static Graph from_lists(std::vector<std::vector<std::size_t>> lists);
};

/// G(X, Y, r): left = type A points, right = type B points.
struct BipartiteGraph {
  PointPattern left;
  PointPattern right;
  double radius = 0.0;
  Graph left_adj;   // vertex i of left -> indices into right
  Graph right_adj;  // vertex j of right -> indices into left

  std::size_t edge_count() const { return left_adj.targets.size(); }
};

struct Components {
  std::vector<std::size_t> labels;  // labels numbered by first appearance
  std::size_t count = 0;
};

BipartiteGraph build_bipartite(const PointPattern& x, const PointPattern& y, double r);
/// G(X, s): one vertex class, edge iff ||x - x'|| <= s.
Graph build_unigraph(const PointPattern& x, double s);

Components components(const Graph& g);
/// Labels for left vertices 0..|X|-1 followed by right vertices.
Components components(const BipartiteGraph& g);

/// G1: vertices X, edge iff the pair has a common neighbour in G(X, Y, r).
Graph build_g1(const PointPattern& x, const PointPattern& y, double r);
/// G2: vertices Y, edge iff the pair has a common neighbour in G(X, Y, r).
Graph build_g2(const PointPattern& x, const PointPattern& y, double r);

/// Connectivity of G1 via the bipartite graph: all X vertices in one
/// component of G(X, Y, r). |X| <= 1 is connected.
bool is_connected_g1(const PointPattern& x, const PointPattern& y, double r);
bool is_connected_g2(const PointPattern& x, const PointPattern& y, double r);

std::size_t min_degree(const Graph& g);
/// True iff G1(X, Y, r) has a vertex of degree 0, without building G1.
bool g1_has_isolated_vertex(const PointPattern& x, const PointPattern& y, double r);

/// Some component has a vertex with axis coordinate <= margin and one with
/// axis coordinate >= side - margin. Box regions only.
bool crossing_exists(const Graph& g, const PointPattern& x, double margin, int axis = 0);
bool crossing_exists(const BipartiteGraph& g, double margin, int axis = 0);

/// Edge list CSV: `left,right`.
void write_edges_csv(std::ostream& out, const BipartiteGraph& g);

}  // namespace abperc
