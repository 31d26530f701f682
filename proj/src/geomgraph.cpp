#include "abperc/geomgraph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>

#include "abperc/errors.hpp"

namespace abperc {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --components_;
  return true;
}

NeighborGrid::NeighborGrid(const Region& region, std::span<const double> coords, double radius)
    : region_(region), radius_(radius) {
  if (!(radius > 0.0)) throw ParameterError("neighbour radius must be positive");
  if (region.dim > kMaxDim) throw ParameterError("neighbour grid supports dim <= 8");
  const auto d = static_cast<std::size_t>(region.dim);
  const std::size_t n = coords.size() / d;

  auto m = static_cast<std::size_t>(std::max(1.0, std::floor(region.side / radius)));
  // keep the cell table comparable to the point count
  const double budget = std::max(64.0, 2.0 * static_cast<double>(n));
  const auto cap = static_cast<std::size_t>(std::floor(std::pow(budget, 1.0 / region.dim)));
  m = std::max<std::size_t>(1, std::min(m, cap));
  if (region.kind == RegionKind::torus && m < 3) m = 1;
  m_ = m;
  cell_ = region.side / static_cast<double>(m_);
  if (m_ > 1 && cell_ < radius) {
    // floor(side / radius) cells can be a hair too small after division
    --m_;
    if (region.kind == RegionKind::torus && m_ < 3) m_ = 1;
    cell_ = region.side / static_cast<double>(m_);
  }

  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= m_;
  std::vector<std::size_t> cell_of(n);
  start_.assign(total + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < d; ++k) c = c * m_ + cell_coord(coords[j * d + k]);
    cell_of[j] = c;
    ++start_[c + 1];
  }
  std::partial_sum(start_.begin(), start_.end(), start_.begin());
  order_.resize(n);
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t j = 0; j < n; ++j) order_[fill[cell_of[j]]++] = j;
  sorted_.resize(n * d);
  for (std::size_t s = 0; s < n; ++s)
    std::copy_n(coords.begin() + static_cast<std::ptrdiff_t>(order_[s] * d), d,
                sorted_.begin() + static_cast<std::ptrdiff_t>(s * d));
}

std::size_t NeighborGrid::cell_coord(double x) const {
  if (m_ == 1) return 0;
  const auto c = static_cast<std::size_t>(std::max(0.0, std::floor(x / cell_)));
  return std::min(c, m_ - 1);
}

Graph Graph::from_lists(std::vector<std::vector<std::size_t>> lists) {
  Graph g;
  g.offsets.assign(lists.size() + 1, 0);
  for (std::size_t v = 0; v < lists.size(); ++v) {
    std::sort(lists[v].begin(), lists[v].end());
    g.offsets[v + 1] = g.offsets[v] + lists[v].size();
  }
  g.targets.reserve(g.offsets.back());
  for (auto& l : lists) g.targets.insert(g.targets.end(), l.begin(), l.end());
  return g;
}

namespace {

void check_pair(const PointPattern& x, const PointPattern& y, double r) {
  if (!(x.region() == y.region())) throw ParameterError("patterns live in different regions");
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
}

std::vector<std::vector<std::size_t>> transpose(const Graph& g, std::size_t right_size) {
  std::vector<std::vector<std::size_t>> out(right_size);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j : g.neighbors(i)) out[j].push_back(i);
  return out;
}

// Neighbours in `other` of each vertex in `self`, then the two-hop graph on self.
Graph common_neighbour_graph(const Graph& self_adj, const Graph& other_adj) {
  const std::size_t n = self_adj.size();
  std::vector<std::vector<std::size_t>> lists(n);
  std::vector<std::size_t> mark(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    mark[i] = i;
    for (std::size_t mid : self_adj.neighbors(i))
      for (std::size_t k : other_adj.neighbors(mid))
        if (mark[k] != i) {
          mark[k] = i;
          lists[i].push_back(k);
        }
  }
  return Graph::from_lists(std::move(lists));
}

void require_box(const Region& region, int axis) {
  if (region.kind != RegionKind::box) throw DomainError("crossing is undefined on a torus");
  if (axis < 0 || axis >= region.dim) throw ParameterError("crossing axis out of range");
}

bool spanning_label(const Components& comp, std::span<const double> axis_values, double margin,
                    double side) {
  std::vector<std::uint8_t> flags(comp.count, 0);
  for (std::size_t v = 0; v < axis_values.size(); ++v) {
    auto& f = flags[comp.labels[v]];
    if (axis_values[v] <= margin) f |= 1;
    if (axis_values[v] >= side - margin) f |= 2;
    if (f == 3) return true;
  }
  return false;
}

}  // namespace

BipartiteGraph build_bipartite(const PointPattern& x, const PointPattern& y, double r) {
  check_pair(x, y, r);
  BipartiteGraph g{x, y, r, {}, {}};
  std::vector<std::vector<std::size_t>> lists(x.size());
  if (!y.empty()) {
    const NeighborGrid grid(y, r);
    for (std::size_t i = 0; i < x.size(); ++i)
      grid.for_each_within(x.point(i), [&](std::size_t j, double) { lists[i].push_back(j); });
  }
  g.left_adj = Graph::from_lists(std::move(lists));
  g.right_adj = Graph::from_lists(transpose(g.left_adj, y.size()));
  return g;
}

Graph build_unigraph(const PointPattern& x, double s) {
  if (!(s > 0.0)) throw ParameterError("radius must be positive");
  std::vector<std::vector<std::size_t>> lists(x.size());
  if (!x.empty()) {
    const NeighborGrid grid(x, s);
    for (std::size_t i = 0; i < x.size(); ++i)
      grid.for_each_within(x.point(i), [&](std::size_t j, double) {
        if (j != i) lists[i].push_back(j);
      });
  }
  return Graph::from_lists(std::move(lists));
}

Components components(const Graph& g) {
  DisjointSets sets(g.size());
  for (std::size_t v = 0; v < g.size(); ++v)
    for (std::size_t w : g.neighbors(v)) sets.unite(v, w);
  Components out;
  out.labels.resize(g.size());
  std::vector<std::size_t> label_of_root(g.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t v = 0; v < g.size(); ++v) {
    auto& l = label_of_root[sets.find(v)];
    if (l == std::numeric_limits<std::size_t>::max()) l = out.count++;
    out.labels[v] = l;
  }
  return out;
}

Components components(const BipartiteGraph& g) {
  const std::size_t nx = g.left.size();
  std::vector<std::vector<std::size_t>> lists(nx + g.right.size());
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j : g.left_adj.neighbors(i)) {
      lists[i].push_back(nx + j);
      lists[nx + j].push_back(i);
    }
  return components(Graph::from_lists(std::move(lists)));
}

Graph build_g1(const PointPattern& x, const PointPattern& y, double r) {
  const BipartiteGraph b = build_bipartite(x, y, r);
  return common_neighbour_graph(b.left_adj, b.right_adj);
}

Graph build_g2(const PointPattern& x, const PointPattern& y, double r) {
  const BipartiteGraph b = build_bipartite(x, y, r);
  return common_neighbour_graph(b.right_adj, b.left_adj);
}

namespace {

// All `self` vertices in one component of G(self, other, r).
bool one_side_connected(const PointPattern& self, const PointPattern& other, double r) {
  if (self.size() <= 1) return true;
  if (other.empty()) return false;
  const std::size_t n = self.size();
  DisjointSets sets(n + other.size());
  const NeighborGrid grid(other, r);
  for (std::size_t i = 0; i < n; ++i)
    grid.for_each_within(self.point(i), [&](std::size_t j, double) { sets.unite(i, n + j); });
  const std::size_t root = sets.find(0);
  for (std::size_t i = 1; i < n; ++i)
    if (sets.find(i) != root) return false;
  return true;
}

}  // namespace

bool is_connected_g1(const PointPattern& x, const PointPattern& y, double r) {
  check_pair(x, y, r);
  return one_side_connected(x, y, r);
}

bool is_connected_g2(const PointPattern& x, const PointPattern& y, double r) {
  check_pair(x, y, r);
  return one_side_connected(y, x, r);
}

std::size_t min_degree(const Graph& g) {
  if (g.size() == 0) throw DomainError("minimum degree of an empty graph");
  std::size_t best = g.degree(0);
  for (std::size_t v = 1; v < g.size(); ++v) best = std::min(best, g.degree(v));
  return best;
}

bool g1_has_isolated_vertex(const PointPattern& x, const PointPattern& y, double r) {
  check_pair(x, y, r);
  if (x.empty()) throw DomainError("minimum degree of an empty graph");
  // x is isolated in G1 iff every B-neighbour of x has x as its only A-neighbour.
  std::vector<std::uint32_t> a_degree(y.size(), 0);
  if (y.empty()) return true;
  const NeighborGrid grid(y, r);
  for (std::size_t i = 0; i < x.size(); ++i)
    grid.for_each_within(x.point(i), [&](std::size_t j, double) { ++a_degree[j]; });
  for (std::size_t i = 0; i < x.size(); ++i) {
    bool isolated = true;
    grid.for_each_within(x.point(i), [&](std::size_t j, double) {
      if (a_degree[j] > 1) isolated = false;
    });
    if (isolated) return true;
  }
  return false;
}

bool crossing_exists(const Graph& g, const PointPattern& x, double margin, int axis) {
  require_box(x.region(), axis);
  if (g.size() != x.size()) throw ParameterError("graph and pattern sizes differ");
  const Components comp = components(g);
  std::vector<double> values(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) values[i] = x.coord(i, axis);
  return spanning_label(comp, values, margin, x.region().side);
}

bool crossing_exists(const BipartiteGraph& g, double margin, int axis) {
  require_box(g.left.region(), axis);
  const Components comp = components(g);
  std::vector<double> values;
  values.reserve(g.left.size() + g.right.size());
  for (std::size_t i = 0; i < g.left.size(); ++i) values.push_back(g.left.coord(i, axis));
  for (std::size_t j = 0; j < g.right.size(); ++j) values.push_back(g.right.coord(j, axis));
  return spanning_label(comp, values, margin, g.left.region().side);
}

void write_edges_csv(std::ostream& out, const BipartiteGraph& g) {
  out << "left,right\n";
  for (std::size_t i = 0; i < g.left_adj.size(); ++i)
    for (std::size_t j : g.left_adj.neighbors(i)) out << i << ',' << j << '\n';
}

}  // namespace abperc
