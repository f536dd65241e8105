#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ctqw/errors.hpp"
#include "ctqw/random.hpp"

namespace ctqw {

using Edge = std::pair<std::size_t, std::size_t>;

/// Simple undirected unweighted graph on nodes 0..n-1.
///
/// Edges are stored canonically (i < j, sorted, unique), so two graphs with the same
/// edge set compare equal and serialize to the same bytes regardless of insertion order.
class Graph {
public:
  Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ == 0) throw InvalidArgument("Graph: node count must be positive");
    for (auto& [i, j] : edges_) {
      if (i == j) throw InvalidArgument("Graph: self-loop on node " + std::to_string(i));
      if (i >= n_ || j >= n_) throw InvalidArgument("Graph: edge endpoint out of range");
      if (i > j) std::swap(i, j);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    neighbors_.assign(n_, {});
    for (const auto& [i, j] : edges_) {
      neighbors_[i].push_back(j);
      neighbors_[j].push_back(i);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t degree(std::size_t i) const { return neighbors_.at(i).size(); }

  bool adjacent(std::size_t i, std::size_t j) const {
    const auto& nb = neighbors_.at(i);
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = neighbors_[i].size();
    return d;
  }

  double mean_degree() const { return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_); }

  Eigen::MatrixXd adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [i, j] : edges_) a(i, j) = a(j, i) = 1.0;
    return a;
  }

  /// Hop distances from `source`; unreachable nodes get SIZE_MAX.
  std::vector<std::size_t> bfs_distances(std::size_t source) const {
    constexpr auto unreached = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(n_, unreached);
    std::queue<std::size_t> frontier;
    dist.at(source) = 0;
    frontier.push(source);
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      for (auto v : neighbors_[u]) {
        if (dist[v] == unreached) {
          dist[v] = dist[u] + 1;
          frontier.push(v);
        }
      }
    }
    return dist;
  }

  bool connected() const {
    const auto dist = bfs_distances(0);
    return std::none_of(dist.begin(), dist.end(),
                        [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

inline Graph build_cycle(std::size_t n) {
  if (n < 3) throw InvalidArgument("build_cycle: need n >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, std::move(edges));
}

inline Graph build_complete(std::size_t n) {
  if (n < 2) throw InvalidArgument("build_complete: need n >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

/// Star with the hub at index 0.
inline Graph build_star(std::size_t n) {
  if (n < 3) throw InvalidArgument("build_star: need n >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
  return Graph(n, std::move(edges));
}

inline constexpr int kMaxConnectAttempts = 1000;

/// G(n, p) with p = avg_degree / (n - 1), resampled with a fresh sub-seed until connected.
inline Graph build_erdos_renyi(std::size_t n, double avg_degree, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("build_erdos_renyi: need n >= 2");
  if (!(avg_degree > 0.0) || avg_degree > static_cast<double>(n - 1))
    throw InvalidArgument("build_erdos_renyi: avg_degree must lie in (0, n-1]");
  const double p = avg_degree / static_cast<double>(n - 1);
  for (int attempt = 0; attempt < kMaxConnectAttempts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform() < p) edges.emplace_back(i, j);
    Graph g(n, std::move(edges));
    if (g.connected()) return g;
  }
  throw GenerationError("build_erdos_renyi: no connected sample in " + std::to_string(kMaxConnectAttempts) +
                        " attempts (p = " + std::to_string(p) + " too small)");
}

/// Ring lattice with k nearest neighbours, each lattice edge (u, u+j) rewired with
/// probability p_rewire to a uniformly chosen non-neighbour. A saturated node
/// (already adjacent to everyone) keeps its edge. Resampled until connected.
inline Graph build_watts_strogatz(std::size_t n, std::size_t k, double p_rewire, std::uint64_t seed) {
  if (k < 2 || k % 2 != 0) throw InvalidArgument("build_watts_strogatz: k must be even and >= 2");
  if (k >= n) throw InvalidArgument("build_watts_strogatz: need k < n");
  if (!(p_rewire >= 0.0 && p_rewire <= 1.0)) throw InvalidArgument("build_watts_strogatz: p_rewire must lie in [0, 1]");

  for (int attempt = 0; attempt < kMaxConnectAttempts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t j = 1; j <= k / 2; ++j) {
        const auto v = (u + j) % n;
        adj[u].insert(v);
        adj[v].insert(u);
      }
    for (std::size_t j = 1; j <= k / 2; ++j) {
      for (std::size_t u = 0; u < n; ++u) {
        const auto v = (u + j) % n;
        if (!adj[u].count(v)) continue; // already rewired away
        if (rng.uniform() >= p_rewire) continue;
        if (adj[u].size() >= n - 1) continue;
        std::size_t w;
        do {
          w = static_cast<std::size_t>(rng.index(n));
        } while (w == u || adj[u].count(w));
        adj[u].erase(v);
        adj[v].erase(u);
        adj[u].insert(w);
        adj[w].insert(u);
      }
    }
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u)
      for (auto v : adj[u])
        if (u < v) edges.emplace_back(u, v);
    Graph g(n, std::move(edges));
    if (g.connected()) return g;
  }
  throw GenerationError("build_watts_strogatz: no connected sample in " + std::to_string(kMaxConnectAttempts) + " attempts");
}

/// Preferential attachment grown from an m-node clique; node v >= m attaches to m
/// distinct earlier nodes drawn proportionally to degree.
inline Graph build_barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m >= n) throw InvalidArgument("build_barabasi_albert: need 1 <= m < n");
  Rng rng(seed);
  std::vector<Edge> edges;
  std::vector<std::size_t> endpoints; // node repeated once per incident edge
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      edges.emplace_back(i, j);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  for (std::size_t v = m; v < n; ++v) {
    std::vector<std::size_t> targets;
    while (targets.size() < m) {
      const std::size_t t = endpoints.empty() ? static_cast<std::size_t>(rng.index(v))
                                              : endpoints[static_cast<std::size_t>(rng.index(endpoints.size()))];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (auto t : targets) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Graph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Spectral and structural quantities
// ---------------------------------------------------------------------------

/// L = D - A.
inline Eigen::MatrixXd laplacian(const Graph& g) {
  const auto n = g.size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges()) {
    l(i, j) = l(j, i) = -1.0;
    l(i, i) += 1.0;
    l(j, j) += 1.0;
  }
  return l;
}

/// (n-1) / sum_j d(i, j) with BFS hop distances.
inline std::vector<double> closeness_centrality(const Graph& g) {
  const auto n = g.size();
  std::vector<double> c(n, 0.0);
  if (n == 1) return {1.0};
  for (std::size_t i = 0; i < n; ++i) {
    const auto dist = g.bfs_distances(i);
    std::size_t total = 0;
    for (auto d : dist) {
      if (d == std::numeric_limits<std::size_t>::max())
        throw InvalidArgument("closeness_centrality: graph is disconnected");
      total += d;
    }
    c[i] = static_cast<double>(n - 1) / static_cast<double>(total);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Initial-node policies
// ---------------------------------------------------------------------------

struct NodePolicy {
  enum class Kind { Random, HighestDegree, LowestDegree, HighestCloseness, ExplicitIndex };

  Kind kind = Kind::Random;
  std::size_t index = 0;   // ExplicitIndex only
  std::uint64_t seed = 0;  // Random only

  static NodePolicy random(std::uint64_t seed) { return {Kind::Random, 0, seed}; }
  static NodePolicy highest_degree() { return {Kind::HighestDegree, 0, 0}; }
  static NodePolicy lowest_degree() { return {Kind::LowestDegree, 0, 0}; }
  static NodePolicy highest_closeness() { return {Kind::HighestCloseness, 0, 0}; }
  static NodePolicy explicit_index(std::size_t k) { return {Kind::ExplicitIndex, k, 0}; }
};

/// Ties go to the smallest index.
inline std::size_t select_node(const Graph& g, const NodePolicy& policy) {
  const auto n = g.size();
  switch (policy.kind) {
  case NodePolicy::Kind::Random:
    return static_cast<std::size_t>(Rng(policy.seed).index(n));
  case NodePolicy::Kind::HighestDegree: {
    const auto d = g.degrees();
    return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  }
  case NodePolicy::Kind::LowestDegree: {
    const auto d = g.degrees();
    return static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
  }
  case NodePolicy::Kind::HighestCloseness: {
    const auto c = closeness_centrality(g);
    return static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  }
  case NodePolicy::Kind::ExplicitIndex:
    if (policy.index >= n)
      throw InvalidArgument("select_node: explicit index " + std::to_string(policy.index) +
                            " out of range for n = " + std::to_string(n));
    return policy.index;
  }
  throw InvalidArgument("select_node: unknown policy");
}

// ---------------------------------------------------------------------------
// Canonical JSON and hashing
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Graph& g) {
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back({i, j});
  return {{"n", g.size()}, {"edges", std::move(edges)}};
}

template <class Json>
Graph graph_from_json(const Json& j) {
  try {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidArgument("graph JSON: each edge must be a pair");
      edges.emplace_back(e[0].template get<std::size_t>(), e[1].template get<std::size_t>());
    }
    return Graph(j.at("n").template get<std::size_t>(), std::move(edges));
  } catch (const nlohmann::detail::exception& e) {
    throw InvalidArgument(std::string("graph JSON: ") + e.what());
  }
}

/// Compact canonical serialization: `{"n":3,"edges":[[0,1],[0,2],[1,2]]}`.
inline std::string canonical_json(const Graph& g) { return to_json(g).dump(); }

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
inline std::string graph_hash(const Graph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(g)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

} // namespace ctqw
