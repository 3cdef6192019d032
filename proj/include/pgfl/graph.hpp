#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pgfl/errors.hpp"
#include "pgfl/union_find.hpp"

namespace pgfl {

using Vertex = std::uint32_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Undirected edge. Stored edges always satisfy i < j.
struct Edge {
  Vertex i;
  Vertex j;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A node of the C2-power graph: the ordered pair (row, col).
struct Dyad {
  Vertex row;
  Vertex col;
  friend bool operator==(const Dyad&, const Dyad&) = default;
};

/// Row-major dyad linearization (i, j) -> i*n + j.
inline std::size_t dyad_index(Dyad d, std::size_t n) {
  return static_cast<std::size_t>(d.row) * n + d.col;
}

/// Sparse undirected simple graph. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Drops self loops and collapses duplicates in either orientation.
  /// Throws InputError if an endpoint is outside [0, n) or n == 0.
  static Graph build(std::size_t n, std::span<const Edge> raw_edges) {
    if (n == 0) throw InputError("graph must have at least one vertex");
    Graph g;
    g.n_ = n;
    g.edges_.reserve(raw_edges.size());
    for (const Edge& e : raw_edges) {
      if (e.i >= n || e.j >= n) {
        std::ostringstream msg;
        msg << "edge (" << e.i << "," << e.j << ") has endpoint outside [0," << n << ")";
        throw InputError(msg.str());
      }
      if (e.i == e.j) continue;
      g.edges_.push_back(e.i < e.j ? e : Edge{e.j, e.i});
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

    // CSR adjacency; neighbors come out sorted because edges are sorted and
    // the two passes fill lower then higher neighbors.
    std::vector<std::size_t> degree(n, 0);
    for (const Edge& e : g.edges_) {
      ++degree[e.i];
      ++degree[e.j];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
    g.adjacency_.resize(g.offsets_[n]);
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : g.edges_) g.adjacency_[fill[e.j]++] = e.i;
    for (const Edge& e : g.edges_) g.adjacency_[fill[e.i]++] = e.j;
    for (std::size_t v = 0; v < n; ++v)
      std::sort(g.adjacency_.begin() + g.offsets_[v], g.adjacency_.begin() + g.offsets_[v + 1]);

    UnionFind uf(n);
    for (const Edge& e : g.edges_) uf.unite(e.i, e.j);
    g.num_components_ = uf.num_sets();
    g.component_ = uf.labels();
    return g;
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  std::uint32_t component(Vertex v) const { return component_[v]; }
  std::span<const std::uint32_t> component_labels() const noexcept { return component_; }
  std::size_t num_components() const noexcept { return num_components_; }
  bool connected() const noexcept { return num_components_ == 1; }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adjacency_;
  std::vector<std::uint32_t> component_;
  std::size_t num_components_ = 0;
};

inline Graph build_graph(std::size_t n, std::span<const Edge> raw_edges) {
  return Graph::build(n, raw_edges);
}

inline Graph chain_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t v = 0; v + 1 < n; ++v)
    edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v + 1)});
  return Graph::build(n, edges);
}

/// Chain visiting vertices in the given order.
inline Graph chain_graph(std::span<const Vertex> order) {
  std::vector<Edge> edges;
  for (std::size_t t = 0; t + 1 < order.size(); ++t) edges.push_back({order[t], order[t + 1]});
  return Graph::build(order.size(), edges);
}

/// Edge incidence operator with rows (grad beta)_e = beta_i - beta_j for
/// stored edge e = (i, j), i < j.
class IncidenceOperator {
 public:
  explicit IncidenceOperator(const Graph& g) : graph_(&g) {}

  const Graph& graph() const noexcept { return *graph_; }
  std::size_t rows() const noexcept { return graph_->num_edges(); }
  std::size_t cols() const noexcept { return graph_->num_vertices(); }

  Vector apply(const Eigen::Ref<const Vector>& beta) const {
    if (static_cast<std::size_t>(beta.size()) != cols())
      throw InputError("incidence apply: vector length does not match vertex count");
    const auto edges = graph_->edges();
    Vector out(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
      out[static_cast<Eigen::Index>(e)] = beta[edges[e].i] - beta[edges[e].j];
    return out;
  }

  Vector apply_transpose(const Eigen::Ref<const Vector>& u) const {
    if (static_cast<std::size_t>(u.size()) != rows())
      throw InputError("incidence transpose: vector length does not match edge count");
    const auto edges = graph_->edges();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(cols()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out[edges[e].i] += u[static_cast<Eigen::Index>(e)];
      out[edges[e].j] -= u[static_cast<Eigen::Index>(e)];
    }
    return out;
  }

  /// Total variation sum over edges of |beta_i - beta_j|.
  double total_variation(const Eigen::Ref<const Vector>& beta) const {
    return apply(beta).lpNorm<1>();
  }

 private:
  const Graph* graph_;
};

/// Streams every edge of the C2-power graph exactly once without storing it.
/// For each stored edge (i, j) and each fixed coordinate k, yields the
/// row-direction edge ((k,i),(k,j)) and the column-direction edge
/// ((i,k),(j,k)). Only k in [k_begin, k_end) is visited, so the stream can be
/// split into blocks of the fixed coordinate. Total over all k: 2*n*m.
template <class Visitor>
void for_each_power_edge(const Graph& g, std::size_t k_begin, std::size_t k_end, Visitor&& visit) {
  k_end = std::min(k_end, g.num_vertices());
  for (std::size_t kk = k_begin; kk < k_end; ++kk) {
    const auto k = static_cast<Vertex>(kk);
    for (const Edge& e : g.edges()) {
      visit(Dyad{e.i, k}, Dyad{e.j, k});
      visit(Dyad{k, e.i}, Dyad{k, e.j});
    }
  }
}

template <class Visitor>
void for_each_power_edge(const Graph& g, Visitor&& visit) {
  for_each_power_edge(g, 0, g.num_vertices(), std::forward<Visitor>(visit));
}

inline std::size_t power_edge_count(const Graph& g) {
  return 2 * g.num_vertices() * g.num_edges();
}

/// Materializes G x G as an ordinary graph on n^2 dyads (row-major indices).
/// Only sensible for small n; used to build joint-solve references.
inline Graph power_graph(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<Edge> edges;
  edges.reserve(power_edge_count(g));
  for_each_power_edge(g, [&](Dyad a, Dyad b) {
    edges.push_back({static_cast<Vertex>(dyad_index(a, n)), static_cast<Vertex>(dyad_index(b, n))});
  });
  return Graph::build(n * n, edges);
}

// ---------------------------------------------------------------------------
// Graph file format: first line "n m", then m lines "i j" (0-based).

inline Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& why) -> InputError {
    return InputError("graph file line " + std::to_string(line_no) + ": " + why);
  };

  if (!next_line()) throw InputError("graph file is empty");
  long long n = -1, m = -1;
  {
    std::istringstream hdr(line);
    std::string rest;
    if (!(hdr >> n >> m) || (hdr >> rest) || n < 1 || m < 0)
      throw fail("expected header \"n m\" with n >= 1, m >= 0");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    if (!next_line()) throw fail("expected " + std::to_string(m) + " edges, found " + std::to_string(e));
    std::istringstream row(line);
    long long i = -1, j = -1;
    std::string rest;
    if (!(row >> i >> j) || (row >> rest)) throw fail("expected \"i j\"");
    if (i < 0 || j < 0 || i >= n || j >= n) throw fail("endpoint outside [0," + std::to_string(n) + ")");
    edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(j)});
  }
  if (next_line()) throw fail("unexpected trailing content");
  return Graph::build(static_cast<std::size_t>(n), edges);
}

inline Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file: " + path);
  return read_graph(in);
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const Edge& e : g.edges()) out << e.i << ' ' << e.j << '\n';
}

inline void write_graph_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file: " + path);
  write_graph(out, g);
}

}  // namespace pgfl
