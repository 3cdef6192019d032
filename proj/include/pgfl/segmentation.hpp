#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/union_find.hpp"

namespace pgfl {

/// Partition of the n^2 ordered dyads into connected regions of constant
/// estimate on the C2-power graph. Dyad (i,j) has linear index i*n + j.
struct DyadPartition {
  std::size_t n = 0;
  std::vector<std::uint32_t> label;
  std::size_t num_segments = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> means;

  std::uint32_t segment_of(std::size_t i, std::size_t j) const { return label[i * n + j]; }
};

/// 1e-6 times the value range of P, the default merge tolerance.
inline double default_merge_tolerance(const Matrix& P) {
  if (P.size() == 0) return 0.0;
  return 1e-6 * (P.maxCoeff() - P.minCoeff());
}

/// Keeps a power edge iff the estimate differs by at most eps across it and
/// returns the connected components of the kept edges.
inline DyadPartition segment_dyads(const Matrix& P_hat, const Graph& g, double eps) {
  if (P_hat.rows() != P_hat.cols() || static_cast<std::size_t>(P_hat.rows()) != g.num_vertices())
    throw InputError("segment_dyads: dimension mismatch between estimate and graph");
  if (!(eps >= 0.0)) throw InputError("segment_dyads: eps must be >= 0");

  const std::size_t n = g.num_vertices();
  UnionFind uf(n * n);
  for_each_power_edge(g, [&](Dyad a, Dyad b) {
    if (std::abs(P_hat(a.row, a.col) - P_hat(b.row, b.col)) <= eps)
      uf.unite(static_cast<std::uint32_t>(dyad_index(a, n)), static_cast<std::uint32_t>(dyad_index(b, n)));
  });

  DyadPartition out;
  out.n = n;
  out.num_segments = uf.num_sets();
  out.label = uf.labels();
  out.sizes.assign(out.num_segments, 0);
  out.means.assign(out.num_segments, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto s = out.label[i * n + j];
      ++out.sizes[s];
      out.means[s] += P_hat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t s = 0; s < out.num_segments; ++s) out.means[s] /= static_cast<double>(out.sizes[s]);
  return out;
}

}  // namespace pgfl
