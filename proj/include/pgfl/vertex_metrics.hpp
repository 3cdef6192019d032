#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"

namespace pgfl {

/// Symmetric matrix of squared estimated vertex distances, zero diagonal.
struct DistanceMatrix {
  Matrix squared;

  std::size_t size() const noexcept { return static_cast<std::size_t>(squared.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return squared(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

namespace detail {

inline void check_metric_input(const Matrix& A) {
  if (A.rows() != A.cols()) throw InputError("adjacency matrix must be square");
  if (A.rows() < 3) throw InputError("vertex distance estimates need n >= 3");
}

// Calls reduce(i, j, gram_column_i, gram_column_j) for every pair i < j and
// stores the result symmetrically. Column k of the Gram matrix A^T A holds
// the inner products A_k^T A_l, so (A_i - A_j)^T A_k = G(k,i) - G(k,j).
template <class Reduce>
DistanceMatrix pairwise_from_gram(const Matrix& A, Reduce&& reduce) {
  const Eigen::Index n = A.rows();
  const Matrix gram = A.transpose() * A;
  DistanceMatrix out{Matrix::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = reduce(i, j, gram.col(i), gram.col(j));
      out.squared(i, j) = d;
      out.squared(j, i) = d;
    }
  }
  return out;
}

}  // namespace detail

/// d1^2(i,j) = 1/(n(n-2)) * sum_{k != i,j} |(A_i - A_j)^T A_k|.
inline DistanceMatrix d1_matrix(const Matrix& A) {
  detail::check_metric_input(A);
  const Eigen::Index n = A.rows();
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 2));
  return detail::pairwise_from_gram(A, [&](Eigen::Index i, Eigen::Index j, const auto& gi, const auto& gj) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i && k != j) sum += std::abs(gi[k] - gj[k]);
    return sum * scale;
  });
}

/// dinf^2(i,j) = max_{k != i,j} |(A_i - A_j)^T A_k| / n.
inline DistanceMatrix dinf_matrix(const Matrix& A) {
  detail::check_metric_input(A);
  const Eigen::Index n = A.rows();
  const double scale = 1.0 / static_cast<double>(n);
  return detail::pairwise_from_gram(A, [&](Eigen::Index i, Eigen::Index j, const auto& gi, const auto& gj) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i && k != j) best = std::max(best, std::abs(gi[k] - gj[k]));
    return best * scale;
  });
}

/// The K nearest neighbors of vertex i (self excluded), ties broken by the
/// smaller vertex index.
inline std::vector<Vertex> nearest_neighbors(const DistanceMatrix& D, std::size_t i, std::size_t K) {
  const std::size_t n = D.size();
  std::vector<Vertex> candidates;
  candidates.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) candidates.push_back(static_cast<Vertex>(j));
  auto closer = [&](Vertex a, Vertex b) {
    const double da = D(i, a), db = D(i, b);
    return da < db || (da == db && a < b);
  };
  K = std::min(K, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(K), candidates.end(), closer);
  candidates.resize(K);
  return candidates;
}

/// Union-symmetrized KNN graph: (i,j) is an edge if either endpoint is among
/// the other's K nearest neighbors.
inline Graph knn_graph(const DistanceMatrix& D, std::size_t K) {
  const std::size_t n = D.size();
  if (n < 2 || K < 1 || K > n - 1)
    throw InputError("K must lie in [1, n-1] (n = " + std::to_string(n) + ", K = " + std::to_string(K) + ")");
  std::vector<Edge> edges;
  edges.reserve(n * K);
  for (std::size_t i = 0; i < n; ++i)
    for (Vertex j : nearest_neighbors(D, i, K)) edges.push_back({static_cast<Vertex>(i), j});
  return Graph::build(n, edges);
}

}  // namespace pgfl
