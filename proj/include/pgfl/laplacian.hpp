#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/union_find.hpp"

namespace pgfl {

enum class LaplacianBackend {
  Auto,               // dense for small components, CG otherwise
  Dense,              // grounded dense Cholesky
  SparseCholesky,     // grounded sparse LDL^T with AMD ordering
  ConjugateGradient,  // Jacobi-preconditioned CG on the singular system
};

struct LaplacianOptions {
  LaplacianBackend backend = LaplacianBackend::Auto;
  std::size_t dense_limit = 64;
  double rel_tol = 1e-10;        // CG only
  std::size_t iter_factor = 20;  // CG iteration cap = iter_factor * |C|
};

struct LaplacianSolution {
  Vector z;
  double residual = 0.0;  // max over components of ||L_C z_C - (y_C - mean)||_inf
};

namespace detail {

// One connected component of an edge subset, in local indices.
struct LocalComponent {
  std::vector<Vertex> vertices;         // global ids
  std::vector<Edge> edges;              // local endpoints
};

// Buckets vertices and edges by component label.
inline std::vector<LocalComponent> split_components(std::size_t n, std::span<const Edge> edges,
                                                    std::span<const std::uint32_t> label,
                                                    std::size_t num_components) {
  std::vector<LocalComponent> comps(num_components);
  std::vector<Vertex> local(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& c = comps[label[v]];
    local[v] = static_cast<Vertex>(c.vertices.size());
    c.vertices.push_back(static_cast<Vertex>(v));
  }
  for (const Edge& e : edges) comps[label[e.i]].edges.push_back({local[e.i], local[e.j]});
  return comps;
}

inline void laplacian_multiply(const LocalComponent& c, const Vector& x, Vector& out) {
  out.setZero(x.size());
  for (const Edge& e : c.edges) {
    const double d = x[e.i] - x[e.j];
    out[e.i] += d;
    out[e.j] -= d;
  }
}

// Drops the last local vertex so the remaining Laplacian block is SPD.
inline void solve_grounded_dense(const LocalComponent& c, const Vector& rhs, Vector& z) {
  const auto s = static_cast<Eigen::Index>(c.vertices.size());
  Matrix L = Matrix::Zero(s - 1, s - 1);
  for (const Edge& e : c.edges) {
    const Eigen::Index a = e.i, b = e.j;
    if (a < s - 1) L(a, a) += 1.0;
    if (b < s - 1) L(b, b) += 1.0;
    if (a < s - 1 && b < s - 1) {
      L(a, b) -= 1.0;
      L(b, a) -= 1.0;
    }
  }
  z.resize(s);
  z.head(s - 1) = L.llt().solve(rhs.head(s - 1));
  z[s - 1] = 0.0;
}

inline void solve_grounded_sparse(const LocalComponent& c, const Vector& rhs, Vector& z) {
  const auto s = static_cast<Eigen::Index>(c.vertices.size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(4 * c.edges.size());
  for (const Edge& e : c.edges) {
    const Eigen::Index a = e.i, b = e.j;
    if (a < s - 1) entries.emplace_back(a, a, 1.0);
    if (b < s - 1) entries.emplace_back(b, b, 1.0);
    if (a < s - 1 && b < s - 1) {
      entries.emplace_back(a, b, -1.0);
      entries.emplace_back(b, a, -1.0);
    }
  }
  Eigen::SparseMatrix<double> L(s - 1, s - 1);
  L.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
  if (ldlt.info() != Eigen::Success) throw NumericalError("sparse Laplacian factorization failed", INFINITY);
  z.resize(s);
  z.head(s - 1) = ldlt.solve(rhs.head(s - 1));
  z[s - 1] = 0.0;
}

// `scale` is the norm of the uncentered input; the residual target is
// relative to it so a right side that cancels to round-off is accepted.
inline void solve_cg(const LocalComponent& c, const Vector& rhs, double scale, Vector& z,
                     const LaplacianOptions& opt) {
  const auto s = static_cast<Eigen::Index>(c.vertices.size());
  Vector inv_diag = Vector::Zero(s);
  for (const Edge& e : c.edges) {
    inv_diag[e.i] += 1.0;
    inv_diag[e.j] += 1.0;
  }
  inv_diag = inv_diag.cwiseInverse();

  const double target = opt.rel_tol * std::max(scale, rhs.norm());
  z = Vector::Zero(s);
  Vector r = rhs, p, Ap;
  if (r.norm() <= target) return;
  Vector w = inv_diag.cwiseProduct(r);
  p = w;
  double rw = r.dot(w);
  const std::size_t cap = std::max<std::size_t>(opt.iter_factor * c.vertices.size(), 10);
  for (std::size_t it = 0; it < cap; ++it) {
    laplacian_multiply(c, p, Ap);
    const double alpha = rw / p.dot(Ap);
    z += alpha * p;
    r -= alpha * Ap;
    if (r.norm() <= target) return;
    w = inv_diag.cwiseProduct(r);
    const double rw_next = r.dot(w);
    p = w + (rw_next / rw) * p;
    rw = rw_next;
  }
  throw NumericalError("Laplacian CG did not converge in " + std::to_string(cap) +
                           " iterations (residual " + std::to_string(r.norm()) + ")",
                       r.norm());
}

inline LaplacianSolution solve_components(std::size_t n, std::span<const Edge> edges,
                                          std::span<const std::uint32_t> label, std::size_t num_components,
                                          const Vector& y, const LaplacianOptions& opt) {
  LaplacianSolution out;
  out.z = Vector::Zero(static_cast<Eigen::Index>(n));
  const auto comps = split_components(n, edges, label, num_components);
  Vector rhs, z, Lz;
  for (const LocalComponent& c : comps) {
    const auto s = static_cast<Eigen::Index>(c.vertices.size());
    if (s < 2) continue;
    rhs.resize(s);
    for (Eigen::Index a = 0; a < s; ++a) rhs[a] = y[c.vertices[static_cast<std::size_t>(a)]];
    const double scale = rhs.norm();
    rhs.array() -= rhs.mean();

    LaplacianBackend backend = opt.backend;
    if (backend == LaplacianBackend::Auto)
      backend = c.vertices.size() <= opt.dense_limit ? LaplacianBackend::Dense : LaplacianBackend::ConjugateGradient;
    switch (backend) {
      case LaplacianBackend::Dense: solve_grounded_dense(c, rhs, z); break;
      case LaplacianBackend::SparseCholesky: solve_grounded_sparse(c, rhs, z); break;
      default: solve_cg(c, rhs, scale, z, opt); break;
    }
    z.array() -= z.mean();

    laplacian_multiply(c, z, Lz);
    out.residual = std::max(out.residual, (Lz - rhs).lpNorm<Eigen::Infinity>());
    for (Eigen::Index a = 0; a < s; ++a) out.z[c.vertices[static_cast<std::size_t>(a)]] = z[a];
  }
  return out;
}

}  // namespace detail

/// Solves L_C z_C = y_C - mean(y_C) on every connected component C of g,
/// returning the mean-zero solution on each component.
inline LaplacianSolution laplacian_solve(const Graph& g, const Vector& y, const LaplacianOptions& opt = {}) {
  if (static_cast<std::size_t>(y.size()) != g.num_vertices())
    throw InputError("laplacian_solve: vector length does not match vertex count");
  return detail::solve_components(g.num_vertices(), g.edges(), g.component_labels(), g.num_components(), y, opt);
}

/// Same solve for the subgraph spanned by an edge subset of an n-vertex graph.
inline LaplacianSolution laplacian_solve(std::size_t n, std::span<const Edge> edges, const Vector& y,
                                         const LaplacianOptions& opt = {}) {
  if (static_cast<std::size_t>(y.size()) != n)
    throw InputError("laplacian_solve: vector length does not match vertex count");
  UnionFind uf(n);
  for (const Edge& e : edges) uf.unite(e.i, e.j);
  const auto count = uf.num_sets();
  const auto label = uf.labels();
  return detail::solve_components(n, edges, label, count, y, opt);
}

}  // namespace pgfl
