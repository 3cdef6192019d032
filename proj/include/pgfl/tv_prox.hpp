#pragma once

// Graph fused-lasso proximal operator
//
//   prox(y) = argmin_beta ||y - beta||^2 + lambda * ||grad beta||_1
//
// solved through the box-constrained dual
//
//   min_u 1/2 ||grad^T u||^2 - u^T grad y   s.t. ||u||_inf <= lambda/2,
//
// with primal recovery beta = y - grad^T u. The dual is minimized by projected
// Newton: free (inactive) edges take a Newton step on the reduced edge system,
// which is solved through a vertex Laplacian on the subgraph of free edges.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/laplacian.hpp"
#include "pgfl/union_find.hpp"

namespace pgfl {

struct ProxOptions {
  double tol = 0.0;  // duality-gap tolerance; <= 0 selects 1e-8 * (1 + ||y||^2)
  std::size_t max_iterations = 1000;
  std::size_t max_backtracks = 50;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  bool record_trace = false;
  LaplacianOptions laplacian{};
};

/// Dual iterate of the projected Newton solver.
struct DualState {
  Vector u;                  // one entry per stored edge
  double radius = 0.0;       // lambda / 2
  double gap = 0.0;
  std::vector<char> active;  // edge is pinned to the box boundary
};

struct ProxResult {
  Vector beta;  // y - grad^T u, or its average over fused segments when that certifies a smaller gap
  Vector u;
  double gap = 0.0;
  double tol = 0.0;
  std::size_t iterations = 0;
  std::size_t gradient_fallbacks = 0;
  std::vector<double> dual_trace;  // dual objective after each accepted step
};

inline double default_prox_tolerance(const Vector& y) { return 1e-8 * (1.0 + y.squaredNorm()); }

/// ||y - beta||^2 + lambda * ||grad beta||_1
inline double fused_lasso_objective(const Graph& g, const Vector& y, const Vector& beta, double lambda) {
  return (y - beta).squaredNorm() + lambda * IncidenceOperator(g).total_variation(beta);
}

/// 1/2 ||grad^T u||^2 - u^T grad y
inline double dual_objective(const Graph& g, const Vector& y, const Vector& u) {
  const IncidenceOperator grad(g);
  return 0.5 * grad.apply_transpose(u).squaredNorm() - u.dot(grad.apply(y));
}

/// Gap between the halved primal at beta = y - grad^T u and the dual value,
/// (lambda/2)||grad beta||_1 - u^T grad beta. Nonnegative for feasible u.
inline double duality_gap(const Graph& g, const Vector& y, const Vector& u, double lambda) {
  const IncidenceOperator grad(g);
  const Vector d = grad.apply(y - grad.apply_transpose(u));
  return std::max(0.0, 0.5 * lambda * d.lpNorm<1>() - u.dot(d));
}

/// Newton direction on the free edges: solves
/// (grad_F grad_F^T) s = grad_F grad^T u - grad_F y for F = inactive edges.
/// The right side equals grad_F w with w = -(y - grad^T u), so s = grad_F z
/// where z solves the vertex Laplacian system of the free-edge subgraph.
/// Entries for active edges are zero.
inline Vector reduced_newton_step(const DualState& state, const Graph& g, const Vector& y,
                                  const LaplacianOptions& lap = {}) {
  const auto edges = g.edges();
  if (static_cast<std::size_t>(state.u.size()) != edges.size() || state.active.size() != edges.size())
    throw InputError("reduced_newton_step: dual state does not match edge count");
  const IncidenceOperator grad(g);
  const Vector w = grad.apply_transpose(state.u) - y;

  std::vector<Edge> free_edges;
  std::vector<std::size_t> free_index;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!state.active[e]) {
      free_edges.push_back(edges[e]);
      free_index.push_back(e);
    }
  }
  Vector s = Vector::Zero(static_cast<Eigen::Index>(edges.size()));
  if (free_edges.empty()) return s;

  const LaplacianSolution sol = laplacian_solve(g.num_vertices(), free_edges, w, lap);
  for (std::size_t f = 0; f < free_edges.size(); ++f)
    s[static_cast<Eigen::Index>(free_index[f])] = sol.z[free_edges[f].i] - sol.z[free_edges[f].j];
  return s;
}

namespace detail {

inline void project_box(Vector& u, double radius) { u = u.cwiseMax(-radius).cwiseMin(radius); }

// Caches the incidence products that every dual evaluation needs.
struct DualEvaluator {
  const Graph& g;
  const IncidenceOperator grad;
  const Vector& y;
  Vector grad_y;

  DualEvaluator(const Graph& graph, const Vector& signal) : g(graph), grad(graph), y(signal), grad_y(grad.apply(signal)) {}

  Vector primal(const Vector& u) const { return y - grad.apply_transpose(u); }

  double value(const Vector& u, const Vector& beta) const { return 0.5 * (y - beta).squaredNorm() - u.dot(grad_y); }
};

// Gap between the halved primal at an arbitrary beta and the dual at u:
// 1/2 ||beta - (y - grad^T u)||^2 + radius ||grad beta||_1 - u^T grad beta.
inline double gap_at(const IncidenceOperator& grad, const Vector& beta, const Vector& beta_u, const Vector& u,
                     double radius) {
  const Vector d = grad.apply(beta);
  double g = 0.5 * (beta - beta_u).squaredNorm();
  for (Eigen::Index e = 0; e < d.size(); ++e) g += std::abs(d[e]) * (radius - (d[e] > 0.0 ? u[e] : -u[e]));
  return std::max(0.0, g);
}

// Averages beta_u over the components joined by edges strictly inside the box.
// At the optimum those edges carry no jump, so this removes the rounding left
// in beta_u, which the gap otherwise multiplies by the box slack. For large
// lambda that slack is big enough to keep the plain gap above tolerance.
inline Vector fuse_interior(const Graph& g, const Vector& beta_u, const Vector& u, double radius) {
  const auto edges = g.edges();
  UnionFind uf(g.num_vertices());
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (std::abs(u[static_cast<Eigen::Index>(e)]) < radius) uf.unite(edges[e].i, edges[e].j);
  const auto labels = uf.labels();
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(uf.num_sets()));
  Vector count = Vector::Zero(sum.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    sum[labels[v]] += beta_u[static_cast<Eigen::Index>(v)];
    count[labels[v]] += 1.0;
  }
  Vector fused(beta_u.size());
  for (std::size_t v = 0; v < labels.size(); ++v) fused[static_cast<Eigen::Index>(v)] = sum[labels[v]] / count[labels[v]];
  return fused;
}

}  // namespace detail

/// Evaluates the proximal operator. `warm_start`, when given, replaces the
/// unconstrained initial solve with the projection of a previous dual.
inline ProxResult fused_lasso_prox(const Graph& g, const Vector& y, double lambda, const ProxOptions& opt = {},
                                   const Vector* warm_start = nullptr) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("fused_lasso_prox: lambda must be finite and >= 0");
  if (static_cast<std::size_t>(y.size()) != g.num_vertices())
    throw InputError("fused_lasso_prox: signal length does not match vertex count");

  const auto m = static_cast<Eigen::Index>(g.num_edges());
  ProxResult res;
  res.tol = opt.tol > 0.0 ? opt.tol : default_prox_tolerance(y);
  if (lambda == 0.0 || m == 0) {
    res.beta = y;
    res.u = Vector::Zero(m);
    return res;
  }

  const double radius = 0.5 * lambda;
  const detail::DualEvaluator dual(g, y);
  const IncidenceOperator& grad = dual.grad;

  DualState state;
  state.radius = radius;
  if (warm_start && warm_start->size() == m) {
    state.u = *warm_start;
  } else {
    const LaplacianSolution sol = laplacian_solve(g, y, opt.laplacian);
    state.u = grad.apply(sol.z);
    if (state.u.lpNorm<Eigen::Infinity>() <= radius) {
      res.beta = dual.primal(state.u);
      const Vector d = grad.apply(res.beta);
      res.gap = std::max(0.0, radius * d.lpNorm<1>() - state.u.dot(d));
      if (res.gap > res.tol) {
        Vector fused = detail::fuse_interior(g, res.beta, state.u, radius);
        const double fused_gap = detail::gap_at(grad, fused, res.beta, state.u, radius);
        if (fused_gap < res.gap) {
          res.gap = fused_gap;
          res.beta = std::move(fused);
        }
      }
      res.u = std::move(state.u);
      return res;
    }
  }
  detail::project_box(state.u, radius);
  state.active.assign(static_cast<std::size_t>(m), 0);

  const double max_degree = [&] {
    std::size_t deg = 1;
    for (std::size_t v = 0; v < g.num_vertices(); ++v) deg = std::max(deg, g.degree(static_cast<Vertex>(v)));
    return static_cast<double>(deg);
  }();

  Vector beta = dual.primal(state.u);
  double f = dual.value(state.u, beta);
  Vector u_try, beta_try, delta;

  for (std::size_t it = 0;; ++it) {
    const Vector edge_diff = grad.apply(beta);  // dual gradient is -edge_diff
    state.gap = std::max(0.0, radius * edge_diff.lpNorm<1>() - state.u.dot(edge_diff));
    res.iterations = it;
    if (state.gap <= res.tol) break;
    {
      Vector fused = detail::fuse_interior(g, beta, state.u, radius);
      const double fused_gap = detail::gap_at(grad, fused, beta, state.u, radius);
      if (fused_gap <= res.tol) {
        state.gap = fused_gap;
        beta = std::move(fused);
        break;
      }
    }
    if (it == opt.max_iterations)
      throw NumericalError("projected Newton did not reach gap tolerance in " + std::to_string(it) + " iterations",
                           state.gap);

    for (Eigen::Index e = 0; e < m; ++e) {
      const double gradient = -edge_diff[e];
      state.active[static_cast<std::size_t>(e)] =
          (state.u[e] == -radius && gradient > 0.0) || (state.u[e] == radius && gradient < 0.0);
    }
    const Vector step = reduced_newton_step(state, g, y, opt.laplacian);

    // Objective change along delta, evaluated without cancellation:
    // f(u + delta) - f(u) = -delta^T grad beta + 1/2 ||grad^T delta||^2.
    auto change = [&](const Vector& d) { return -edge_diff.dot(d) + 0.5 * grad.apply_transpose(d).squaredNorm(); };

    bool accepted = false;
    double alpha = 1.0;
    for (std::size_t b = 0; b <= opt.max_backtracks && step.any(); ++b, alpha *= opt.shrink) {
      u_try = state.u - alpha * step;
      detail::project_box(u_try, radius);
      delta = u_try - state.u;
      const double slope = -edge_diff.dot(delta);
      if (!(slope < 0.0)) continue;
      const double df = change(delta);
      if (df <= opt.sufficient_decrease * slope) {
        accepted = true;
        f += df;
        break;
      }
    }

    if (!accepted) {
      // Projected gradient step with 1/L, L = 2 * max degree >= ||grad grad^T||.
      u_try = state.u + edge_diff / (2.0 * max_degree);
      detail::project_box(u_try, radius);
      delta = u_try - state.u;
      const double df = change(delta);
      if (!(df < 0.0))
        throw NumericalError("projected Newton line search failed (gap " + std::to_string(state.gap) + ")",
                             state.gap);
      f += df;
      ++res.gradient_fallbacks;
    }
    beta_try = dual.primal(u_try);
    state.u.swap(u_try);
    beta.swap(beta_try);
    if (opt.record_trace) res.dual_trace.push_back(f);
  }

  res.beta = std::move(beta);
  res.u = std::move(state.u);
  res.gap = state.gap;
  return res;
}

}  // namespace pgfl
