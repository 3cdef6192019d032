#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/parallel.hpp"
#include "pgfl/tv_prox.hpp"

namespace pgfl {

/// Which iterate is reported as the estimate.
enum class EstimateMode { P, QTranspose, Average };

inline std::string_view to_string(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::P: return "p";
    case EstimateMode::QTranspose: return "qt";
    default: return "average";
  }
}

inline EstimateMode parse_estimate_mode(std::string_view s) {
  if (s == "p") return EstimateMode::P;
  if (s == "qt") return EstimateMode::QTranspose;
  if (s == "average") return EstimateMode::Average;
  throw InputError("unknown estimate mode '" + std::string(s) + "' (expected p, qt or average)");
}

struct PgflOptions {
  double lambda = 0.5;
  double eta = 1.0;
  double stop_ratio = 0.01;
  std::size_t max_iter = 200;
  EstimateMode estimate_mode = EstimateMode::Average;
  bool clamp = false;    // clip the estimate to [0, 1]
  unsigned threads = 0;  // 0 = hardware concurrency
  // Relative prox gap tolerance, tightened geometrically from start to end.
  double prox_tol_start = 1e-6;
  double prox_tol_end = 1e-10;
  double prox_tol_decay = 0.5;
  // Reuse each column's dual from the previous sweep as its starting point.
  bool warm_start = true;
  LaplacianOptions laplacian{};
};

struct IterationRecord {
  std::size_t iteration = 0;
  double objective = 0.0;         // at the reported estimate
  double primal_residual = 0.0;   // ||P - Q^T||_F
  double q_norm = 0.0;            // ||Q||_F
};

/// ADMM iterate for the split P = Q^T with multiplier U.
struct AdmmState {
  Matrix P, Q, U;
  double eta = 1.0;
  double lambda = 0.0;
  std::size_t iter = 0;
  double primal_residual = 0.0;
  std::vector<IterationRecord> history;
  std::vector<Vector> p_duals, q_duals;  // per-column prox duals
};

struct PgflResult {
  Matrix P_hat;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

/// ||A - P||_F^2 + lambda * (||grad P||_1 + ||grad P^T||_1), with grad
/// applied to every column.
inline double pgfl_objective(const Matrix& A, const Matrix& P, const Graph& g, double lambda) {
  if (A.rows() != P.rows() || A.cols() != P.cols() || A.rows() != A.cols())
    throw InputError("pgfl_objective: dimension mismatch");
  if (static_cast<std::size_t>(A.rows()) != g.num_vertices())
    throw InputError("pgfl_objective: dimension mismatch between matrix and graph");
  double tv = 0.0;
  for (const Edge& e : g.edges()) {
    tv += (P.row(e.i) - P.row(e.j)).lpNorm<1>();  // column-wise differences
    tv += (P.col(e.i) - P.col(e.j)).lpNorm<1>();  // row-wise differences
  }
  return (A - P).squaredNorm() + lambda * tv;
}

inline Matrix clamp_unit(const Matrix& P) { return P.cwiseMax(0.0).cwiseMin(1.0); }

inline Matrix select_estimate(const AdmmState& s, EstimateMode mode) {
  switch (mode) {
    case EstimateMode::P: return s.P;
    case EstimateMode::QTranspose: return s.Q.transpose();
    default: return 0.5 * (s.P + s.Q.transpose());
  }
}

inline void validate_pgfl_inputs(const Matrix& A, const Graph& g, const PgflOptions& opt) {
  if (A.rows() != A.cols()) throw InputError("dimension mismatch: response matrix must be square");
  if (static_cast<std::size_t>(A.rows()) != g.num_vertices())
    throw InputError("dimension mismatch: matrix is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                     " but graph has " + std::to_string(g.num_vertices()) + " vertices");
  if (!(opt.lambda >= 0.0) || !std::isfinite(opt.lambda)) throw InputError("lambda must be finite and >= 0");
  if (!(opt.eta > 0.0) || !std::isfinite(opt.eta)) throw InputError("eta must be finite and > 0");
  if (!(opt.stop_ratio > 0.0)) throw InputError("stop ratio must be > 0");
  if (opt.max_iter < 1) throw InputError("max_iter must be >= 1");
  if (!A.allFinite()) throw InputError("response matrix contains non-finite entries");
}

/// One full ADMM iteration: P sweep, Q sweep, multiplier update.
inline void admm_iterate(AdmmState& s, const Matrix& A, const Graph& g, const PgflOptions& opt) {
  const Eigen::Index n = A.rows();
  const double scale = 1.0 / (1.0 + s.eta);
  const double prox_lambda = 2.0 * s.lambda * scale;
  const double rel_tol =
      std::max(opt.prox_tol_end, opt.prox_tol_start * std::pow(opt.prox_tol_decay, static_cast<double>(s.iter)));
  const std::size_t iteration = s.iter + 1;

  ProxOptions popt;
  popt.laplacian = opt.laplacian;

  auto sweep = [&](Matrix& target, std::vector<Vector>& duals, auto&& column_input, const char* which) {
    parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t k) {
      const auto i = static_cast<Eigen::Index>(k);
      const Vector y = column_input(i);
      ProxOptions local = popt;
      local.tol = rel_tol * (1.0 + y.squaredNorm());
      const Vector* warm = opt.warm_start && duals[k].size() > 0 ? &duals[k] : nullptr;
      try {
        ProxResult r = fused_lasso_prox(g, y, prox_lambda, local, warm);
        target.col(i) = r.beta;
        duals[k] = std::move(r.u);
      } catch (const NumericalError& err) {
        throw NumericalError("pgfl iteration " + std::to_string(iteration) + ", " + which + " column " +
                                 std::to_string(k) + ": " + err.what(),
                             err.residual());
      }
    });
  };

  sweep(s.P, s.p_duals, [&](Eigen::Index i) -> Vector {
    return scale * (A.col(i) - s.U.col(i) + s.eta * s.Q.row(i).transpose());
  }, "P");
  sweep(s.Q, s.q_duals, [&](Eigen::Index i) -> Vector {
    return scale * (A.row(i).transpose() + s.U.row(i).transpose() + s.eta * s.P.row(i).transpose());
  }, "Q");

  const Matrix diff = s.P - s.Q.transpose();
  s.U += s.eta * diff;
  s.primal_residual = diff.norm();
  s.iter = iteration;
}

/// Power graph fused lasso by consensus ADMM over columns and rows.
inline PgflResult pgfl(const Matrix& A, const Graph& g, const PgflOptions& opt = {}) {
  validate_pgfl_inputs(A, g, opt);
  const Eigen::Index n = A.rows();

  AdmmState s;
  s.P = Matrix::Zero(n, n);
  s.Q = A.transpose();
  s.U = Matrix::Zero(n, n);
  s.eta = opt.eta;
  s.lambda = opt.lambda;
  s.p_duals.resize(static_cast<std::size_t>(n));
  s.q_duals.resize(static_cast<std::size_t>(n));

  PgflResult res;
  while (s.iter < opt.max_iter) {
    admm_iterate(s, A, g, opt);
    const double q_norm = s.Q.norm();
    IterationRecord rec;
    rec.iteration = s.iter;
    rec.primal_residual = s.primal_residual;
    rec.q_norm = q_norm;
    rec.objective = pgfl_objective(A, select_estimate(s, opt.estimate_mode), g, opt.lambda);
    s.history.push_back(rec);
    if (s.primal_residual <= opt.stop_ratio * q_norm) {
      res.converged = true;
      break;
    }
  }

  res.P_hat = select_estimate(s, opt.estimate_mode);
  if (opt.clamp) res.P_hat = clamp_unit(res.P_hat);
  res.objective = pgfl_objective(A, res.P_hat, g, opt.lambda);
  res.iterations = s.iter;
  res.trace = std::move(s.history);
  return res;
}

}  // namespace pgfl
