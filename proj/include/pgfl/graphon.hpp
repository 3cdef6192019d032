#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "pgfl/admm.hpp"
#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/segmentation.hpp"
#include "pgfl/vertex_metrics.hpp"

namespace pgfl {

// ---------------------------------------------------------------------------
// Graphon models

struct ConstantGraphon {
  double value;
};

/// f(u,v) = u*v.
struct ProductGraphon {};

/// Piecewise-constant block model. `cuts` are the interior block boundaries
/// in (0,1), ascending; `probs` is (cuts+1) x (cuts+1).
struct BlockGraphon {
  std::vector<double> cuts;
  Matrix probs;

  std::size_t block_of(double u) const {
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), u) - cuts.begin());
  }
};

/// 0.5 + 0.4 sin(5 pi (u+v-1)) / (1 + 4 (u-v)^2), clipped to [0,1].
struct SmoothWaveGraphon {};

/// r x r lookup table on the uniform grid t/(r-1), bilinear in between.
struct GridGraphon {
  Matrix table;
};

using GraphonKind = std::variant<ConstantGraphon, ProductGraphon, BlockGraphon, SmoothWaveGraphon, GridGraphon>;

struct GraphonModel {
  std::string name;
  GraphonKind kind;

  double operator()(double u, double v) const {
    const double value = std::visit([&](const auto& k) { return evaluate(k, u, v); }, kind);
    return std::clamp(value, 0.0, 1.0);
  }

  /// Bounded-variation constant of a piecewise-constant graphon: the largest
  /// total jump along any horizontal or vertical line.
  std::optional<double> variation_bound() const {
    if (std::holds_alternative<ConstantGraphon>(kind)) return 0.0;
    const auto* b = std::get_if<BlockGraphon>(&kind);
    if (!b) return std::nullopt;
    double bound = 0.0;
    const Matrix& p = b->probs;
    for (Eigen::Index fixed = 0; fixed < p.rows(); ++fixed) {
      double along_rows = 0.0, along_cols = 0.0;
      for (Eigen::Index t = 0; t + 1 < p.rows(); ++t) {
        along_rows += std::abs(p(t + 1, fixed) - p(t, fixed));
        along_cols += std::abs(p(fixed, t + 1) - p(fixed, t));
      }
      bound = std::max({bound, along_rows, along_cols});
    }
    return bound;
  }

 private:
  static double evaluate(const ConstantGraphon& k, double, double) { return k.value; }
  static double evaluate(const ProductGraphon&, double u, double v) { return u * v; }
  static double evaluate(const BlockGraphon& k, double u, double v) {
    return k.probs(static_cast<Eigen::Index>(k.block_of(u)), static_cast<Eigen::Index>(k.block_of(v)));
  }
  static double evaluate(const SmoothWaveGraphon&, double u, double v) {
    const double d = u - v;
    return 0.5 + 0.4 * std::sin(5.0 * std::numbers::pi * (u + v - 1.0)) / (1.0 + 4.0 * d * d);
  }
  static double evaluate(const GridGraphon& k, double u, double v) {
    const Eigen::Index r = k.table.rows();
    if (r == 1) return k.table(0, 0);
    const double x = std::clamp(u, 0.0, 1.0) * static_cast<double>(r - 1);
    const double y = std::clamp(v, 0.0, 1.0) * static_cast<double>(r - 1);
    const auto x0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), r - 2);
    const auto y0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(y), r - 2);
    const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
    return (1 - fx) * (1 - fy) * k.table(x0, y0) + fx * (1 - fy) * k.table(x0 + 1, y0) +
           (1 - fx) * fy * k.table(x0, y0 + 1) + fx * fy * k.table(x0 + 1, y0 + 1);
  }
};

inline GraphonModel constant_graphon(double p) { return {"constant", ConstantGraphon{p}}; }

inline GraphonModel equal_blocks_graphon(std::string name, const Matrix& probs) {
  BlockGraphon b;
  for (Eigen::Index k = 1; k < probs.rows(); ++k)
    b.cuts.push_back(static_cast<double>(k) / static_cast<double>(probs.rows()));
  b.probs = probs;
  return {std::move(name), std::move(b)};
}

inline GraphonModel two_block_sbm(double p, double q) {
  Matrix probs(2, 2);
  probs << p, q, q, p;
  return equal_blocks_graphon("sbm2", probs);
}

/// Invented analogues of five graphon shapes (low-rank monotone, two blocks,
/// smooth with local structure, non-monotone blocks, checkerboard).
inline GraphonModel stand_in_graphon(const std::string& id) {
  const std::string key = (!id.empty() && id.back() == '\'') ? id.substr(0, id.size() - 1) : id;
  if (key == "A") return {"A'", ProductGraphon{}};
  if (key == "B") {
    auto g = two_block_sbm(0.6, 0.2);
    g.name = "B'";
    return g;
  }
  if (key == "C") return {"C'", SmoothWaveGraphon{}};
  if (key == "D") {
    Matrix probs(4, 4);
    probs << 0.8, 0.2, 0.5, 0.1,
             0.2, 0.6, 0.1, 0.4,
             0.5, 0.1, 0.3, 0.7,
             0.1, 0.4, 0.7, 0.2;
    return equal_blocks_graphon("D'", probs);
  }
  if (key == "E") {
    Matrix probs(6, 6);
    for (Eigen::Index a = 0; a < 6; ++a)
      for (Eigen::Index b = 0; b < 6; ++b) probs(a, b) = (a + b) % 2 == 0 ? 0.7 : 0.25;
    return equal_blocks_graphon("E'", probs);
  }
  throw InputError("unknown graphon model '" + id + "' (expected A', B', C', D', E')");
}

/// Resolves stand-in ids, "sbm2" and "constant:<p>".
inline GraphonModel graphon_by_name(const std::string& name) {
  if (name == "sbm2") return two_block_sbm(0.6, 0.2);
  if (name.rfind("constant:", 0) == 0) {
    double p = 0.0;
    try {
      p = std::stod(name.substr(9));
    } catch (const std::exception&) {
      throw InputError("bad constant graphon '" + name + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("constant graphon value must be in [0,1]");
    auto g = constant_graphon(p);
    g.name = name;
    return g;
  }
  return stand_in_graphon(name);
}

// ---------------------------------------------------------------------------
// Sampling

struct NetworkSample {
  Matrix A;
  Vector xi;
  Matrix P0;
  std::uint64_t seed = 0;
};

/// Latent uniforms, P0 = f(xi_i, xi_j), and a symmetric Bernoulli adjacency
/// with empty diagonal. Deterministic in the seed.
inline NetworkSample sample_network(const GraphonModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 3) throw InputError("sample_network: n must be >= 3");
  const auto N = static_cast<Eigen::Index>(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  NetworkSample s;
  s.seed = seed;
  s.xi.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) s.xi[i] = unif(rng);
  s.P0.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) s.P0(i, j) = model(s.xi[i], s.xi[j]);
  s.A = Matrix::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      const double edge = unif(rng) < s.P0(i, j) ? 1.0 : 0.0;
      s.A(i, j) = edge;
      s.A(j, i) = edge;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Estimators

/// (1/n^2) ||P_hat - P0||_F^2 over all entries, diagonal included.
inline double mse(const Matrix& P_hat, const Matrix& P0) {
  if (P_hat.rows() != P0.rows() || P_hat.cols() != P0.cols()) throw InputError("mse: shape mismatch");
  if (P0.size() == 0) return 0.0;
  return (P_hat - P0).squaredNorm() / static_cast<double>(P0.size());
}

inline Matrix grand_mean_estimate(const Matrix& A) { return Matrix::Constant(A.rows(), A.cols(), A.mean()); }

struct KnnPgflOptions {
  std::size_t K = 2;
  PgflOptions pgfl{};
  std::optional<double> merge_eps;  // default: 1e-6 * range(P_hat)
};

struct KnnPgflResult {
  Matrix P_hat;
  DyadPartition partition;
  Graph knn;
  std::size_t q = 0;  // connected components of the KNN graph
  std::size_t iterations = 0;
  bool converged = false;
  double objective = 0.0;
  std::vector<IterationRecord> trace;
};

/// d1 metric -> KNN graph -> power graph fused lasso (clamped) -> dyad segments.
inline KnnPgflResult knn_pgfl_estimate(const Matrix& A, const KnnPgflOptions& opt = {}) {
  if (A.rows() != A.cols()) throw InputError("knn_pgfl_estimate: adjacency must be square");
  if (A.rows() < 3) throw InputError("knn_pgfl_estimate: n must be >= 3");
  KnnPgflResult res;
  res.knn = knn_graph(d1_matrix(A), opt.K);
  res.q = res.knn.num_components();

  PgflOptions popt = opt.pgfl;
  popt.clamp = true;
  PgflResult fit = pgfl(A, res.knn, popt);
  res.P_hat = std::move(fit.P_hat);
  res.iterations = fit.iterations;
  res.converged = fit.converged;
  res.objective = fit.objective;
  res.trace = std::move(fit.trace);
  res.partition = segment_dyads(res.P_hat, res.knn, opt.merge_eps.value_or(default_merge_tolerance(res.P_hat)));
  return res;
}

/// Neighborhood-size quantile giving about sqrt(n log n) neighbors.
inline double default_ns_quantile(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::min(1.0, std::sqrt(std::log(nn) / nn));
}

/// Neighborhood smoothing with the dinf metric: vertex i averages the rows
/// of A over {j != i : dinf(i,j) <= h-quantile of row i}; then symmetrized.
inline Matrix ns_estimate(const Matrix& A, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) throw InputError("ns_estimate: quantile must lie in (0,1]");
  const DistanceMatrix D = dinf_matrix(A);
  const Eigen::Index n = A.rows();
  Matrix weights = Matrix::Zero(n, n);
  std::vector<double> row;
  for (Eigen::Index i = 0; i < n; ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) row.push_back(D.squared(i, j));
    const auto rank = static_cast<std::size_t>(
        std::max<double>(1.0, std::ceil(quantile * static_cast<double>(row.size()))) - 1.0);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(rank), row.end());
    const double threshold = row[rank];
    double count = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && D.squared(i, j) <= threshold) {
        weights(i, j) = 1.0;
        count += 1.0;
      }
    }
    weights.row(i) /= count;
  }
  const Matrix smoothed = weights * A;
  return 0.5 * (smoothed + smoothed.transpose());
}

/// Universal singular value thresholding: keep singular values above
/// c * 2 sqrt(n), reconstruct, clip to [0,1]. 2 sqrt(n) bounds the noise
/// norm for independent entries of magnitude at most 1.
inline Matrix usvt_estimate(const Matrix& A, double c = 1.01) {
  if (A.rows() != A.cols()) throw InputError("usvt_estimate: matrix must be square");
  if (!(c >= 0.0)) throw InputError("usvt_estimate: threshold factor must be >= 0");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("usvt_estimate: SVD failed", INFINITY);
  const double threshold = 2.0 * c * std::sqrt(static_cast<double>(A.rows()));
  const Vector& sigma = svd.singularValues();
  Eigen::Index keep = 0;
  while (keep < sigma.size() && sigma[keep] > threshold) ++keep;
  if (keep == 0) return Matrix::Zero(A.rows(), A.cols());
  const Matrix low_rank = svd.matrixU().leftCols(keep) * sigma.head(keep).asDiagonal() *
                          svd.matrixV().leftCols(keep).transpose();
  return clamp_unit(low_rank);
}

/// Vertex order by degree, ties by index.
inline std::vector<Vertex> degree_order(const Matrix& A) {
  std::vector<Vertex> order(static_cast<std::size_t>(A.rows()));
  for (std::size_t v = 0; v < order.size(); ++v) order[v] = static_cast<Vertex>(v);
  const Vector degree = A.rowwise().sum();
  std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return degree[a] < degree[b]; });
  return order;
}

/// Sort-and-smooth, reduced: a chain through the vertices in degree order,
/// then the power graph fused lasso on that chain (clamped).
inline Matrix sas_lite_estimate(const Matrix& A, const PgflOptions& opt) {
  if (A.rows() != A.cols()) throw InputError("sas_lite_estimate: matrix must be square");
  const std::vector<Vertex> order = degree_order(A);
  PgflOptions popt = opt;
  popt.clamp = true;
  return pgfl(A, chain_graph(order), popt).P_hat;
}

}  // namespace pgfl
