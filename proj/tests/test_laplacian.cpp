#include <gtest/gtest.h>

#include "pgfl/laplacian.hpp"
#include "test_support.hpp"

using namespace pgfl;

namespace {

const LaplacianBackend kBackends[] = {LaplacianBackend::Auto, LaplacianBackend::Dense,
                                      LaplacianBackend::SparseCholesky, LaplacianBackend::ConjugateGradient};

LaplacianOptions with_backend(LaplacianBackend b) {
  LaplacianOptions opt;
  opt.backend = b;
  return opt;
}

}  // namespace

TEST(LaplacianSolve, SingleEdge) {
  const auto sol = laplacian_solve(chain_graph(2), (Vector(2) << 1, -1).finished());
  EXPECT_NEAR(sol.z[0], 0.5, 1e-12);
  EXPECT_NEAR(sol.z[1], -0.5, 1e-12);
  EXPECT_LE(sol.residual, 1e-12);
}

TEST(LaplacianSolve, ComponentwiseConstantGivesZero) {
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {3, 4}};
  const Graph g = build_graph(6, edges);
  const Vector y = (Vector(6) << 2, 2, 2, -1, -1, 7).finished();
  for (auto b : kBackends) EXPECT_LE(laplacian_solve(g, y, with_backend(b)).z.lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(LaplacianSolve, ChainMatchesPseudoInverse) {
  const Graph g = chain_graph(3);
  const Vector y = (Vector(3) << 1, 0, -1).finished();
  const Vector expected = fixtures::pinv_laplacian_solve(g, y);
  // L = [[1,-1,0],[-1,2,-1],[0,-1,1]] maps (1,0,-1) to itself
  EXPECT_NEAR((expected - y).norm(), 0.0, 1e-12);
  for (auto b : kBackends) EXPECT_NEAR((laplacian_solve(g, y, with_backend(b)).z - expected).norm(), 0.0, 1e-10);
}

TEST(LaplacianSolve, BackendsAgreeWithPseudoInverseOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    const Graph g = fixtures::random_graph(n, 3.0 / static_cast<double>(n), rng);
    const Vector y = fixtures::random_vector(n, rng);
    const Vector expected = fixtures::pinv_laplacian_solve(g, y);
    for (auto b : kBackends) {
      const auto sol = laplacian_solve(g, y, with_backend(b));
      EXPECT_LE((sol.z - expected).lpNorm<Eigen::Infinity>(), 1e-8 * (1.0 + expected.norm())) << "n=" << n;
      EXPECT_LE(sol.residual, 1e-8 * (1.0 + y.norm()));
    }
  }
}

TEST(LaplacianSolve, LargeComponentUsesIterativePath) {
  std::mt19937_64 rng(8);
  const Graph g = fixtures::random_connected_graph(300, 200, rng);
  const Vector y = fixtures::random_vector(300, rng);
  const auto cg = laplacian_solve(g, y);
  const auto direct = laplacian_solve(g, y, with_backend(LaplacianBackend::SparseCholesky));
  EXPECT_LE((cg.z - direct.z).lpNorm<Eigen::Infinity>(), 1e-7);
  EXPECT_NEAR(cg.z.sum(), 0.0, 1e-9);
}

TEST(LaplacianSolve, EdgeSubsetOverload) {
  const Graph full = fixtures::complete_graph(5);
  const std::vector<Edge> subset{{0, 1}, {3, 4}};
  const Vector y = (Vector(5) << 1, 3, 5, 0, 2).finished();
  const auto sol = laplacian_solve(5, subset, y);
  EXPECT_NEAR(sol.z[0], -0.5, 1e-12);
  EXPECT_NEAR(sol.z[1], 0.5, 1e-12);
  EXPECT_NEAR(sol.z[2], 0.0, 1e-12);
  EXPECT_NEAR(sol.z[3], -0.5, 1e-12);
  EXPECT_NEAR(sol.z[4], 0.5, 1e-12);
  EXPECT_THROW(laplacian_solve(full, Vector::Zero(4)), InputError);
}
