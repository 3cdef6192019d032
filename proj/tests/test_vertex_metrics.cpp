#include <numeric>

#include <gtest/gtest.h>

#include "pgfl/graphon.hpp"
#include "pgfl/vertex_metrics.hpp"
#include "test_support.hpp"

using namespace pgfl;

namespace {

// Direct evaluation of the displayed sums with explicit column differences.
double d1_reference(const Matrix& A, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index n = A.rows();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != i && k != j) sum += std::abs((A.col(i) - A.col(j)).dot(A.col(k)));
  return sum / (static_cast<double>(n) * static_cast<double>(n - 2));
}

double dinf_reference(const Matrix& A, Eigen::Index i, Eigen::Index j) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < A.rows(); ++k)
    if (k != i && k != j) best = std::max(best, std::abs((A.col(i) - A.col(j)).dot(A.col(k))));
  return best / static_cast<double>(A.rows());
}

Matrix three_vertex_example() {
  Matrix A(3, 3);
  A << 0, 1, 0,
       1, 0, 1,
       0, 1, 0;
  return A;
}

}  // namespace

TEST(D1Matrix, HandExample) {
  const DistanceMatrix D = d1_matrix(three_vertex_example());
  EXPECT_DOUBLE_EQ(D(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(D(1, 0), 1.0 / 3.0);
  // columns 0 and 2 coincide
  EXPECT_DOUBLE_EQ(D(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(D(1, 1), 0.0);
}

TEST(D1Matrix, IdenticalColumnsGiveZero) {
  std::mt19937_64 rng(1);
  Matrix A = fixtures::random_binary_matrix(8, rng);
  A.col(3) = A.col(5);
  EXPECT_DOUBLE_EQ(d1_matrix(A)(3, 5), 0.0);
  EXPECT_DOUBLE_EQ(dinf_matrix(A)(3, 5), 0.0);
}

TEST(D1Matrix, RejectsTinyOrNonSquare) {
  EXPECT_THROW(d1_matrix(Matrix::Zero(2, 2)), InputError);
  EXPECT_THROW(d1_matrix(Matrix::Zero(3, 4)), InputError);
  EXPECT_THROW(dinf_matrix(Matrix::Zero(2, 2)), InputError);
}

TEST(D1Matrix, MatchesDirectFormulaSymmetricNonnegative) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = fixtures::random_binary_matrix(9, rng, 0.4);
    const DistanceMatrix D1 = d1_matrix(A);
    const DistanceMatrix Dinf = dinf_matrix(A);
    for (Eigen::Index i = 0; i < 9; ++i) {
      EXPECT_EQ(D1(i, i), 0.0);
      for (Eigen::Index j = 0; j < 9; ++j) {
        EXPECT_GE(D1(i, j), 0.0);
        EXPECT_EQ(D1(i, j), D1(j, i));
        if (i == j) continue;
        EXPECT_NEAR(D1(i, j), d1_reference(A, i, j), 1e-14);
        EXPECT_NEAR(Dinf(i, j), dinf_reference(A, i, j), 1e-14);
        // d1 is the mean over k of the same terms dinf maximizes
        EXPECT_GE(Dinf(i, j) + 1e-15, D1(i, j));
      }
    }
  }
}

TEST(DinfMatrix, HandExample) { EXPECT_DOUBLE_EQ(dinf_matrix(three_vertex_example())(0, 1), 1.0 / 3.0); }

TEST(D1Matrix, PermutationEquivariance) {
  std::mt19937_64 rng(3);
  const Matrix A = fixtures::random_binary_matrix(10, rng);
  std::vector<int> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix B(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) B(i, j) = A(perm[i], perm[j]);
  const DistanceMatrix DA = d1_matrix(A), DB = d1_matrix(B);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) EXPECT_NEAR(DB(i, j), DA(perm[i], perm[j]), 1e-15);
}

TEST(D1Matrix, SeparatesBlocksOfPlantedModel) {
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sample = sample_network(two_block_sbm(0.6, 0.2), 300, seed);
    const DistanceMatrix D = d1_matrix(sample.A);
    double within = 0.0, between = 0.0;
    std::size_t nw = 0, nb = 0;
    for (Eigen::Index i = 0; i < 300; ++i) {
      for (Eigen::Index j = i + 1; j < 300; ++j) {
        if ((sample.xi[i] < 0.5) == (sample.xi[j] < 0.5)) {
          within += D(i, j);
          ++nw;
        } else {
          between += D(i, j);
          ++nb;
        }
      }
    }
    separated += within / static_cast<double>(nw) < between / static_cast<double>(nb);
  }
  EXPECT_GE(separated, 9);
}

TEST(KnnGraph, HandExample) {
  DistanceMatrix D{Matrix::Zero(3, 3)};
  D.squared(0, 1) = D.squared(1, 0) = 0.1;
  D.squared(0, 2) = D.squared(2, 0) = 0.9;
  D.squared(1, 2) = D.squared(2, 1) = 0.2;
  const Graph g = knn_graph(D, 1);
  ASSERT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{1, 2}));
}

TEST(KnnGraph, FullNeighborhoodIsComplete) {
  std::mt19937_64 rng(4);
  const DistanceMatrix D = d1_matrix(fixtures::random_binary_matrix(7, rng));
  EXPECT_EQ(knn_graph(D, 6).num_edges(), 21u);
}

TEST(KnnGraph, TiesBreakTowardSmallerIndex) {
  const DistanceMatrix D{Matrix::Zero(4, 4)};
  EXPECT_EQ(nearest_neighbors(D, 2, 2), (std::vector<Vertex>{0, 1}));
  EXPECT_EQ(nearest_neighbors(D, 0, 1), (std::vector<Vertex>{1}));
}

TEST(KnnGraph, RejectsBadK) {
  const DistanceMatrix D{Matrix::Zero(4, 4)};
  EXPECT_THROW(knn_graph(D, 0), InputError);
  EXPECT_THROW(knn_graph(D, 4), InputError);
}

TEST(KnnGraph, DegreeAtLeastKAndNoIsolatedVertices) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const DistanceMatrix D = d1_matrix(fixtures::random_binary_matrix(30, rng, 0.3));
    for (std::size_t K : {1u, 2u, 5u}) {
      const Graph g = knn_graph(D, K);
      for (Vertex v = 0; v < 30; ++v) EXPECT_GE(g.degree(v), K);
      for (const Edge& e : g.edges()) EXPECT_LT(e.i, e.j);
    }
  }
}
