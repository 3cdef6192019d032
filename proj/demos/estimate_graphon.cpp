// Samples a two-block network and compares KNN-PGFL with the baselines.

#include <iostream>

#include "pgfl/graphon.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 200;
  const auto sample = pgfl::sample_network(pgfl::stand_in_graphon("B"), n, 1);

  const auto knn = pgfl::knn_pgfl_estimate(sample.A);
  std::cout << "KNN graph components: " << knn.q << ", ADMM iterations: " << knn.iterations
            << ", dyad segments: " << knn.partition.num_segments << '\n';

  auto report = [&](const char* name, const pgfl::Matrix& P) {
    std::cout << name << " MSE x 1e4: " << 1e4 * pgfl::mse(P, sample.P0) << '\n';
  };
  report("knn-pgfl  ", knn.P_hat);
  report("ns        ", pgfl::ns_estimate(sample.A, pgfl::default_ns_quantile(n)));
  report("usvt      ", pgfl::usvt_estimate(sample.A));
  pgfl::PgflOptions sas;
  sas.lambda = 1.0;
  report("sas-lite  ", pgfl::sas_lite_estimate(sample.A, sas));
  report("grand-mean", pgfl::grand_mean_estimate(sample.A));
}
