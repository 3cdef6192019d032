// pgfl: command-line front end for power graph fused lasso denoising,
// KNN-PGFL graphon estimation, dyad segmentation and benchmarking.
//
// Exit codes: 0 success, 2 validation, 3 numerical, 4 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pgfl/admm.hpp"
#include "pgfl/benchmark.hpp"
#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/graphon.hpp"
#include "pgfl/io.hpp"
#include "pgfl/segmentation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

struct RunConfig {
  std::string subcommand;
  std::string matrix;
  std::string graph;
  std::string model = "B'";
  std::size_t n = 200;
  double lambda = 0.5;
  double eta = 1.0;
  std::size_t k = 2;
  double stop_ratio = 0.01;
  std::size_t max_iter = 200;
  std::optional<double> eps;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string estimate_mode = "average";
  bool clamp = false;
  std::string out = "pgfl_out";
  std::string config;
};

json to_json(const RunConfig& c) {
  json j = {{"subcommand", c.subcommand}, {"matrix", c.matrix},       {"graph", c.graph},
            {"model", c.model},           {"n", c.n},                 {"lambda", c.lambda},
            {"eta", c.eta},               {"k", c.k},                 {"stop_ratio", c.stop_ratio},
            {"max_iter", c.max_iter},     {"seed", c.seed},           {"threads", c.threads},
            {"estimate_mode", c.estimate_mode}, {"clamp", c.clamp},   {"out", c.out}};
  j["eps"] = c.eps ? json(*c.eps) : json(nullptr);
  return j;
}

// Applies keys from a saved run config; flags given on the command line win.
void apply_config_file(RunConfig& c, const std::string& path, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw pgfl::IoError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw pgfl::InputError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw pgfl::InputError("config file must hold a JSON object");
  auto given = [&](const char* flag) {
    const CLI::Option* o = sub.get_option_no_throw(flag);
    return o != nullptr && o->count() > 0;
  };
  try {
    if (j.contains("matrix") && !given("--matrix")) c.matrix = j["matrix"].get<std::string>();
    if (j.contains("graph") && !given("--graph")) c.graph = j["graph"].get<std::string>();
    if (j.contains("model") && !given("--model")) c.model = j["model"].get<std::string>();
    if (j.contains("n") && !given("--n")) c.n = j["n"].get<std::size_t>();
    if (j.contains("lambda") && !given("--lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("eta") && !given("--eta")) c.eta = j["eta"].get<double>();
    if (j.contains("k") && !given("--k")) c.k = j["k"].get<std::size_t>();
    if (j.contains("stop_ratio") && !given("--stop-ratio")) c.stop_ratio = j["stop_ratio"].get<double>();
    if (j.contains("max_iter") && !given("--max-iter")) c.max_iter = j["max_iter"].get<std::size_t>();
    if (j.contains("eps") && !j["eps"].is_null() && !given("--eps")) c.eps = j["eps"].get<double>();
    if (j.contains("seed") && !given("--seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads") && !given("--threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("estimate_mode") && !given("--estimate-mode"))
      c.estimate_mode = j["estimate_mode"].get<std::string>();
    if (j.contains("clamp") && !given("--clamp")) c.clamp = j["clamp"].get<bool>();
    if (j.contains("out") && !given("--out")) c.out = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw pgfl::InputError("config file " + path + ": " + e.what());
  }
}

void validate(const RunConfig& c) {
  using pgfl::InputError;
  if (!(c.lambda >= 0.0)) throw InputError("--lambda must be >= 0");
  if (!(c.eta > 0.0)) throw InputError("--eta must be > 0");
  if (!(c.stop_ratio > 0.0)) throw InputError("--stop-ratio must be > 0");
  if (c.max_iter < 1) throw InputError("--max-iter must be >= 1");
  if (c.k < 1) throw InputError("--k must be >= 1");
  if (c.eps && !(*c.eps >= 0.0)) throw InputError("--eps must be >= 0");
  (void)pgfl::parse_estimate_mode(c.estimate_mode);
}

fs::path prepare_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw pgfl::IoError("cannot create output directory " + c.out + ": " + ec.message());
  std::ofstream f(fs::path(c.out) / "config.json");
  if (!f) throw pgfl::IoError("cannot write config.json in " + c.out);
  f << to_json(c).dump(2) << '\n';
  return c.out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw pgfl::IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

pgfl::PgflOptions pgfl_options(const RunConfig& c) {
  pgfl::PgflOptions o;
  o.lambda = c.lambda;
  o.eta = c.eta;
  o.stop_ratio = c.stop_ratio;
  o.max_iter = c.max_iter;
  o.threads = c.threads;
  o.estimate_mode = pgfl::parse_estimate_mode(c.estimate_mode);
  o.clamp = c.clamp;
  return o;
}

void write_trace(const fs::path& path, const std::vector<pgfl::IterationRecord>& trace) {
  std::ofstream f(path);
  if (!f) throw pgfl::IoError("cannot write " + path.string());
  f << "iteration,objective,primal_residual,q_norm\n";
  for (const auto& r : trace)
    f << r.iteration << ',' << pgfl::detail::format_double(r.objective) << ','
      << pgfl::detail::format_double(r.primal_residual) << ',' << pgfl::detail::format_double(r.q_norm) << '\n';
}

void write_partition(const fs::path& dir, const pgfl::DyadPartition& p) {
  std::ofstream f(dir / "partition.csv");
  if (!f) throw pgfl::IoError("cannot write partition.csv");
  pgfl::write_partition_csv(f, p);
  write_json(dir / "partition_summary.json", pgfl::partition_summary_json(p));
}

int cmd_simulate(const RunConfig& c) {
  if (c.n < 3) throw pgfl::InputError("--n must be >= 3");
  const auto model = pgfl::graphon_by_name(c.model);
  const auto dir = prepare_out_dir(c);
  const auto sample = pgfl::sample_network(model, c.n, c.seed);
  pgfl::write_matrix_file((dir / "A.csv").string(), sample.A);
  pgfl::write_matrix_file((dir / "P0.csv").string(), sample.P0);
  pgfl::write_matrix_file((dir / "xi.csv").string(), sample.xi);
  return kOk;
}

int cmd_denoise(const RunConfig& c) {
  if (c.matrix.empty() || c.graph.empty()) throw pgfl::InputError("denoise needs --matrix and --graph");
  const pgfl::Matrix A = pgfl::read_matrix_file(c.matrix);
  const pgfl::Graph g = pgfl::read_graph_file(c.graph);
  const auto opt = pgfl_options(c);
  pgfl::validate_pgfl_inputs(A, g, opt);
  const auto dir = prepare_out_dir(c);
  const auto res = pgfl::pgfl(A, g, opt);
  pgfl::write_matrix_file((dir / "P_hat.csv").string(), res.P_hat);
  write_trace(dir / "residuals.csv", res.trace);
  write_json(dir / "objective.json", {{"objective", res.objective},
                                      {"iterations", res.iterations},
                                      {"converged", res.converged},
                                      {"q_components", g.num_components()}});
  return kOk;
}

int cmd_estimate(const RunConfig& c) {
  if (c.matrix.empty()) throw pgfl::InputError("estimate needs --matrix (adjacency)");
  const pgfl::Matrix A = pgfl::read_matrix_file(c.matrix);
  if (A.rows() != A.cols()) throw pgfl::InputError("dimension mismatch: adjacency must be square");
  if (A.rows() < 3) throw pgfl::InputError("adjacency needs n >= 3");
  if (c.k > static_cast<std::size_t>(A.rows()) - 1)
    throw pgfl::InputError("--k must be <= n-1 (n = " + std::to_string(A.rows()) + ")");
  for (Eigen::Index i = 0; i < A.size(); ++i)
    if (A.data()[i] != 0.0 && A.data()[i] != 1.0) throw pgfl::InputError("adjacency entries must be 0 or 1");

  const auto dir = prepare_out_dir(c);
  pgfl::KnnPgflOptions kopt;
  kopt.K = c.k;
  kopt.pgfl = pgfl_options(c);
  kopt.merge_eps = c.eps;
  const auto res = pgfl::knn_pgfl_estimate(A, kopt);
  pgfl::write_matrix_file((dir / "P_hat.csv").string(), res.P_hat);
  pgfl::write_graph_file((dir / "knn_graph.txt").string(), res.knn);
  write_partition(dir, res.partition);
  write_trace(dir / "residuals.csv", res.trace);
  write_json(dir / "diagnostics.json", {{"q_components", res.q},
                                        {"iterations", res.iterations},
                                        {"converged", res.converged},
                                        {"objective", res.objective},
                                        {"num_segments", res.partition.num_segments}});
  return kOk;
}

int cmd_segment(const RunConfig& c) {
  if (c.matrix.empty() || c.graph.empty()) throw pgfl::InputError("segment needs --matrix and --graph");
  const pgfl::Matrix P = pgfl::read_matrix_file(c.matrix);
  const pgfl::Graph g = pgfl::read_graph_file(c.graph);
  if (P.rows() != P.cols() || static_cast<std::size_t>(P.rows()) != g.num_vertices())
    throw pgfl::InputError("dimension mismatch between matrix and graph");
  const auto dir = prepare_out_dir(c);
  write_partition(dir, pgfl::segment_dyads(P, g, c.eps.value_or(pgfl::default_merge_tolerance(P))));
  return kOk;
}

int cmd_benchmark(const RunConfig& c, const CLI::App& sub) {
  if (c.config.empty()) throw pgfl::InputError("benchmark needs --config FILE");
  std::ifstream in(c.config);
  if (!in) throw pgfl::IoError("cannot open config file: " + c.config);
  pgfl::ExperimentConfig cfg;
  try {
    cfg = json::parse(in).get<pgfl::ExperimentConfig>();
  } catch (const json::exception& e) {
    throw pgfl::InputError("config file " + c.config + ": " + e.what());
  }
  if (sub.count("--out")) cfg.output_dir = c.out;
  if (sub.count("--threads")) cfg.threads = c.threads;
  const auto rows = pgfl::run_benchmark(cfg, cfg.output_dir);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok() ? 0 : 1;
  std::cout << rows.size() << " runs, " << failed << " failed; results in " << cfg.output_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power graph fused lasso: denoising, graphon estimation and dyad segmentation"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cfg.config, "JSON config (a saved config.json or an experiment config)");
    sub->add_option("--out", cfg.out, "Output directory");
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--lambda", cfg.lambda, "Regularization strength");
    sub->add_option("--eta", cfg.eta, "ADMM penalty parameter");
    sub->add_option("--stop-ratio", cfg.stop_ratio, "Stop when ||P - Q^T||_F < ratio * ||Q||_F");
    sub->add_option("--max-iter", cfg.max_iter, "ADMM iteration cap");
    sub->add_option("--estimate-mode", cfg.estimate_mode, "Reported estimate: p, qt or average")
        ->check(CLI::IsMember({"p", "qt", "average"}));
  };

  auto* simulate = app.add_subcommand("simulate", "Sample a network from a graphon");
  add_common(simulate);
  simulate->add_option("--model", cfg.model, "Graphon: A', B', C', D', E', sbm2 or constant:<p>");
  simulate->add_option("--n", cfg.n, "Number of vertices");
  simulate->add_option("--seed", cfg.seed, "Random seed");

  auto* denoise = app.add_subcommand("denoise", "Power graph fused lasso on a matrix and graph");
  add_common(denoise);
  add_solver(denoise);
  denoise->add_option("--matrix", cfg.matrix, "Response matrix (.csv or .bin)");
  denoise->add_option("--graph", cfg.graph, "Graph file");
  denoise->add_flag("--clamp", cfg.clamp, "Clip the estimate to [0,1]");

  auto* estimate = app.add_subcommand("estimate", "KNN-PGFL graphon estimate from an adjacency matrix");
  add_common(estimate);
  add_solver(estimate);
  estimate->add_option("--matrix,--adjacency", cfg.matrix, "Adjacency matrix (.csv or .bin)");
  estimate->add_option("--k", cfg.k, "Nearest neighbors per vertex");
  estimate->add_option("--eps", cfg.eps, "Segment merge tolerance (default 1e-6 * range)");

  auto* segment = app.add_subcommand("segment", "Segment dyads of an estimate over a graph");
  add_common(segment);
  segment->add_option("--matrix", cfg.matrix, "Estimate matrix (.csv or .bin)");
  segment->add_option("--graph", cfg.graph, "Graph file");
  segment->add_option("--eps", cfg.eps, "Merge tolerance (default 1e-6 * range)");

  auto* benchmark = app.add_subcommand("benchmark", "Run an experiment grid from a JSON config");
  add_common(benchmark);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.subcommand = sub->get_name();
  try {
    if (sub != benchmark && !cfg.config.empty()) apply_config_file(cfg, cfg.config, *sub);
    validate(cfg);
    if (sub == simulate) return cmd_simulate(cfg);
    if (sub == denoise) return cmd_denoise(cfg);
    if (sub == estimate) return cmd_estimate(cfg);
    if (sub == segment) return cmd_segment(cfg);
    return cmd_benchmark(cfg, *sub);
  } catch (const pgfl::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const pgfl::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const pgfl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}
