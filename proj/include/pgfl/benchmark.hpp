#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgfl/errors.hpp"
#include "pgfl/graphon.hpp"
#include "pgfl/io.hpp"
#include "pgfl/parallel.hpp"

namespace pgfl {

inline const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> names{"knn-pgfl", "ns", "usvt", "sas-lite", "grand-mean"};
  return names;
}

struct ExperimentConfig {
  std::vector<std::string> models{"B'"};
  std::vector<std::size_t> sizes{200};
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> estimators{"knn-pgfl", "ns", "usvt", "sas-lite"};
  std::size_t K = 2;
  double lambda = 0.5;
  double eta = 1.0;
  double stop_ratio = 0.01;
  std::size_t max_iter = 200;
  std::optional<double> ns_quantile;  // default: sqrt(log n / n)
  double usvt_c = 1.01;
  double sas_lambda = 1.0;  // SAS-lite penalty; the chain power graph needs more smoothing than 0.5
  std::string output_dir = "benchmark_out";
  unsigned threads = 0;
  bool save_matrices = false;  // write P0 and every estimate per cell
};

inline void validate(const ExperimentConfig& c) {
  if (c.models.empty() || c.sizes.empty() || c.seeds.empty() || c.estimators.empty())
    throw InputError("experiment config needs non-empty models, n, seeds and estimators");
  for (const auto& m : c.models) (void)graphon_by_name(m);
  for (auto n : c.sizes)
    if (n < 3) throw InputError("experiment config: every n must be >= 3");
  for (const auto& e : c.estimators)
    if (std::find(known_estimators().begin(), known_estimators().end(), e) == known_estimators().end())
      throw InputError("experiment config: unknown estimator '" + e + "'");
  for (auto n : c.sizes)
    if (c.K < 1 || c.K > n - 1) throw InputError("experiment config: K must lie in [1, n-1]");
  if (!(c.lambda >= 0.0)) throw InputError("experiment config: lambda must be >= 0");
  if (!(c.sas_lambda >= 0.0)) throw InputError("experiment config: sas_lambda must be >= 0");
  if (!(c.eta > 0.0)) throw InputError("experiment config: eta must be > 0");
  if (!(c.stop_ratio > 0.0)) throw InputError("experiment config: stop_ratio must be > 0");
  if (c.max_iter < 1) throw InputError("experiment config: max_iter must be >= 1");
  if (c.ns_quantile && !(*c.ns_quantile > 0.0 && *c.ns_quantile <= 1.0))
    throw InputError("experiment config: ns_quantile must lie in (0,1]");
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"models", c.models},     {"n", c.sizes},           {"seeds", c.seeds},
       {"estimators", c.estimators}, {"K", c.K},          {"lambda", c.lambda},
       {"eta", c.eta},           {"stop_ratio", c.stop_ratio}, {"max_iter", c.max_iter},
       {"usvt_c", c.usvt_c},     {"sas_lambda", c.sas_lambda}, {"output_dir", c.output_dir}, {"threads", c.threads},
       {"save_matrices", c.save_matrices}};
  j["ns_quantile"] = c.ns_quantile ? nlohmann::json(*c.ns_quantile) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  static const std::vector<std::string> keys{"models", "n", "seeds", "estimators", "K", "lambda", "eta",
                                             "stop_ratio", "max_iter", "ns_quantile", "usvt_c", "sas_lambda", "output_dir",
                                             "threads", "save_matrices"};
  if (!j.is_object()) throw InputError("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw InputError("experiment config: unknown key '" + key + "'");
  try {
    if (j.contains("models")) c.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("n")) c.sizes = j.at("n").get<std::vector<std::size_t>>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("estimators")) c.estimators = j.at("estimators").get<std::vector<std::string>>();
    if (j.contains("K")) c.K = j.at("K").get<std::size_t>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("stop_ratio")) c.stop_ratio = j.at("stop_ratio").get<double>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<std::size_t>();
    if (j.contains("ns_quantile") && !j.at("ns_quantile").is_null()) c.ns_quantile = j.at("ns_quantile").get<double>();
    if (j.contains("usvt_c")) c.usvt_c = j.at("usvt_c").get<double>();
    if (j.contains("sas_lambda")) c.sas_lambda = j.at("sas_lambda").get<double>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("save_matrices")) c.save_matrices = j.at("save_matrices").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("experiment config: ") + e.what());
  }
}

struct ResultRow {
  std::string model;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  double mse = std::numeric_limits<double>::quiet_NaN();
  double runtime_ms = 0.0;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> q_components;
  std::optional<std::size_t> num_segments;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct AggregateCell {
  std::string model;
  std::size_t n = 0;
  std::string estimator;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_mse = 0.0;
  double median_mse = 0.0;
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        fields.back() += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

inline std::string opt_field(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; }

inline std::string cell_stem(const std::string& model, std::size_t n, std::uint64_t seed) {
  std::string safe;
  for (char c : model) safe += (std::isalnum(static_cast<unsigned char>(c)) ? c : (c == '\'' ? 'p' : '_'));
  return safe + "_n" + std::to_string(n) + "_seed" + std::to_string(seed);
}

}  // namespace detail

inline const char* results_header() {
  return "model,n,seed,estimator,mse,mse_x1e4,runtime_ms,iterations,q_components,num_segments,error";
}

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << results_header() << '\n';
  for (const auto& r : rows) {
    out << detail::csv_escape(r.model) << ',' << r.n << ',' << r.seed << ',' << r.estimator << ','
        << detail::format_double(r.mse) << ',' << detail::format_double(r.mse * 1e4) << ','
        << detail::format_double(r.runtime_ms) << ',' << detail::opt_field(r.iterations) << ','
        << detail::opt_field(r.q_components) << ',' << detail::opt_field(r.num_segments) << ','
        << detail::csv_escape(r.error) << '\n';
  }
}

inline std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != results_header()) throw InputError("results CSV: unexpected header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  auto opt = [](const std::string& s) -> std::optional<std::size_t> {
    if (s.empty()) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::csv_split(line);
    if (f.size() != 11) throw InputError("results CSV line " + std::to_string(line_no) + ": expected 11 fields");
    try {
      ResultRow r;
      r.model = f[0];
      r.n = std::stoull(f[1]);
      r.seed = std::stoull(f[2]);
      r.estimator = f[3];
      r.mse = std::stod(f[4]);
      r.runtime_ms = std::stod(f[6]);
      r.iterations = opt(f[7]);
      r.q_components = opt(f[8]);
      r.num_segments = opt(f[9]);
      r.error = f[10];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InputError("results CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

/// Mean and median MSE per (model, n, estimator) over successful seeds, in
/// first-appearance order.
inline std::vector<AggregateCell> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<AggregateCell> cells;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const AggregateCell& c) {
      return c.model == r.model && c.n == r.n && c.estimator == r.estimator;
    });
    if (it == cells.end()) {
      cells.push_back({r.model, r.n, r.estimator});
      values.emplace_back();
      it = cells.end() - 1;
    }
    auto& vals = values[static_cast<std::size_t>(it - cells.begin())];
    if (r.ok()) {
      ++it->runs;
      vals.push_back(r.mse);
    } else {
      ++it->failures;
    }
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    auto& v = values[k];
    if (v.empty()) {
      cells[k].mean_mse = cells[k].median_mse = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    cells[k].mean_mse = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    cells[k].median_mse = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  }
  return cells;
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateCell>& cells) {
  out << "model,n,estimator,runs,failures,mean_mse,mean_mse_x1e4,median_mse_x1e4\n";
  for (const auto& c : cells)
    out << detail::csv_escape(c.model) << ',' << c.n << ',' << c.estimator << ',' << c.runs << ',' << c.failures
        << ',' << detail::format_double(c.mean_mse) << ',' << detail::format_double(c.mean_mse * 1e4) << ','
        << detail::format_double(c.median_mse * 1e4) << '\n';
}

/// Estimator rows by model columns of mean MSE x 1e4, one block per n.
inline void write_aggregate_table(std::ostream& out, const std::vector<AggregateCell>& cells,
                                  const ExperimentConfig& cfg) {
  out << "n,estimator";
  for (const auto& m : cfg.models) out << ',' << detail::csv_escape(m);
  out << '\n';
  for (auto n : cfg.sizes) {
    for (const auto& e : cfg.estimators) {
      out << n << ',' << e;
      for (const auto& m : cfg.models) {
        auto it = std::find_if(cells.begin(), cells.end(),
                               [&](const AggregateCell& c) { return c.model == m && c.n == n && c.estimator == e; });
        out << ',' << (it == cells.end() ? std::string("nan") : detail::format_double(it->mean_mse * 1e4));
      }
      out << '\n';
    }
  }
}

struct EstimatorOutput {
  Matrix P_hat;
  std::optional<std::size_t> iterations, q_components, num_segments;
};

inline EstimatorOutput run_estimator(const std::string& name, const Matrix& A, const ExperimentConfig& cfg) {
  PgflOptions popt;
  popt.lambda = cfg.lambda;
  popt.eta = cfg.eta;
  popt.stop_ratio = cfg.stop_ratio;
  popt.max_iter = cfg.max_iter;
  popt.threads = 1;
  EstimatorOutput out;
  if (name == "knn-pgfl") {
    KnnPgflOptions kopt;
    kopt.K = cfg.K;
    kopt.pgfl = popt;
    auto r = knn_pgfl_estimate(A, kopt);
    out.P_hat = std::move(r.P_hat);
    out.iterations = r.iterations;
    out.q_components = r.q;
    out.num_segments = r.partition.num_segments;
  } else if (name == "ns") {
    out.P_hat = ns_estimate(A, cfg.ns_quantile.value_or(default_ns_quantile(static_cast<std::size_t>(A.rows()))));
  } else if (name == "usvt") {
    out.P_hat = usvt_estimate(A, cfg.usvt_c);
  } else if (name == "sas-lite") {
    popt.lambda = cfg.sas_lambda;
    out.P_hat = sas_lite_estimate(A, popt);
  } else if (name == "grand-mean") {
    out.P_hat = grand_mean_estimate(A);
  } else {
    throw InputError("unknown estimator '" + name + "'");
  }
  return out;
}

/// Runs the (model x n x seed x estimator) grid. Cell failures are recorded
/// in the row's error field and do not stop the run. When `out_dir` is
/// non-empty the results, aggregates and echoed config are written there.
inline std::vector<ResultRow> run_benchmark(const ExperimentConfig& cfg, const std::string& out_dir = "") {
  validate(cfg);
  struct Cell {
    std::string model;
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& m : cfg.models)
    for (auto n : cfg.sizes)
      for (auto s : cfg.seeds) cells.push_back({m, n, s});

  namespace fs = std::filesystem;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    if (cfg.save_matrices) fs::create_directories(fs::path(out_dir) / "matrices", ec);
  }

  const std::size_t per_cell = cfg.estimators.size();
  std::vector<ResultRow> rows(cells.size() * per_cell);
  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const auto model = graphon_by_name(cell.model);
    const NetworkSample sample = sample_network(model, cell.n, cell.seed);
    const std::string stem = detail::cell_stem(cell.model, cell.n, cell.seed);
    if (cfg.save_matrices && !out_dir.empty())
      write_matrix_file((fs::path(out_dir) / "matrices" / (stem + "_P0.csv")).string(), sample.P0);
    for (std::size_t e = 0; e < per_cell; ++e) {
      ResultRow& row = rows[c * per_cell + e];
      row.model = cell.model;
      row.n = cell.n;
      row.seed = cell.seed;
      row.estimator = cfg.estimators[e];
      const auto start = std::chrono::steady_clock::now();
      try {
        EstimatorOutput est = run_estimator(row.estimator, sample.A, cfg);
        row.mse = mse(est.P_hat, sample.P0);
        row.iterations = est.iterations;
        row.q_components = est.q_components;
        row.num_segments = est.num_segments;
        if (cfg.save_matrices && !out_dir.empty())
          write_matrix_file((fs::path(out_dir) / "matrices" / (stem + "_" + row.estimator + ".csv")).string(),
                            est.P_hat);
      } catch (const std::exception& ex) {
        row.error = ex.what();
      }
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  });

  if (!out_dir.empty()) {
    auto open = [&](const char* name) {
      std::ofstream f(fs::path(out_dir) / name);
      if (!f) throw IoError("cannot write " + (fs::path(out_dir) / name).string());
      return f;
    };
    {
      auto f = open("config.json");
      f << nlohmann::json(cfg).dump(2) << '\n';
    }
    {
      auto f = open("results.csv");
      write_results_csv(f, rows);
    }
    const auto agg = aggregate(rows);
    {
      auto f = open("aggregate.csv");
      write_aggregate_csv(f, agg);
    }
    {
      auto f = open("aggregate_table.csv");
      write_aggregate_table(f, agg, cfg);
    }
  }
  return rows;
}

}  // namespace pgfl
