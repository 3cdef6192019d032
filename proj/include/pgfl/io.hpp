#pragma once

// File formats:
//   matrix CSV     n rows of n comma-separated values
//   matrix binary  "PGFL", u32 rows, u32 cols (little endian), then
//                  rows*cols little-endian float64 values, row-major
//   partition CSV  header "i,j,segment_id", one row per dyad

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgfl/errors.hpp"
#include "pgfl/graph.hpp"
#include "pgfl/segmentation.hpp"

namespace pgfl {

static_assert(std::endian::native == std::endian::little, "binary matrix I/O assumes a little-endian host");

inline bool has_binary_extension(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".bin";
}

inline void write_matrix_csv(std::ostream& out, const Matrix& M) {
  char buf[32];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      const auto r = std::to_chars(buf, buf + sizeof(buf), M(i, j));
      out.write(buf, r.ptr - buf);
    }
    out << '\n';
  }
}

/// Reads a dense CSV matrix; every row must have the same number of fields.
inline Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      std::string_view field(line.data() + pos, (comma == std::string::npos ? line.size() : comma) - pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      double v = 0.0;
      const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || r.ec != std::errc() || r.ptr != field.data() + field.size())
        throw InputError("matrix CSV line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError("matrix CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " fields, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("matrix CSV is empty");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

inline void write_matrix_binary(std::ostream& out, const Matrix& M) {
  out.write("PGFL", 4);
  // rows, cols, then a zero word that pads the header to 16 bytes
  const std::array<std::uint32_t, 3> dims{static_cast<std::uint32_t>(M.rows()), static_cast<std::uint32_t>(M.cols()), 0};
  out.write(reinterpret_cast<const char*>(dims.data()), sizeof(dims));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = M;
  out.write(reinterpret_cast<const char*>(row_major.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(M.size())));
}

inline Matrix read_matrix_binary(std::istream& in) {
  char magic[4];
  std::array<std::uint32_t, 3> dims{};
  if (!in.read(magic, 4) || std::memcmp(magic, "PGFL", 4) != 0) throw InputError("binary matrix: bad magic");
  if (!in.read(reinterpret_cast<char*>(dims.data()), sizeof(dims))) throw InputError("binary matrix: truncated header");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(dims[0], dims[1]);
  if (!in.read(reinterpret_cast<char*>(row_major.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(row_major.size()))))
    throw InputError("binary matrix: truncated payload");
  if (in.peek() != std::char_traits<char>::eof()) throw InputError("binary matrix: trailing bytes");
  return row_major;
}

/// Chooses the binary format for paths ending in ".bin", CSV otherwise.
inline Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file: " + path);
  try {
    return has_binary_extension(path) ? read_matrix_binary(in) : read_matrix_csv(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_matrix_file(const std::string& path, const Matrix& M) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write matrix file: " + path);
  if (has_binary_extension(path))
    write_matrix_binary(out, M);
  else
    write_matrix_csv(out, M);
  if (!out) throw IoError("write failed: " + path);
}

inline void write_partition_csv(std::ostream& out, const DyadPartition& p) {
  out << "i,j,segment_id\n";
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < p.n; ++j) out << i << ',' << j << ',' << p.label[i * p.n + j] << '\n';
}

inline DyadPartition read_partition_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,j,segment_id", 0) != 0)
    throw InputError("partition CSV: missing header i,j,segment_id");
  std::vector<std::array<std::size_t, 3>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::size_t, 3> r{};
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> r[0] >> c1 >> r[1] >> c2 >> r[2]) || c1 != ',' || c2 != ',')
      throw InputError("partition CSV line " + std::to_string(line_no) + ": expected i,j,segment_id");
    rows.push_back(r);
  }
  DyadPartition p;
  std::size_t n = 0;
  while (n * n < rows.size()) ++n;
  if (n * n != rows.size()) throw InputError("partition CSV: row count is not a perfect square");
  p.n = n;
  p.label.assign(rows.size(), 0);
  for (const auto& r : rows) {
    if (r[0] >= n || r[1] >= n) throw InputError("partition CSV: dyad index out of range");
    p.label[r[0] * n + r[1]] = static_cast<std::uint32_t>(r[2]);
    p.num_segments = std::max<std::size_t>(p.num_segments, r[2] + 1);
  }
  p.sizes.assign(p.num_segments, 0);
  for (auto l : p.label) ++p.sizes[l];
  return p;
}

inline nlohmann::json partition_summary_json(const DyadPartition& p) {
  nlohmann::json segments = nlohmann::json::array();
  for (std::size_t s = 0; s < p.num_segments; ++s)
    segments.push_back({{"id", s}, {"size", p.sizes[s]}, {"mean", s < p.means.size() ? p.means[s] : 0.0}});
  return {{"n", p.n}, {"num_segments", p.num_segments}, {"segments", std::move(segments)}};
}

}  // namespace pgfl
