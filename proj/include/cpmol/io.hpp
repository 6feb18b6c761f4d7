#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpmol/band.hpp"
#include "cpmol/errors.hpp"
#include "cpmol/operators.hpp"

#ifndef CPMOL_VERSION_STRING
#define CPMOL_VERSION_STRING "unknown"
#endif

namespace cpmol {

/// Run description written as '#' comment lines at the top of every
/// output file. The wall-time line is the only nondeterministic one.
struct RunManifest {
  std::string command;
  std::string problem;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;
  std::string version = CPMOL_VERSION_STRING;
  double wall_seconds = -1.0;

  void set(const std::string& key, const std::string& value) {
    for (auto& kv : params) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    params.emplace_back(key, value);
  }
  void set(const std::string& key, double value);
};

/// Shortest round-trip representation (17 significant digits).
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void RunManifest::set(const std::string& key, double value) { set(key, format_double(value)); }

inline void write_manifest(std::ostream& out, const RunManifest& m, const std::string& prefix = "# ") {
  out << prefix << "command: " << m.command << '\n';
  out << prefix << "problem: " << m.problem << '\n';
  for (const auto& [k, v] : m.params) out << prefix << k << ": " << v << '\n';
  out << prefix << "seed: " << m.seed << '\n';
  out << prefix << "version: " << m.version << '\n';
  if (m.wall_seconds >= 0.0) out << prefix << "wall_time_s: " << format_double(m.wall_seconds) << '\n';
}

/// Comma-separated table with a manifest header; cells are strings so
/// callers can mix numbers and flags.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  CsvTable& row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw DimensionMismatch("CSV row width differs from header");
    rows_.push_back(std::move(cells));
    return *this;
  }

  CsvTable& row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    return row(std::move(cells));
  }

  /// Trailing '#' lines after the data (summary values such as slopes).
  void footer(const std::string& key, const std::string& value) { footer_.emplace_back(key, value); }

  void write(std::ostream& out, const RunManifest& m) const {
    write_manifest(out, m);
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
    for (const auto& [k, v] : footer_) out << "# " << k << ": " << v << '\n';
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::pair<std::string, std::string>> footer_;
};

/// Parent directories are created as needed.
inline void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f << contents;
  if (!f) throw InvalidArgument("failed writing '" + path + "'");
}

/// Legacy ASCII VTK point cloud: points are the closest points of the band
/// nodes, one scalar field per (name, values) pair.
inline void write_vtk_points(std::ostream& out, const BandedGrid& grid,
                             const std::vector<std::pair<std::string, Vector>>& fields, const RunManifest& m) {
  for (const auto& [name, v] : fields) {
    if (v.size() != static_cast<Eigen::Index>(grid.size())) throw DimensionMismatch("VTK field " + name + " has wrong length");
  }
  const std::size_t n = grid.size();
  out << "# vtk DataFile Version 3.0\n";
  std::ostringstream title;
  title << "cpmol " << m.command << ' ' << m.problem << " seed=" << m.seed;
  out << title.str() << '\n';
  out << "ASCII\nDATASET POLYDATA\n";
  out << "POINTS " << n << " double\n";
  for (std::size_t i = 0; i < n; ++i) {
    const Point& c = grid.cp(i).cp;
    out << format_double(c.x()) << ' ' << format_double(c.y()) << ' ' << format_double(c.z()) << '\n';
  }
  out << "VERTICES " << n << ' ' << 2 * n << '\n';
  for (std::size_t i = 0; i < n; ++i) out << "1 " << i << '\n';
  if (fields.empty()) return;
  out << "POINT_DATA " << n << '\n';
  for (const auto& [name, v] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i) out << format_double(v[static_cast<Eigen::Index>(i)]) << '\n';
  }
}

}  // namespace cpmol
