#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "hdgeuler/fespace.hpp"
#include "hdgeuler/forms.hpp"

namespace hdgeuler {

/// Comma-separated writer with a fixed header. Floating-point values are
/// written with 17 significant digits so that files round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> columns);

  template <typename... Ts>
  void row(const Ts&... values) {
    if (sizeof...(Ts) != columns_.size()) throw std::invalid_argument("CsvWriter: column count mismatch");
    bool first = true;
    ((write_cell(values, first), first = false), ...);
    *out_ << '\n';
    out_->flush();
  }

  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }

  static std::string format(double v);

 private:
  template <typename T>
  void write_cell(const T& v, bool first) {
    if (!first) *out_ << ',';
    if constexpr (std::is_floating_point_v<T>)
      *out_ << format(static_cast<double>(v));
    else
      *out_ << v;
  }

  std::ostream* out_;
  std::vector<std::string> columns_;
};

/// Parsed CSV: header and rows of raw cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  [[nodiscard]] int column(const std::string& name) const;
  [[nodiscard]] double number(std::size_t row, const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Fields written to a VTU snapshot. Vector fields are evaluated at the
/// vertices of every cell and averaged over the cells sharing a vertex;
/// scalar DG fields are written both as vertex averages and as cell means.
struct SnapshotFields {
  const Field* velocity = nullptr;
  const Field* pressure = nullptr;
  const Field* vorticity = nullptr;
  const Field* tracer = nullptr;
  VectorFunction q_exact;  // enables err_velocity
  ScalarFunction p_exact;  // enables err_pressure
};

void write_vtu(const std::filesystem::path& path, const Mesh& mesh, const SnapshotFields& fields);

/// Minimal reader for the files written by write_vtu.
struct VtuData {
  int num_points = 0;
  int num_cells = 0;
  std::vector<double> points;  // 3 per point
  std::vector<int> connectivity;
  std::map<std::string, std::vector<double>> point_data;
  std::map<std::string, int> point_components;
  std::map<std::string, std::vector<double>> cell_data;
};
VtuData read_vtu(const std::filesystem::path& path);

}  // namespace hdgeuler
