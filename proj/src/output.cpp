#include "hdgeuler/output.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdgeuler {

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> columns) : out_(&out), columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) *out_ << (i ? "," : "") << columns_[i];
  *out_ << '\n';
}

std::string CsvWriter::format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw std::out_of_range("csv: no column " + name);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(static_cast<std::size_t>(column(name))));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

const std::array<Vec2, 3> kReferenceVertices{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
const Vec2 kCentroid(1.0 / 3.0, 1.0 / 3.0);

struct PointKey {
  long long x, y;
  bool operator<(const PointKey& o) const { return x != o.x ? x < o.x : y < o.y; }
};

PointKey key_of(const Vec2& x, double scale) {
  return {std::llround(x.x() * scale), std::llround(x.y() * scale)};
}

void write_array(std::ostream& out, const std::string& name, int components, const std::vector<double>& data) {
  out << "        <DataArray type=\"Float64\" Name=\"" << name << "\" NumberOfComponents=\"" << components
      << "\" format=\"ascii\">\n          ";
  for (std::size_t i = 0; i < data.size(); ++i) out << CsvWriter::format(data[i]) << (i + 1 < data.size() ? " " : "");
  out << "\n        </DataArray>\n";
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path.string());
  table.columns = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) table.rows.push_back(split_csv_line(line));
  return table;
}

void write_vtu(const std::filesystem::path& path, const Mesh& mesh, const SnapshotFields& fields) {
  // unique physical points; periodic images stay separate points
  const double scale = 1e9 / mesh.domain_length();
  std::map<PointKey, int> index;
  std::vector<Vec2> points;
  std::vector<int> conn;
  conn.reserve(static_cast<std::size_t>(3 * mesh.num_cells()));
  for (const Cell& cell : mesh.cells())
    for (const Vec2& x : cell.coords) {
      const auto [it, inserted] = index.emplace(key_of(x, scale), static_cast<int>(points.size()));
      if (inserted) points.push_back(x);
      conn.push_back(it->second);
    }
  const auto np = points.size();
  const auto nc = static_cast<std::size_t>(mesh.num_cells());
  std::vector<double> count(np, 0.0);
  for (int v : conn) count[static_cast<std::size_t>(v)] += 1.0;

  std::vector<std::pair<std::string, std::vector<double>>> point_scalars, cell_scalars;
  std::vector<std::pair<std::string, std::vector<double>>> point_vectors, cell_vectors;

  auto scalar = [&](const std::string& name, auto&& value_at) {
    std::vector<double> pd(np, 0.0), cd(nc, 0.0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      for (int v = 0; v < 3; ++v)
        pd[static_cast<std::size_t>(conn[static_cast<std::size_t>(3 * c + v)])] +=
            value_at(c, kReferenceVertices[static_cast<std::size_t>(v)]);
      cd[static_cast<std::size_t>(c)] = value_at(c, kCentroid);
    }
    for (std::size_t i = 0; i < np; ++i) pd[i] /= count[i];
    point_scalars.emplace_back(name, std::move(pd));
    cell_scalars.emplace_back(name, std::move(cd));
  };

  if (fields.velocity != nullptr) {
    const Field& q = *fields.velocity;
    std::vector<double> pd(3 * np, 0.0), cd(3 * nc, 0.0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      for (int v = 0; v < 3; ++v) {
        const Vec2 val = q.vector_value(c, kReferenceVertices[static_cast<std::size_t>(v)]);
        const auto p = static_cast<std::size_t>(conn[static_cast<std::size_t>(3 * c + v)]);
        pd[3 * p] += val.x();
        pd[3 * p + 1] += val.y();
      }
      const Vec2 val = q.vector_value(c, kCentroid);
      cd[3 * static_cast<std::size_t>(c)] = val.x();
      cd[3 * static_cast<std::size_t>(c) + 1] = val.y();
    }
    for (std::size_t i = 0; i < np; ++i) {
      pd[3 * i] /= count[i];
      pd[3 * i + 1] /= count[i];
    }
    point_vectors.emplace_back("velocity", std::move(pd));
    cell_vectors.emplace_back("velocity", std::move(cd));
    if (fields.q_exact)
      scalar("err_velocity", [&](int c, const Vec2& xi) {
        return (q.vector_value(c, xi) - fields.q_exact(mesh.cell(c).map(xi))).norm();
      });
  }
  if (fields.pressure != nullptr) {
    const Field& p = *fields.pressure;
    scalar("pressure", [&](int c, const Vec2& xi) { return p.value(c, xi); });
    if (fields.p_exact)
      scalar("err_pressure", [&](int c, const Vec2& xi) { return std::abs(p.value(c, xi) - fields.p_exact(mesh.cell(c).map(xi))); });
  }
  if (fields.vorticity != nullptr)
    scalar("vorticity", [&](int c, const Vec2& xi) { return fields.vorticity->value(c, xi); });
  if (fields.tracer != nullptr) scalar("tracer", [&](int c, const Vec2& xi) { return fields.tracer->value(c, xi); });

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
      << "  <UnstructuredGrid>\n"
      << "    <Piece NumberOfPoints=\"" << np << "\" NumberOfCells=\"" << nc << "\">\n"
      << "      <Points>\n";
  std::vector<double> coords;
  coords.reserve(3 * np);
  for (const Vec2& x : points) coords.insert(coords.end(), {x.x(), x.y(), 0.0});
  write_array(out, "Points", 3, coords);
  out << "      </Points>\n      <Cells>\n"
      << "        <DataArray type=\"Int32\" Name=\"connectivity\" format=\"ascii\">\n          ";
  for (std::size_t i = 0; i < conn.size(); ++i) out << conn[i] << (i + 1 < conn.size() ? " " : "");
  out << "\n        </DataArray>\n        <DataArray type=\"Int32\" Name=\"offsets\" format=\"ascii\">\n          ";
  for (std::size_t c = 0; c < nc; ++c) out << 3 * (c + 1) << (c + 1 < nc ? " " : "");
  out << "\n        </DataArray>\n        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n          ";
  for (std::size_t c = 0; c < nc; ++c) out << 5 << (c + 1 < nc ? " " : "");
  out << "\n        </DataArray>\n      </Cells>\n      <PointData>\n";
  for (const auto& [name, data] : point_vectors) write_array(out, name, 3, data);
  for (const auto& [name, data] : point_scalars) write_array(out, name, 1, data);
  out << "      </PointData>\n      <CellData>\n";
  for (const auto& [name, data] : cell_vectors) write_array(out, name, 3, data);
  for (const auto& [name, data] : cell_scalars) write_array(out, name, 1, data);
  out << "      </CellData>\n    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n";
  if (!out) throw std::runtime_error("error writing " + path.string());
}

namespace {

std::string attribute(const std::string& tag, const std::string& name) {
  const std::string key = name + "=\"";
  const auto pos = tag.find(key);
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size();
  return tag.substr(start, tag.find('"', start) - start);
}

}  // namespace

VtuData read_vtu(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.find("<VTKFile type=\"UnstructuredGrid\"") == std::string::npos)
    throw std::runtime_error("not an unstructured-grid VTK file: " + path.string());

  VtuData data;
  const auto piece = text.find("<Piece");
  if (piece == std::string::npos) throw std::runtime_error("vtu: missing Piece");
  const std::string piece_tag = text.substr(piece, text.find('>', piece) - piece);
  data.num_points = std::stoi(attribute(piece_tag, "NumberOfPoints"));
  data.num_cells = std::stoi(attribute(piece_tag, "NumberOfCells"));
  const auto point_data_start = text.find("<PointData>");
  const auto cell_data_start = text.find("<CellData>");

  std::size_t pos = 0;
  while ((pos = text.find("<DataArray", pos)) != std::string::npos) {
    const auto tag_end = text.find('>', pos);
    const std::string tag = text.substr(pos, tag_end - pos);
    const auto close = text.find("</DataArray>", tag_end);
    if (close == std::string::npos) throw std::runtime_error("vtu: unterminated DataArray");
    std::stringstream body(text.substr(tag_end + 1, close - tag_end - 1));
    const std::string name = attribute(tag, "Name");
    std::vector<double> values;
    for (std::string tok; body >> tok;) values.push_back(std::stod(tok));
    if (name == "Points") {
      data.points = std::move(values);
    } else if (name == "connectivity") {
      for (double v : values) data.connectivity.push_back(static_cast<int>(v));
    } else if (name != "offsets" && name != "types") {
      const std::string comps = attribute(tag, "NumberOfComponents");
      if (cell_data_start != std::string::npos && pos > cell_data_start) {
        data.cell_data[name] = std::move(values);
      } else if (point_data_start != std::string::npos && pos > point_data_start) {
        data.point_components[name] = comps.empty() ? 1 : std::stoi(comps);
        data.point_data[name] = std::move(values);
      }
    }
    pos = close;
  }
  if (static_cast<int>(data.points.size()) != 3 * data.num_points ||
      static_cast<int>(data.connectivity.size()) != 3 * data.num_cells)
    throw std::runtime_error("vtu: inconsistent sizes in " + path.string());
  return data;
}

}  // namespace hdgeuler
