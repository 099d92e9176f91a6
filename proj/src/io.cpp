#include "cspapi/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "raw float64 files are written in the host byte order and assume little endian");

namespace cspapi {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::filesystem::path raw_path(const std::filesystem::path& stem) {
  auto p = stem;
  p += ".f64";
  return p;
}

std::filesystem::path json_path(const std::filesystem::path& stem) {
  auto p = stem;
  p += ".json";
  return p;
}

json expect_type(const std::filesystem::path& stem, const std::string& type) {
  json j = read_json(json_path(stem));
  if (j.value("type", "") != type)
    throw IoError(stem.string() + ".json: expected type '" + type + "'");
  return j;
}

}  // namespace

void write_raw_f64(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<double> row(values.cols());
  for (long i = 0; i < values.rows(); ++i) {
    for (long j = 0; j < values.cols(); ++j) row[static_cast<size_t>(j)] = values(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw IoError("short write to " + path.string());
}

Eigen::MatrixXd read_raw_f64(const std::filesystem::path& path, long rows, long cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Eigen::MatrixXd values(rows, cols);
  std::vector<double> row(static_cast<size_t>(cols));
  for (long i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw IoError("short read from " + path.string());
    for (long j = 0; j < cols; ++j) values(i, j) = row[static_cast<size_t>(j)];
  }
  return values;
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double scale = (hi > lo) ? 255.0 / (hi - lo) : 0.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << values.cols() << " " << values.rows() << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(values.cols()));
  for (long i = 0; i < values.rows(); ++i) {
    for (long j = 0; j < values.cols(); ++j)
      row[static_cast<size_t>(j)] = static_cast<unsigned char>(std::lround((values(i, j) - lo) * scale));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

void save_image(const std::filesystem::path& stem, const SourceImage& u, bool with_pgm) {
  write_raw_f64(raw_path(stem), u.values);
  write_json(json_path(stem), json{{"type", "image"}, {"n_r", u.grid.n_r}, {"R", u.grid.R}});
  if (with_pgm) {
    auto p = stem;
    p += ".pgm";
    write_pgm(p, u.values);
  }
}

SourceImage load_image(const std::filesystem::path& stem) {
  json j = expect_type(stem, "image");
  SourceImage u;
  u.grid = make_image_grid(j.at("n_r").get<int>(), j.at("R").get<double>());
  u.values = read_raw_f64(raw_path(stem), u.grid.n_r, u.grid.n_r);
  return u;
}

namespace {

json sensor_array_sidecar(const std::string& type, const SensorGeometry& geom, const TimeGrid& grid) {
  return json{{"type", type}, {"n", geom.n}, {"q", grid.q}, {"R", grid.R}, {"Omega", geom.omega}};
}

void load_sensor_array(const std::filesystem::path& stem, const std::string& type,
                       SensorGeometry& geom, TimeGrid& grid, Eigen::MatrixXd& values) {
  json j = expect_type(stem, type);
  int n = j.at("n").get<int>();
  int q = j.at("q").get<int>();
  double R = j.at("R").get<double>();
  double omega = j.at("Omega").get<double>();
  geom = make_sensor_geometry(n, R, omega);
  grid = make_time_grid(q, R);
  values = read_raw_f64(raw_path(stem), n, q);
}

}  // namespace

void save_pressure(const std::filesystem::path& stem, const PressureData& p) {
  write_raw_f64(raw_path(stem), p.values);
  write_json(json_path(stem), sensor_array_sidecar("pressure", p.geometry, p.times));
}

PressureData load_pressure(const std::filesystem::path& stem) {
  PressureData p;
  load_sensor_array(stem, "pressure", p.geometry, p.times, p.values);
  return p;
}

void save_means(const std::filesystem::path& stem, const MeansData& h) {
  write_raw_f64(raw_path(stem), h.values);
  write_json(json_path(stem), sensor_array_sidecar("means", h.geometry, h.radii));
}

MeansData load_means(const std::filesystem::path& stem) {
  MeansData h;
  load_sensor_array(stem, "means", h.geometry, h.radii, h.values);
  return h;
}

void save_csdata(const std::filesystem::path& stem, const CsData& y) {
  write_raw_f64(raw_path(stem), y.values);
  write_json(json_path(stem), json{{"type", "csdata"},
                                   {"m", y.values.rows()},
                                   {"q", y.times.q},
                                   {"R", y.times.R},
                                   {"matrix", y.matrix_ref}});
}

CsData load_csdata(const std::filesystem::path& stem) {
  json j = expect_type(stem, "csdata");
  CsData y;
  y.matrix_ref = j.at("matrix").get<std::string>();
  y.times = make_time_grid(j.at("q").get<int>(), j.at("R").get<double>());
  y.values = read_raw_f64(raw_path(stem), j.at("m").get<long>(), y.times.q);
  return y;
}

void save_matrix(const std::filesystem::path& stem, const StructuredCsMatrix& m,
                 const MatrixFileMeta& meta) {
  auto csv = stem;
  csv += ".csv";
  std::ofstream out(csv);
  if (!out) throw IoError("cannot write " + csv.string());
  for (long i = 0; i < m.entries.rows(); ++i) {
    for (long j = 0; j < m.entries.cols(); ++j) {
      if (j) out << ",";
      out << static_cast<int>(m.entries(i, j));
    }
    out << "\n";
  }

  json lists = json::array();
  for (const auto& origin : m.origins) {
    json rows = json::array();
    for (const auto& row : origin.rows) rows.push_back(row);
    lists.push_back(rows);
  }
  write_json(json_path(stem), json{{"type", "matrix"},
                                   {"b", m.spec.block_size},
                                   {"g", m.spec.blocks_per_group},
                                   {"group_count", m.spec.group_count},
                                   {"m0", m.spec.m0},
                                   {"k", meta.k},
                                   {"sin", meta.sin_value},
                                   {"seed", meta.seed},
                                   {"assembled", m.assembled},
                                   {"selection_lists", lists}});
}

StructuredCsMatrix load_matrix(const std::filesystem::path& stem, MatrixFileMeta* meta) {
  json j = expect_type(stem, "matrix");
  StructuredCsMatrix m;
  m.spec.block_size = j.at("b").get<int>();
  m.spec.blocks_per_group = j.at("g").get<int>();
  m.spec.group_count = j.at("group_count").get<int>();
  m.spec.m0 = j.at("m0").get<int>();
  m.assembled = j.at("assembled").get<bool>();
  for (const auto& entry : j.at("selection_lists")) {
    SelectionList list;
    for (const auto& row : entry) list.rows.push_back(row.get<std::vector<int>>());
    m.origins.push_back(std::move(list));
  }
  if (meta) {
    meta->k = j.at("k").get<int>();
    meta->sin_value = j.at("sin").get<double>();
    meta->seed = j.at("seed").get<std::uint64_t>();
  }

  auto csv = stem;
  csv += ".csv";
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(csv.string() + ": empty matrix");
  m.entries.resize(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw IoError(csv.string() + ": ragged rows");
    for (size_t jx = 0; jx < rows[i].size(); ++jx) m.entries(static_cast<long>(i), static_cast<long>(jx)) = rows[i][jx];
  }
  return m;
}

}  // namespace cspapi
