#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "cspapi/acquisition.hpp"
#include "cspapi/csdesign.hpp"
#include "cspapi/geometry.hpp"
#include "cspapi/wave.hpp"

namespace cspapi {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All array files are raw little-endian 64-bit floats, row major, with a
/// JSON sidecar <stem>.json describing the shape. Matrices are CSV of 0/1
/// rows with a JSON sidecar carrying the structure and design metadata.

void write_raw_f64(const std::filesystem::path& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_raw_f64(const std::filesystem::path& path, long rows, long cols);

/// 8-bit binary PGM, min-max normalized; flat images map to zero.
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& values);

void save_image(const std::filesystem::path& stem, const SourceImage& u, bool with_pgm = true);
SourceImage load_image(const std::filesystem::path& stem);

void save_pressure(const std::filesystem::path& stem, const PressureData& p);
PressureData load_pressure(const std::filesystem::path& stem);

void save_means(const std::filesystem::path& stem, const MeansData& h);
MeansData load_means(const std::filesystem::path& stem);

void save_csdata(const std::filesystem::path& stem, const CsData& y);
CsData load_csdata(const std::filesystem::path& stem);

struct MatrixFileMeta {
  int k = 0;
  double sin_value = 0.0;
  std::uint64_t seed = 0;
};

void save_matrix(const std::filesystem::path& stem, const StructuredCsMatrix& m,
                 const MatrixFileMeta& meta);
StructuredCsMatrix load_matrix(const std::filesystem::path& stem, MatrixFileMeta* meta = nullptr);

}  // namespace cspapi
