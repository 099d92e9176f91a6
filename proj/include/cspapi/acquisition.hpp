#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "cspapi/csdesign.hpp"
#include "cspapi/wave.hpp"

namespace cspapi {

/// Compressed measurements Y = A * P: one row per measurement channel, one
/// column per time sample.
struct CsData {
  std::string matrix_ref;
  TimeGrid times;
  Eigen::MatrixXd values;  // m x q
};

/// Applies the measurement matrix to the sensor index of the data; the time
/// index is untouched.
CsData apply_cs(const StructuredCsMatrix& a, const PressureData& p, std::string matrix_ref = "");
CsData apply_cs(const StructuredCsMatrix& a, const MeansData& h, std::string matrix_ref = "");

/// Adds white Gaussian noise rescaled so that ||noise|| / ||Y|| equals
/// target_rel_error exactly. Deterministic for a given seed.
CsData add_noise(const CsData& y, double target_rel_error, std::uint64_t seed);

}  // namespace cspapi
