#include "cspapi/acquisition.hpp"

#include <stdexcept>

#include "cspapi/errors.hpp"

#include "cspapi/rng.hpp"

namespace cspapi {

namespace {

CsData apply_cs_values(const StructuredCsMatrix& a, const Eigen::MatrixXd& values,
                       const TimeGrid& times, std::string matrix_ref) {
  if (a.entries.cols() != values.rows())
    throw DimensionError("apply_cs: matrix column count does not match sensor count");
  CsData y;
  y.matrix_ref = std::move(matrix_ref);
  y.times = times;
  y.values = a.entries * values;
  return y;
}

}  // namespace

CsData apply_cs(const StructuredCsMatrix& a, const PressureData& p, std::string matrix_ref) {
  return apply_cs_values(a, p.values, p.times, std::move(matrix_ref));
}

CsData apply_cs(const StructuredCsMatrix& a, const MeansData& h, std::string matrix_ref) {
  return apply_cs_values(a, h.values, h.radii, std::move(matrix_ref));
}

CsData add_noise(const CsData& y, double target_rel_error, std::uint64_t seed) {
  if (target_rel_error < 0.0) throw std::invalid_argument("add_noise: negative noise level");
  if (target_rel_error == 0.0) return y;
  const double norm_y = y.values.norm();
  if (norm_y == 0.0) throw std::invalid_argument("add_noise: cannot scale noise on zero data");

  Rng rng(seed);
  Eigen::MatrixXd noise(y.values.rows(), y.values.cols());
  for (long j = 0; j < noise.cols(); ++j)
    for (long i = 0; i < noise.rows(); ++i) noise(i, j) = rng.next_gaussian();

  CsData out = y;
  out.values += noise * (target_rel_error * norm_y / noise.norm());
  return out;
}

}  // namespace cspapi
