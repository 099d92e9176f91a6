#pragma once

#include <Eigen/Dense>

#include "cspapi/geometry.hpp"
#include "cspapi/parallel.hpp"

namespace cspapi {

/// Circular means m(s_j, r_l) of the source around each detector; the radial
/// grid reuses the time grid (sound speed 1). Row j is detector j.
struct MeansData {
  SensorGeometry geometry;
  TimeGrid radii;
  Eigen::MatrixXd values;  // n x q
};

/// Detector pressure samples p(s_j, t_l); zero at t = 0 by causality.
struct PressureData {
  SensorGeometry geometry;
  TimeGrid times;
  Eigen::MatrixXd values;  // n x q
};

/// Quadrature operator for g(t_i) = integral_0^{t_i} f(r)/sqrt(t_i^2 - r^2) dr
/// on the uniform grid. The inverse square-root kernel is integrated in
/// closed form against a piecewise-linear interpolant of f, so the endpoint
/// singularity needs no epsilon offset. The operator is lower triangular with
/// positive diagonal below the first row; together with the convention
/// f(0) = 0 it admits an exact forward-substitution inverse.
class AbelOperator {
 public:
  explicit AbelOperator(const TimeGrid& grid);

  /// g = A f (f[0] is ignored; the kernel weights it by zero).
  Eigen::VectorXd forward(const Eigen::VectorXd& f) const;

  /// Solves A f = g for f with f[0] = 0.
  Eigen::VectorXd solve(const Eigen::VectorXd& g) const;

  int size() const { return q_; }

 private:
  int q_;
  Eigen::MatrixXd w_;  // lower-triangular weights
};

/// Angular quadrature of the circular means with bilinear image
/// interpolation. n_angles = 0 picks the default 4 * n_r.
MeansData circular_means(const SourceImage& u, const SensorGeometry& geom, const TimeGrid& radii,
                         int n_angles = 0, ExecMode mode = ExecMode::Parallel);

/// Forward acoustic operator: p(s, t) = d/dt integral_0^t r m(s, r)/sqrt(t^2 - r^2) dr,
/// evaluated as circular means, the Abel-type quadrature above, and a central
/// finite difference in t.
PressureData wave_forward(const SourceImage& u, const SensorGeometry& geom, const TimeGrid& times,
                          int n_angles = 0, ExecMode mode = ExecMode::Parallel);

/// Temporal transform recovering circular means from pressure rows:
/// cumulative-trapezoid antiderivative, triangular Abel solve, division by r.
/// The r = 0 column is filled by quadratic extrapolation. Acts on the time
/// index only, so it commutes with any matrix acting on the sensor index.
MeansData apply_T(const PressureData& p, ExecMode mode = ExecMode::Parallel);

/// Inverse temporal transform: multiply by r, forward Abel quadrature, then
/// differentiate in time (central differences interior, one-sided ends).
PressureData apply_T_inverse(const MeansData& h, ExecMode mode = ExecMode::Parallel);

/// Row-wise version of the temporal transform for any sensor-by-time array
/// (used for compressed measurement rows as well as full detector data).
Eigen::MatrixXd apply_T_rows(const Eigen::MatrixXd& rows, const TimeGrid& grid,
                             ExecMode mode = ExecMode::Parallel);
Eigen::MatrixXd apply_T_inverse_rows(const Eigen::MatrixXd& rows, const TimeGrid& grid,
                                     ExecMode mode = ExecMode::Parallel);

/// Filtered backprojection for the circular geometry:
/// u(r) = -(1/(pi R)) sum_j w_j integral_{|r-s_j|}^{2R} (d/dt t p)(s_j, t)/sqrt(t^2 - |r-s_j|^2) dt
/// with arc-length weights w_j = R*Omega/n. The inner integral uses the same
/// closed-form singular quadrature as the forward map.
SourceImage fbp_from_pressure(const PressureData& p, const SensorGeometry& geom,
                              const ImageGrid& grid, ExecMode mode = ExecMode::Parallel);

/// Backprojection from (recovered) circular means: applies the inverse
/// temporal transform and then fbp_from_pressure.
SourceImage fbp_from_means(const MeansData& h, const SensorGeometry& geom, const ImageGrid& grid,
                           ExecMode mode = ExecMode::Parallel);

}  // namespace cspapi
