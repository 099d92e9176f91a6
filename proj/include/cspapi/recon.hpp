#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cspapi/acquisition.hpp"
#include "cspapi/csdesign.hpp"
#include "cspapi/wave.hpp"

namespace cspapi {

/// Gradient coupling of the 1D total-variation penalty: circular differences
/// over the whole detector ring, or forward differences within each group
/// (which decouples the groups completely).
enum class TvBoundary { Circular, PerGroup };

struct TvOptions {
  double lambda = 1e-6;
  int max_iter = 2000;
  double tol = 1e-8;
  TvBoundary boundary = TvBoundary::Circular;
};

/// Outcome of one per-time-slice solve of
///   minimize ||A h - y||^2 + lambda ||D h||_1.
/// objective_trace records the accepted (best-so-far) objective values, which
/// is non-increasing by construction.
struct TvSliceResult {
  Eigen::VectorXd h;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

struct TvDiagnostics {
  std::vector<double> slice_objective;
  std::vector<int> slice_iterations;
  int unconverged_slices = 0;
  double total_objective = 0.0;
};

struct RecoveredMeans {
  MeansData means;
  TvDiagnostics diagnostics;
};

/// First-order primal-dual solve of one time slice. Step sizes come from the
/// operator norm of the stacked map [A; lambda*D].
TvSliceResult tv_solve_time_slice(const StructuredCsMatrix& a, const Eigen::VectorXd& y,
                                  const TvOptions& opts);

/// Solves every time slice of the transformed compressed data independently;
/// column l of the result is the slice-l minimizer.
RecoveredMeans tv_recover_means(const StructuredCsMatrix& a, const CsData& yt,
                                const SensorGeometry& geom, const TvOptions& opts,
                                ExecMode mode = ExecMode::Parallel);

/// Two-step reconstruction: transform the compressed data to the means
/// domain, recover full-detector means by TV minimization, invert by
/// filtered backprojection.
SourceImage two_step_reconstruct(const CsData& y, const StructuredCsMatrix& a,
                                 const SensorGeometry& geom, const ImageGrid& grid,
                                 const TvOptions& opts, ExecMode mode = ExecMode::Parallel,
                                 TvDiagnostics* diagnostics = nullptr);

}  // namespace cspapi
