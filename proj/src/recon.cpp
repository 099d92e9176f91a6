#include "cspapi/recon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cspapi/errors.hpp"

namespace cspapi {

namespace {

/// First-difference operator across the sensor index.
Eigen::MatrixXd difference_operator(int n, int group_size, TvBoundary boundary) {
  if (boundary == TvBoundary::Circular) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      d(i, i) = -1.0;
      d(i, (i + 1) % n) = 1.0;
    }
    return d;
  }
  if (n % group_size != 0)
    throw std::invalid_argument("tv solver: sensor count is not a multiple of the group size");
  const int groups = n / group_size;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<long>(groups) * (group_size - 1), n);
  int row = 0;
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i + 1 < group_size; ++i, ++row) {
      d(row, g * group_size + i) = -1.0;
      d(row, g * group_size + i + 1) = 1.0;
    }
  return d;
}

struct TvProblem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd d;
  double lambda = 0.0;
  double step = 0.0;  // tau = sigma
};

// The slices are solved in the equivalent scaling
//   minimize (1/lambda) ||A h - y||^2 + ||D h||_1,
// which keeps the primal-dual step sizes independent of lambda; the stacked
// operator [A; D] bounds them. Objectives are reported in the original scale.
TvProblem setup_problem(const StructuredCsMatrix& a, const TvOptions& opts) {
  if (opts.lambda <= 0.0) throw std::invalid_argument("tv solver: lambda must be positive");
  if (opts.tol <= 0.0) throw std::invalid_argument("tv solver: tol must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("tv solver: max_iter must be positive");

  TvProblem prob;
  prob.a = a.entries;
  prob.lambda = opts.lambda;
  prob.d = difference_operator(static_cast<int>(a.entries.cols()), a.spec.n0(), opts.boundary);

  Eigen::MatrixXd gram = prob.a.transpose() * prob.a + prob.d.transpose() * prob.d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  double k_norm = std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 1e-300));
  prob.step = 0.95 / k_norm;
  return prob;
}

TvSliceResult solve_slice(const TvProblem& prob, const Eigen::VectorXd& y, const TvOptions& opts,
                          bool keep_trace) {
  const long n = prob.a.cols();
  const double tau = prob.step;
  const double sigma = prob.step;
  const double lam = prob.lambda;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd xbar = x;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(prob.a.rows());
  Eigen::VectorXd qd = Eigen::VectorXd::Zero(prob.d.rows());

  TvSliceResult result;
  result.objective = y.squaredNorm();  // objective at x = 0
  result.h = x;
  if (keep_trace) result.objective_trace.push_back(result.objective);

  for (int it = 1; it <= opts.max_iter; ++it) {
    // dual of the data term (1/lambda)||. - y||^2
    p = (p + sigma * (prob.a * xbar - y)) / (1.0 + 0.5 * sigma * lam);
    qd = (qd + sigma * (prob.d * xbar)).cwiseMax(-1.0).cwiseMin(1.0);
    Eigen::VectorXd xnew = x - tau * (prob.a.transpose() * p + prob.d.transpose() * qd);
    xbar = 2.0 * xnew - x;

    double obj = (prob.a * xnew - y).squaredNorm() + lam * (prob.d * xnew).lpNorm<1>();
    if (obj < result.objective) {
      result.objective = obj;
      result.h = xnew;
    }
    if (keep_trace) result.objective_trace.push_back(result.objective);

    double change = (xnew - x).norm();
    double scale = std::max(xnew.norm(), 1e-30);
    x = xnew;
    result.iterations = it;
    if (change <= opts.tol * scale) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace

TvSliceResult tv_solve_time_slice(const StructuredCsMatrix& a, const Eigen::VectorXd& y,
                                  const TvOptions& opts) {
  if (y.size() != a.entries.rows())
    throw DimensionError("tv_solve_time_slice: data length does not match measurement count");
  TvProblem prob = setup_problem(a, opts);
  return solve_slice(prob, y, opts, /*keep_trace=*/true);
}

RecoveredMeans tv_recover_means(const StructuredCsMatrix& a, const CsData& yt,
                                const SensorGeometry& geom, const TvOptions& opts, ExecMode mode) {
  if (yt.values.rows() != a.entries.rows())
    throw DimensionError("tv_recover_means: data row count does not match measurement count");
  if (geom.n != a.entries.cols())
    throw DimensionError("tv_recover_means: geometry does not match matrix column count");

  TvProblem prob = setup_problem(a, opts);
  const int q = yt.times.q;

  RecoveredMeans out;
  out.means.geometry = geom;
  out.means.radii = yt.times;
  out.means.values.resize(geom.n, q);
  out.diagnostics.slice_objective.resize(q);
  out.diagnostics.slice_iterations.resize(q);

  parallel_for(q, mode, [&](std::int64_t l) {
    TvSliceResult slice = solve_slice(prob, yt.values.col(l), opts, /*keep_trace=*/false);
    out.means.values.col(l) = slice.h;
    out.diagnostics.slice_objective[l] = slice.objective;
    out.diagnostics.slice_iterations[l] = slice.iterations;
    if (!slice.converged) {
#pragma omp atomic
      out.diagnostics.unconverged_slices++;
    }
  });

  out.diagnostics.total_objective = 0.0;
  for (double v : out.diagnostics.slice_objective) out.diagnostics.total_objective += v;
  return out;
}

SourceImage two_step_reconstruct(const CsData& y, const StructuredCsMatrix& a,
                                 const SensorGeometry& geom, const ImageGrid& grid,
                                 const TvOptions& opts, ExecMode mode, TvDiagnostics* diagnostics) {
  CsData yt = y;
  yt.values = apply_T_rows(y.values, y.times, mode);
  RecoveredMeans h = tv_recover_means(a, yt, geom, opts, mode);
  if (diagnostics) *diagnostics = h.diagnostics;
  return fbp_from_means(h.means, geom, grid, mode);
}

}  // namespace cspapi
