#include "doctest.h"

#include <cmath>

#include "cspapi/cli.hpp"
#include "cspapi/errors.hpp"
#include "cspapi/recon.hpp"
#include "cspapi/rng.hpp"

using namespace cspapi;

namespace {

StructuredCsMatrix identity_matrix_16() {
  StructureSpec spec{4, 4, 1, 16};
  SelectionList ident;
  for (int b = 0; b < 4; ++b)
    for (int s = 1; s <= 4; ++s) {
      std::vector<int> row(4, 0);
      row[b] = s;
      ident.rows.push_back(row);
    }
  return make_cs_matrix(ident, spec);
}

StructuredCsMatrix designed_matrix(std::uint64_t seed) {
  StructureSpec spec{4, 4, 1, 12};
  DesignResult r = optimize_sin(spec, 4, 300, seed);
  REQUIRE(r.best_sin > 0.1);
  return r.best_matrix;
}

/// Piecewise-constant signal with two jumps, zero elsewhere.
Eigen::VectorXd two_jump_signal(int n, int lo, int hi, double level) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  for (int i = lo; i < hi; ++i) h[i] = level;
  return h;
}

}  // namespace

TEST_CASE("tv slice solve basics") {
  StructuredCsMatrix eye = identity_matrix_16();
  TvOptions opts;
  opts.lambda = 1e-8;
  opts.max_iter = 5000;
  opts.tol = 1e-12;

  SUBCASE("identity with vanishing penalty returns the data") {
    Rng rng(3);
    Eigen::VectorXd y(16);
    for (int i = 0; i < 16; ++i) y[i] = rng.next_gaussian();
    TvSliceResult r = tv_solve_time_slice(eye, y, opts);
    CHECK((r.h - y).norm() / y.norm() < 1e-6);
  }

  SUBCASE("zero data gives the zero minimizer") {
    TvSliceResult r = tv_solve_time_slice(eye, Eigen::VectorXd::Zero(16), opts);
    CHECK(r.h.norm() == 0.0);
    CHECK(r.converged);
  }

  SUBCASE("objective trace never increases") {
    Eigen::VectorXd y(16);
    Rng rng(4);
    for (int i = 0; i < 16; ++i) y[i] = rng.next_gaussian();
    opts.lambda = 0.05;
    TvSliceResult r = tv_solve_time_slice(eye, y, opts);
    for (size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-10);
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(tv_solve_time_slice(eye, Eigen::VectorXd::Zero(9), opts), DimensionError);
  }
}

TEST_CASE("tv recovers a signal with two jumps from compressed data") {
  StructuredCsMatrix a = designed_matrix(17);
  Eigen::VectorXd truth = two_jump_signal(16, 5, 11, 1.0);
  Eigen::VectorXd y = a.entries * truth;

  TvOptions opts;
  opts.lambda = 1e-4;
  opts.max_iter = 20000;
  opts.tol = 1e-13;
  TvSliceResult r = tv_solve_time_slice(a, y, opts);
  CHECK((r.h - truth).norm() / truth.norm() < 1e-2);
}

TEST_CASE("tv solution scales with jointly scaled data and penalty") {
  StructuredCsMatrix a = designed_matrix(23);
  Eigen::VectorXd truth = two_jump_signal(16, 3, 9, 1.0);
  Eigen::VectorXd y = a.entries * truth;

  TvOptions opts;
  opts.lambda = 1e-3;
  opts.max_iter = 20000;
  opts.tol = 1e-13;
  TvSliceResult base = tv_solve_time_slice(a, y, opts);

  TvOptions scaled = opts;
  scaled.lambda = 2.0 * opts.lambda;
  TvSliceResult doubled = tv_solve_time_slice(a, 2.0 * y, scaled);
  // both runs are near-minimizers, so they agree at solver accuracy
  CHECK((doubled.h - 2.0 * base.h).norm() / (2.0 * base.h.norm()) < 2e-4);
}

TEST_CASE("full-rank measurement with tiny penalty matches least squares") {
  StructuredCsMatrix eye = identity_matrix_16();
  SensorGeometry geom = make_sensor_geometry(16, 1.0, 2.0 * M_PI);
  TimeGrid times = make_time_grid(32, 1.0);

  CsData yt;
  yt.times = times;
  yt.values.resize(16, times.q);
  Rng rng(6);
  for (long j = 0; j < yt.values.cols(); ++j)
    for (long i = 0; i < yt.values.rows(); ++i) yt.values(i, j) = rng.next_gaussian();

  TvOptions opts;
  opts.lambda = 1e-8;
  opts.max_iter = 200000;
  opts.tol = 1e-15;
  RecoveredMeans rec = tv_recover_means(eye, yt, geom, opts);
  CHECK(relative_l2(rec.means.values, yt.values) < 1e-6);
}

TEST_CASE("per-group boundary mode decomposes into independent group solves") {
  StructureSpec spec{4, 4, 4, 12};
  std::vector<StructuredCsMatrix> groups;
  for (int g = 0; g < 4; ++g) {
    DesignResult d = optimize_sin(spec, 4, 300, 300 + g);
    REQUIRE(d.best_sin > 0.1);
    groups.push_back(d.best_matrix);
  }
  StructuredCsMatrix a = assemble_block_diagonal(groups);

  Eigen::VectorXd truth(64);
  for (int g = 0; g < 4; ++g) truth.segment(16 * g, 16) = two_jump_signal(16, 2 + g, 9 + g, 1.0 + g);
  Eigen::VectorXd y = a.entries * truth;

  TvOptions opts;
  opts.lambda = 1e-3;
  opts.max_iter = 20000;
  opts.tol = 1e-13;
  opts.boundary = TvBoundary::PerGroup;
  TvSliceResult whole = tv_solve_time_slice(a, y, opts);

  double parts_objective = 0.0;
  for (int g = 0; g < 4; ++g) {
    TvSliceResult part = tv_solve_time_slice(groups[g], y.segment(12 * g, 12), opts);
    parts_objective += part.objective;
    CHECK((whole.h.segment(16 * g, 16) - part.h).norm() < 1e-4 * std::max(1.0, part.h.norm()));
  }
  // the joint problem separates, so the objectives must agree as well
  CHECK(whole.objective == doctest::Approx(parts_objective).epsilon(1e-5));
}

TEST_CASE("tv recovery of forward-synthesized slices is near exact") {
  StructureSpec spec{4, 4, 4, 12};
  DesignResult d = optimize_sin(spec, 4, 300, 31);
  REQUIRE(d.best_sin > 0.1);
  std::vector<StructuredCsMatrix> groups(4, d.best_matrix);
  StructuredCsMatrix a = assemble_block_diagonal(groups);
  SensorGeometry geom = make_sensor_geometry(64, 1.0, 2.0 * M_PI);
  TimeGrid times = make_time_grid(24, 1.0);

  // each slice is piecewise constant with a single active run of sensors
  Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(64, times.q);
  for (int l = 0; l < times.q; ++l)
    truth.col(l) = two_jump_signal(64, (3 * l) % 50, (3 * l) % 50 + 6, 1.0 + 0.1 * l);

  CsData yt;
  yt.times = times;
  yt.values = a.entries * truth;

  TvOptions opts;
  opts.lambda = 1e-4;
  opts.max_iter = 20000;
  opts.tol = 1e-13;
  RecoveredMeans rec = tv_recover_means(a, yt, geom, opts);
  CHECK(relative_l2(rec.means.values, truth) < 1e-2);

  SUBCASE("zero data recovers zero means") {
    CsData zero = yt;
    zero.values.setZero();
    RecoveredMeans rz = tv_recover_means(a, zero, geom, opts);
    CHECK(rz.means.values.norm() == 0.0);
  }
}
