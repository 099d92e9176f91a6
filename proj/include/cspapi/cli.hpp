#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cspapi/csdesign.hpp"
#include "cspapi/geometry.hpp"
#include "cspapi/recon.hpp"

namespace cspapi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitDesignInfeasible = 2;
inline constexpr int kExitIoError = 3;
inline constexpr int kExitDimensionMismatch = 4;

/// ||a - b|| / ||b||; rejects shape mismatches and a zero reference.
double relative_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct GeometryConfig {
  int n = 64;
  double R = 1.0;
  double omega = 2.0 * M_PI;
  int q = 512;
  int n_r = 128;
};

struct DesignConfig {
  StructureSpec spec;       // b=4, g=4, group_count=4, m0=12
  int k = 4;
  long n_iter = 100;
  bool per_group_design = false;
};

struct PhantomConfig {
  std::string preset = "sparse";   // "sparse" | "nonsparse" | "" (use discs)
  std::vector<DiscSpec> discs;
};

struct TvConfig {
  double lambda = 0.0;  // <= 0 selects the automatic scale-based default
  int max_iter = 2000;
  double tol = 1e-8;
  TvBoundary boundary = TvBoundary::Circular;
};

struct ExperimentConfig {
  GeometryConfig geometry;
  DesignConfig design;
  PhantomConfig phantom;
  double noise = 0.0;
  TvConfig tv;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
};

/// Parses a config JSON document; missing fields keep their defaults.
/// Validates n = b * g * group_count.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Disc list of a named phantom preset ("sparse" or "nonsparse").
std::vector<DiscSpec> phantom_preset(const std::string& name);
SourceImage build_phantom(const ExperimentConfig& cfg);

/// Largest per-group count of gradient jumps over all time slices, where a
/// jump is a run of same-sign first differences exceeding
/// threshold_frac * max|values|.
int max_gradient_jumps_per_group(const Eigen::MatrixXd& values, int group_size,
                                 double threshold_frac = 0.1);

/// Experiment stages. Each writes its artifacts under cfg.out and returns a
/// process exit code.
int run_design(const ExperimentConfig& cfg);
int run_simulate(const ExperimentConfig& cfg);
int run_reconstruct(const ExperimentConfig& cfg);
int run_evaluate(const std::vector<std::filesystem::path>& reports,
                 const std::filesystem::path& out_dir);
int run_pipeline(const ExperimentConfig& cfg);

}  // namespace cspapi
