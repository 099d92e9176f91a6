#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace cspapi {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

/// n detectors on a circle of radius R covering the angular range Omega.
/// Detector j (0-based) sits at angle Omega*j/n.
struct SensorGeometry {
  int n = 0;
  double R = 0.0;
  double omega = 0.0;
  std::vector<Vec2> positions;
};

/// Uniform time samples t_l = 2R*l/(q-1), l = 0..q-1. Sound speed is
/// rescaled to 1, so the same grid doubles as the radial grid of the
/// circular means.
struct TimeGrid {
  int q = 0;
  double R = 0.0;
  std::vector<double> t;

  double dt() const { return 2.0 * R / (q - 1); }
};

/// Square pixel grid over [-R, R]^2 with n_r samples per axis; pixel centers
/// at -R + (i + 1/2)*h, h = 2R/n_r.
struct ImageGrid {
  int n_r = 0;
  double R = 0.0;

  double h() const { return 2.0 * R / n_r; }
  double coord(int i) const { return -R + (i + 0.5) * h(); }
  bool operator==(const ImageGrid&) const = default;
};

/// Discretized source distribution. values(ix, iy) is the pixel at
/// (coord(ix), coord(iy)); the support must stay strictly inside the
/// detection circle.
struct SourceImage {
  ImageGrid grid;
  Eigen::MatrixXd values;
};

enum class DiscProfile { Uniform, InverseSqrt };

/// Disc building block for phantoms. The inverse-sqrt profile
/// amplitude/sqrt(a^2 - rho^2) has constant line integrals across the disc,
/// which keeps the circular means close to piecewise constant.
struct DiscSpec {
  Vec2 center;
  double radius = 0.0;
  double amplitude = 0.0;
  DiscProfile profile = DiscProfile::Uniform;
};

SensorGeometry make_sensor_geometry(int n, double R, double omega);

/// Detector count required by Shannon sampling for an n_r-pixel target grid:
/// round(pi * n_r / 2).
int nyquist_sensor_count(int n_r);

ImageGrid make_image_grid(int n_r, double R);

TimeGrid make_time_grid(int q, double R);

/// Sums the disc contributions into a fresh image. Overlapping discs add.
/// The inverse-sqrt profile is clamped at rho = a*(1 - 1e-3) to keep pixel
/// values finite.
SourceImage make_disc_phantom(const ImageGrid& grid, const std::vector<DiscSpec>& discs);

/// Bilinear interpolation of the image at an arbitrary point; zero outside
/// the sampled area.
double sample_bilinear(const SourceImage& u, double x, double y);

}  // namespace cspapi
