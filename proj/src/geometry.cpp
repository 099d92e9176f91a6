#include "cspapi/geometry.hpp"

#include <stdexcept>

namespace cspapi {

SensorGeometry make_sensor_geometry(int n, double R, double omega) {
  if (n < 1) throw std::invalid_argument("make_sensor_geometry: n must be positive");
  if (R <= 0.0) throw std::invalid_argument("make_sensor_geometry: R must be positive");
  if (omega <= 0.0 || omega > 2.0 * M_PI + 1e-12)
    throw std::invalid_argument("make_sensor_geometry: omega must be in (0, 2*pi]");

  SensorGeometry geom;
  geom.n = n;
  geom.R = R;
  geom.omega = omega;
  geom.positions.resize(n);
  for (int j = 0; j < n; ++j) {
    double phi = omega * static_cast<double>(j) / n;
    geom.positions[j] = {R * std::cos(phi), R * std::sin(phi)};
  }
  return geom;
}

int nyquist_sensor_count(int n_r) {
  if (n_r < 1) throw std::invalid_argument("nyquist_sensor_count: n_r must be positive");
  return static_cast<int>(std::lround(M_PI * n_r / 2.0));
}

ImageGrid make_image_grid(int n_r, double R) {
  if (n_r < 1) throw std::invalid_argument("make_image_grid: n_r must be positive");
  if (R <= 0.0) throw std::invalid_argument("make_image_grid: R must be positive");
  return ImageGrid{n_r, R};
}

TimeGrid make_time_grid(int q, double R) {
  if (q < 2) throw std::invalid_argument("make_time_grid: q must be at least 2");
  if (R <= 0.0) throw std::invalid_argument("make_time_grid: R must be positive");
  TimeGrid tg;
  tg.q = q;
  tg.R = R;
  tg.t.resize(q);
  for (int l = 0; l < q; ++l) tg.t[l] = 2.0 * R * static_cast<double>(l) / (q - 1);
  return tg;
}

SourceImage make_disc_phantom(const ImageGrid& grid, const std::vector<DiscSpec>& discs) {
  constexpr double kClipFraction = 1e-3;

  for (const auto& d : discs) {
    if (d.radius <= 0.0) throw std::invalid_argument("make_disc_phantom: disc radius must be positive");
    if (d.center.norm() + d.radius >= grid.R)
      throw std::invalid_argument("make_disc_phantom: disc must lie strictly inside the detection circle");
  }

  SourceImage u;
  u.grid = grid;
  u.values = Eigen::MatrixXd::Zero(grid.n_r, grid.n_r);

  for (const auto& d : discs) {
    const double a = d.radius;
    const double rho_clip = a * (1.0 - kClipFraction);
    const double clip_value = d.amplitude / std::sqrt(a * a - rho_clip * rho_clip);
    for (int ix = 0; ix < grid.n_r; ++ix) {
      double dx = grid.coord(ix) - d.center.x;
      if (std::abs(dx) >= a) continue;
      for (int iy = 0; iy < grid.n_r; ++iy) {
        double dy = grid.coord(iy) - d.center.y;
        double rho2 = dx * dx + dy * dy;
        if (rho2 >= a * a) continue;
        if (d.profile == DiscProfile::Uniform) {
          u.values(ix, iy) += d.amplitude;
        } else {
          double rho = std::sqrt(rho2);
          u.values(ix, iy) += (rho < rho_clip) ? d.amplitude / std::sqrt(a * a - rho2) : clip_value;
        }
      }
    }
  }
  return u;
}

double sample_bilinear(const SourceImage& u, double x, double y) {
  const ImageGrid& g = u.grid;
  const double h = g.h();
  double gx = (x + g.R) / h - 0.5;
  double gy = (y + g.R) / h - 0.5;
  int i0 = static_cast<int>(std::floor(gx));
  int j0 = static_cast<int>(std::floor(gy));
  double fx = gx - i0;
  double fy = gy - j0;

  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= g.n_r || j < 0 || j >= g.n_r) return 0.0;
    return u.values(i, j);
  };

  return (1.0 - fx) * (1.0 - fy) * at(i0, j0) + fx * (1.0 - fy) * at(i0 + 1, j0) +
         (1.0 - fx) * fy * at(i0, j0 + 1) + fx * fy * at(i0 + 1, j0 + 1);
}

}  // namespace cspapi
