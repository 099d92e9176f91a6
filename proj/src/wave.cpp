#include "cspapi/wave.hpp"

#include <cmath>

#include "cspapi/errors.hpp"
#include <stdexcept>

namespace cspapi {

namespace {

void check_consistent(int n_rows, const SensorGeometry& geom, const TimeGrid& grid,
                      const Eigen::MatrixXd& values, const char* who) {
  if (values.rows() != n_rows || values.cols() != grid.q)
    throw DimensionError(std::string(who) + ": value array shape does not match grids");
  (void)geom;
}

/// d/dt of a sampled function: central differences interior, one-sided ends.
Eigen::VectorXd time_derivative(const Eigen::VectorXd& g, double dt) {
  const int q = static_cast<int>(g.size());
  Eigen::VectorXd d(q);
  d[0] = (g[1] - g[0]) / dt;
  for (int i = 1; i + 1 < q; ++i) d[i] = (g[i + 1] - g[i - 1]) / (2.0 * dt);
  d[q - 1] = (g[q - 1] - g[q - 2]) / dt;
  return d;
}

Eigen::VectorXd cumtrapz(const Eigen::VectorXd& p, double dt) {
  const int q = static_cast<int>(p.size());
  Eigen::VectorXd g(q);
  g[0] = 0.0;
  for (int i = 1; i < q; ++i) g[i] = g[i - 1] + 0.5 * dt * (p[i - 1] + p[i]);
  return g;
}

}  // namespace

AbelOperator::AbelOperator(const TimeGrid& grid) : q_(grid.q) {
  w_ = Eigen::MatrixXd::Zero(q_, q_);
  const std::vector<double>& r = grid.t;
  const double dr = grid.dt();
  for (int i = 1; i < q_; ++i) {
    const double t = r[i];
    // Cells [r_k, r_{k+1}], k < i. With f linear on the cell,
    //   integral = alpha*(asin(r/t) diff) + beta*(sqrt(t^2-r^2) drop),
    // alpha + beta*r the interpolant. The last cell ends exactly at r = t.
    double asin_lo = 0.0;            // asin(r_0/t), r_0 = 0
    double s_lo = t;                 // sqrt(t^2 - r_0^2)
    for (int k = 0; k < i; ++k) {
      double r_hi = r[k + 1];
      double asin_hi = (k + 1 == i) ? M_PI / 2.0 : std::asin(r_hi / t);
      double s_hi = (k + 1 == i) ? 0.0 : std::sqrt((t - r_hi) * (t + r_hi));
      double d_asin = asin_hi - asin_lo;
      double d_s = s_lo - s_hi;
      double slope_w = (d_s - r[k] * d_asin) / dr;
      w_(i, k) += d_asin - slope_w;
      w_(i, k + 1) += slope_w;
      asin_lo = asin_hi;
      s_lo = s_hi;
    }
  }
}

Eigen::VectorXd AbelOperator::forward(const Eigen::VectorXd& f) const {
  if (f.size() != q_) throw DimensionError("AbelOperator::forward: size mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(q_);
  for (int i = 1; i < q_; ++i) {
    double acc = 0.0;
    for (int k = 1; k <= i; ++k) acc += w_(i, k) * f[k];
    g[i] = acc;
  }
  return g;
}

Eigen::VectorXd AbelOperator::solve(const Eigen::VectorXd& g) const {
  if (g.size() != q_) throw DimensionError("AbelOperator::solve: size mismatch");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(q_);
  for (int i = 1; i < q_; ++i) {
    double acc = g[i];
    for (int k = 1; k < i; ++k) acc -= w_(i, k) * f[k];
    f[i] = acc / w_(i, i);
  }
  return f;
}

MeansData circular_means(const SourceImage& u, const SensorGeometry& geom, const TimeGrid& radii,
                         int n_angles, ExecMode mode) {
  const int n = geom.n;
  const int q = radii.q;
  const int K = (n_angles > 0) ? n_angles : 4 * u.grid.n_r;

  MeansData m;
  m.geometry = geom;
  m.radii = radii;
  m.values.resize(n, q);

  parallel_for(static_cast<std::int64_t>(n) * q, mode, [&](std::int64_t idx) {
    const int j = static_cast<int>(idx / q);
    const int l = static_cast<int>(idx % q);
    const Vec2 s = geom.positions[j];
    if (l == 0) {
      m.values(j, 0) = sample_bilinear(u, s.x, s.y);
      return;
    }
    const double r = radii.t[l];
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
      double phi = 2.0 * M_PI * k / K;
      acc += sample_bilinear(u, s.x + r * std::cos(phi), s.y + r * std::sin(phi));
    }
    m.values(j, l) = acc / K;
  });
  return m;
}

PressureData wave_forward(const SourceImage& u, const SensorGeometry& geom, const TimeGrid& times,
                          int n_angles, ExecMode mode) {
  MeansData m = circular_means(u, geom, times, n_angles, mode);
  AbelOperator abel(times);
  const double dt = times.dt();

  PressureData p;
  p.geometry = geom;
  p.times = times;
  p.values.resize(geom.n, times.q);

  parallel_for(geom.n, mode, [&](std::int64_t j) {
    Eigen::VectorXd f(times.q);
    for (int l = 0; l < times.q; ++l) f[l] = times.t[l] * m.values(j, l);
    Eigen::VectorXd g = abel.forward(f);
    p.values.row(j) = time_derivative(g, dt).transpose();
  });
  return p;
}

Eigen::MatrixXd apply_T_rows(const Eigen::MatrixXd& rows, const TimeGrid& grid, ExecMode mode) {
  if (rows.cols() != grid.q) throw DimensionError("apply_T_rows: column count != q");
  AbelOperator abel(grid);
  const double dt = grid.dt();
  Eigen::MatrixXd out(rows.rows(), rows.cols());

  parallel_for(rows.rows(), mode, [&](std::int64_t j) {
    Eigen::VectorXd g = cumtrapz(rows.row(j).transpose(), dt);
    Eigen::VectorXd f = abel.solve(g);
    Eigen::VectorXd h(grid.q);
    for (int l = 1; l < grid.q; ++l) h[l] = f[l] / grid.t[l];
    // r = 0: quadratic extrapolation through the first three radial samples.
    h[0] = 3.0 * h[1] - 3.0 * h[2] + h[3];
    out.row(j) = h.transpose();
  });
  return out;
}

Eigen::MatrixXd apply_T_inverse_rows(const Eigen::MatrixXd& rows, const TimeGrid& grid,
                                     ExecMode mode) {
  if (rows.cols() != grid.q) throw DimensionError("apply_T_inverse_rows: column count != q");
  AbelOperator abel(grid);
  const double dt = grid.dt();
  Eigen::MatrixXd out(rows.rows(), rows.cols());

  parallel_for(rows.rows(), mode, [&](std::int64_t j) {
    Eigen::VectorXd f(grid.q);
    f[0] = 0.0;
    for (int l = 1; l < grid.q; ++l) f[l] = grid.t[l] * rows(j, l);
    Eigen::VectorXd g = abel.forward(f);
    out.row(j) = time_derivative(g, dt).transpose();
  });
  return out;
}

MeansData apply_T(const PressureData& p, ExecMode mode) {
  check_consistent(p.geometry.n, p.geometry, p.times, p.values, "apply_T");
  MeansData h;
  h.geometry = p.geometry;
  h.radii = p.times;
  h.values = apply_T_rows(p.values, p.times, mode);
  return h;
}

PressureData apply_T_inverse(const MeansData& h, ExecMode mode) {
  check_consistent(h.geometry.n, h.geometry, h.radii, h.values, "apply_T_inverse");
  PressureData p;
  p.geometry = h.geometry;
  p.times = h.radii;
  p.values = apply_T_inverse_rows(h.values, h.radii, mode);
  return p;
}

SourceImage fbp_from_pressure(const PressureData& p, const SensorGeometry& geom,
                              const ImageGrid& grid, ExecMode mode) {
  check_consistent(geom.n, geom, p.times, p.values, "fbp_from_pressure");
  const int n = geom.n;
  const int q = p.times.q;
  const double dt = p.times.dt();
  const double t_max = p.times.t[q - 1];

  // Filter d/dt (t * p) per detector, and record the nonzero span of each
  // filtered row so the inner integral can skip cells that contribute zero.
  Eigen::MatrixXd filt(n, q);
  std::vector<int> first_nz(n), last_nz(n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd tp(q);
    for (int l = 0; l < q; ++l) tp[l] = p.times.t[l] * p.values(j, l);
    filt.row(j) = time_derivative(tp, dt).transpose();
    int lo = 0, hi = q - 1;
    while (lo < q && filt(j, lo) == 0.0) ++lo;
    while (hi >= 0 && filt(j, hi) == 0.0) --hi;
    first_nz[j] = lo;
    last_nz[j] = hi;
  }

  // The inversion integral runs to infinity, but the support sits inside the
  // detection circle, so the means vanish beyond the sampled window and the
  // measured data determines the filtered signal for t > t_max:
  //   filt(t) = integral f(r) t (t^2 + 2 r^2) (t^2 - r^2)^(-5/2) dr,
  // with f = r * m recovered by the triangular Abel solve. A hard cut at
  // t_max leaves a several-percent halo in the image.
  const double ext_step = 4.0 * dt;
  const int q_ext = static_cast<int>(std::ceil((4.0 * t_max - t_max) / ext_step));
  const double t_end = t_max + q_ext * ext_step;
  Eigen::MatrixXd filt_ext(n, q_ext);
  Eigen::VectorXd tail_mass(n);
  {
    AbelOperator abel(p.times);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd f = abel.solve(cumtrapz(p.values.row(j).transpose(), dt));
      for (int i = 0; i < q_ext; ++i) {
        const double t = t_max + (i + 1) * ext_step;
        double acc = 0.0;
        for (int l = 1; l < q; ++l) {  // trapezoid; f[0] = 0
          const double r = p.times.t[l];
          const double d2 = (t - r) * (t + r);
          const double kernel = t * (t * t + 2.0 * r * r) / (d2 * d2 * std::sqrt(d2));
          acc += ((l + 1 < q) ? 1.0 : 0.5) * f[l] * kernel * dt;
        }
        filt_ext(j, i) = acc;
      }
      // t^(-2) coefficient of the far tail, for the closed-form remainder
      double m1 = 0.0;
      for (int l = 1; l < q; ++l) m1 += ((l + 1 < q) ? 1.0 : 0.5) * f[l] * dt;
      tail_mass[j] = m1;
    }
  }

  SourceImage out;
  out.grid = grid;
  out.values.resize(grid.n_r, grid.n_r);
  const double weight = -geom.omega / (M_PI * n);  // -(1/(pi R)) * arc length R*Omega/n

  parallel_for(static_cast<std::int64_t>(grid.n_r) * grid.n_r, mode, [&](std::int64_t idx) {
    const int ix = static_cast<int>(idx / grid.n_r);
    const int iy = static_cast<int>(idx % grid.n_r);
    const double x = grid.coord(ix);
    const double y = grid.coord(iy);

    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (first_nz[j] > last_nz[j]) continue;
      const double rho = std::hypot(x - geom.positions[j].x, y - geom.positions[j].y);
      if (rho >= t_max) continue;

      // integral_rho^{t_max} filt(t)/sqrt(t^2 - rho^2) dt with filt piecewise
      // linear; per cell the antiderivatives are log(t + sqrt(t^2 - rho^2))
      // and sqrt(t^2 - rho^2).
      int k0 = std::min(static_cast<int>(rho / dt), q - 2);
      int k_begin = std::max(k0, first_nz[j] - 1);
      int k_end = std::min(q - 2, last_nz[j]);
      if (k_begin > k_end) continue;

      double a = std::max(p.times.t[k_begin], rho);
      double s_lo = std::sqrt(std::max(0.0, (a - rho) * (a + rho)));
      double l_lo = std::log(a + s_lo);
      for (int k = k_begin; k <= k_end; ++k) {
        const double tb = p.times.t[k + 1];
        const double s_hi = std::sqrt((tb - rho) * (tb + rho));
        const double l_hi = std::log(tb + s_hi);
        const double fa = filt(j, k);
        const double fb = filt(j, k + 1);
        const double slope = (fb - fa) / dt;
        const double alpha = fa - slope * p.times.t[k];
        acc += alpha * (l_hi - l_lo) + slope * (s_hi - s_lo);
        s_lo = s_hi;
        l_lo = l_hi;
      }

      // computed tail on the coarse extension grid
      {
        double ta = t_max;
        double s_ext = std::sqrt((ta - rho) * (ta + rho));
        double l_ext = std::log(ta + s_ext);
        double fa = filt(j, q - 1);
        for (int i = 0; i < q_ext; ++i) {
          const double tb = t_max + (i + 1) * ext_step;
          const double s_hi = std::sqrt((tb - rho) * (tb + rho));
          const double l_hi = std::log(tb + s_hi);
          const double fb = filt_ext(j, i);
          const double slope = (fb - fa) / ext_step;
          const double alpha = fa - slope * ta;
          acc += alpha * (l_hi - l_ext) + slope * (s_hi - s_ext);
          s_ext = s_hi;
          l_ext = l_hi;
          ta = tb;
          fa = fb;
        }
        // remainder beyond the extension, with filt ~ tail_mass / t^2:
        // integral_T^inf dt / (t^2 sqrt(t^2 - rho^2)) = 1 / (T^2 (1 + sqrt(1 - (rho/T)^2)))
        const double xr = rho / t_end;
        acc += tail_mass[j] / (t_end * t_end * (1.0 + std::sqrt(1.0 - xr * xr)));
      }
    }
    out.values(ix, iy) = weight * acc;
  });
  return out;
}

SourceImage fbp_from_means(const MeansData& h, const SensorGeometry& geom, const ImageGrid& grid,
                           ExecMode mode) {
  return fbp_from_pressure(apply_T_inverse(h, mode), geom, grid, mode);
}

}  // namespace cspapi
