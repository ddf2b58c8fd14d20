#pragma once

// Random shape generators and brute-force oracles shared by the unit tests
// and the acceptance run. The oracles deliberately avoid the library code
// they check: plain loops over pixels, rays marched in small steps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gaitgender/distance_signal.hpp"
#include "gaitgender/silhouette.hpp"

namespace gaitgender::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Mask random_mask(std::mt19937_64& rng, int rows, int cols, double density = 0.4) {
  std::bernoulli_distribution on(density);
  Mask m(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) m(y, x) = on(rng) ? 1 : 0;
  }
  return m;
}

inline Mask disk(int rows, int cols, double cx, double cy, double r) {
  Mask m = Mask::Zero(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m(y, x) = 1;
    }
  }
  return m;
}

inline Mask rect(int rows, int cols, int x0, int y0, int w, int h) {
  Mask m = Mask::Zero(rows, cols);
  m.block(y0, x0, h, w).setOnes();
  return m;
}

/// Star-shaped polygon around (cx, cy): `vertices` radii in [rmin, rmax] at
/// equally spaced angles, rasterized by even-odd point-in-polygon at pixel
/// centers.
inline Mask star_polygon(std::mt19937_64& rng, int size, double cx, double cy, int vertices,
                         double rmin, double rmax, std::vector<std::array<double, 2>>* corners = nullptr) {
  std::vector<double> px;
  std::vector<double> py;
  for (int i = 0; i < vertices; ++i) {
    const double a = 2.0 * std::numbers::pi * i / vertices;
    const double r = uniform(rng, rmin, rmax);
    px.push_back(cx + r * std::cos(a));
    py.push_back(cy - r * std::sin(a));
    if (corners) corners->push_back({px.back(), py.back()});
  }
  Mask m = Mask::Zero(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      bool inside = false;
      for (int i = 0, j = vertices - 1; i < vertices; j = i++) {
        if ((py[i] > y) != (py[j] > y) && x < (px[j] - px[i]) * (y - py[i]) / (py[j] - py[i]) + px[i]) {
          inside = !inside;
        }
      }
      m(y, x) = inside ? 1 : 0;
    }
  }
  return m;
}

/// Smallest angle, in degrees, between a polygon edge and the ray from `c`
/// through a point of that edge, sampled along every edge. Near 0 means the
/// boundary runs almost radially there.
inline double min_edge_ray_angle(const std::vector<std::array<double, 2>>& corners, const Centroid& c) {
  double best = 90.0;
  const std::size_t n = corners.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = corners[i];
    const auto& b = corners[(i + 1) % n];
    const double ex = b[0] - a[0];
    const double ey = b[1] - a[1];
    const double elen = std::hypot(ex, ey);
    for (int k = 0; k <= 20; ++k) {
      const double x = a[0] + ex * k / 20.0 - c.x;
      const double y = a[1] + ey * k / 20.0 - c.y;
      const double rlen = std::hypot(x, y);
      if (rlen < 1e-9 || elen < 1e-9) continue;
      const double cosang = std::abs(x * ex + y * ey) / (rlen * elen);
      best = std::min(best, std::acos(std::min(1.0, cosang)) * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

/// Union of a few overlapping discs; always one 8-connected component.
inline Mask random_blob(std::mt19937_64& rng, int size) {
  Mask m = Mask::Zero(size, size);
  double cx = size / 2.0;
  double cy = size / 2.0;
  const int n = 3 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    const double r = uniform(rng, size / 10.0, size / 5.0);
    m = m.max(disk(size, size, cx, cy, r));
    const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    cx = std::clamp(cx + 0.8 * r * std::cos(a), size / 4.0, 3.0 * size / 4.0);
    cy = std::clamp(cy + 0.8 * r * std::sin(a), size / 4.0, 3.0 * size / 4.0);
  }
  return m;
}

inline double brute_moment(const Mask& m, int i, int j) {
  double s = 0.0;
  for (int y = 0; y < m.rows(); ++y) {
    for (int x = 0; x < m.cols(); ++x) {
      if (m(y, x) == 0) continue;
      double term = 1.0;
      for (int k = 0; k < i; ++k) term *= x;
      for (int k = 0; k < j; ++k) term *= y;
      s += term;
    }
  }
  return s;
}

inline Centroid brute_centroid(const Mask& m) {
  double sx = 0.0;
  double sy = 0.0;
  std::int64_t n = 0;
  for (int y = 0; y < m.rows(); ++y) {
    for (int x = 0; x < m.cols(); ++x) {
      if (m(y, x) == 0) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

/// Distance from `c` to the center of the last foreground pixel met while
/// marching outwards at `deg` (counterclockwise on screen from +x).
inline double ray_cast(const Mask& m, const Centroid& c, double deg, int* last_row = nullptr) {
  const double a = deg * std::numbers::pi / 180.0;
  const double dx = std::cos(a);
  const double dy = -std::sin(a);
  double best = 0.0;
  const double limit = std::hypot(static_cast<double>(m.rows()), static_cast<double>(m.cols()));
  for (double t = 0.0; t <= limit; t += 0.05) {
    const int x = static_cast<int>(std::lround(c.x + t * dx));
    const int y = static_cast<int>(std::lround(c.y + t * dy));
    if (x < 0 || y < 0 || x >= m.cols() || y >= m.rows()) break;
    if (m(y, x) != 0) {
      best = std::hypot(x - c.x, y - c.y);
      if (last_row) *last_row = y;
    }
  }
  return best;
}

/// Row of the farthest boundary pixel (foreground with a 4-neighbour outside
/// the shape) from `c` in each angular bin, by scanning every pixel; -1 for
/// bins no boundary pixel reaches.
inline std::vector<int> farthest_boundary_rows(const Mask& m, const Centroid& c, int bins) {
  std::vector<int> row(bins, -1);
  std::vector<double> dist(bins, -1.0);
  const double w = 360.0 / bins;
  for (Eigen::Index y = 0; y < m.rows(); ++y) {
    for (Eigen::Index x = 0; x < m.cols(); ++x) {
      if (m(y, x) == 0) continue;
      auto bg = [&](Eigen::Index yy, Eigen::Index xx) {
        return yy < 0 || xx < 0 || yy >= m.rows() || xx >= m.cols() || m(yy, xx) == 0;
      };
      if (!bg(y - 1, x) && !bg(y + 1, x) && !bg(y, x - 1) && !bg(y, x + 1)) continue;
      double deg = std::atan2(c.y - y, x - c.x) * 180.0 / std::numbers::pi;
      if (deg < 0) deg += 360.0;
      const int k = static_cast<int>(std::floor(deg / w + 0.5)) % bins;
      const double d = std::hypot(x - c.x, y - c.y);
      if (d > dist[k]) {
        dist[k] = d;
        row[k] = static_cast<int>(y);
      }
    }
  }
  return row;
}

/// Pixel-wise max/min over signals, by direct scan.
inline void brute_envelope(const std::vector<DistanceSignal>& signals, Eigen::ArrayXd& upper,
                           Eigen::ArrayXd& lower) {
  const int n = signals.front().size();
  upper.resize(n);
  lower.resize(n);
  for (int k = 0; k < n; ++k) {
    double hi = -1e300;
    double lo = 1e300;
    for (const auto& s : signals) {
      if (s.bins[k] > hi) hi = s.bins[k];
      if (s.bins[k] < lo) lo = s.bins[k];
    }
    upper[k] = hi;
    lower[k] = lo;
  }
}

/// Maps `inner` (same raster as `outer`) through the transform normalize()
/// applies to `outer`: crop to the tight box of its largest component, scale
/// to `height` rows, shift its centroid to the middle column. Used to compare
/// a cleaned silhouette against the attachment-free render of the same frame.
inline Mask same_frame(const Mask& outer, const Mask& inner, int height = 144, int width = 144) {
  const Mask lc = largest_component(outer);
  const BoundingBox t = *foreground_bounds(lc);
  const double scale = static_cast<double>(height) / t.height;
  const int sw = std::max(1, round_half_up(t.width * scale));
  const Mask so = resize_nearest(lc.block(t.y, t.x, t.height, t.width), height, sw);
  const Mask si = resize_nearest(Mask(inner.block(t.y, t.x, t.height, t.width)), height, sw);
  const int off = round_half_up(width / 2.0 - brute_centroid(so).x);
  Mask out = Mask::Zero(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < sw; ++x) {
      if (x + off >= 0 && x + off < width) out(y, x + off) = si(y, x);
    }
  }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("gaitgender-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace gaitgender::testing
