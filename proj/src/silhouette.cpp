#include "gaitgender/silhouette.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace gaitgender {

RawSilhouette::RawSilhouette(Mask mask) : mask_(std::move(mask)) {
  if (mask_.rows() < 1 || mask_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "silhouette must be at least 1x1");
  }
  mask_ = (mask_ != 0).cast<std::uint8_t>();
}

RawSilhouette::RawSilhouette(int width, int height, std::span<const std::uint8_t> row_major) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "silhouette must be at least 1x1");
  }
  if (row_major.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::ShapeMismatch,
                "mask length " + std::to_string(row_major.size()) + " != " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  mask_.resize(height, width);
  for (int i = 0; i < width * height; ++i) mask_.data()[i] = row_major[i] != 0 ? 1 : 0;
}

std::int64_t popcount(const Mask& mask) { return (mask != 0).count(); }

Centroid centroid(const Mask& mask) {
  // Integer accumulation keeps the result exact for any practical raster.
  std::int64_t m00 = 0;
  std::int64_t m10 = 0;
  std::int64_t m01 = 0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x) != 0) {
        ++m00;
        m10 += x;
        m01 += y;
      }
    }
  }
  if (m00 == 0) throw Error(ErrorCode::EmptySilhouette, "centroid of an empty silhouette");
  return {static_cast<double>(m10) / static_cast<double>(m00),
          static_cast<double>(m01) / static_cast<double>(m00)};
}

std::optional<BoundingBox> foreground_bounds(const Mask& mask) {
  int x0 = static_cast<int>(mask.cols());
  int y0 = static_cast<int>(mask.rows());
  int x1 = -1;
  int y1 = -1;
  for (int y = 0; y < mask.rows(); ++y) {
    for (int x = 0; x < mask.cols(); ++x) {
      if (mask(y, x) == 0) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Mask largest_component(const Mask& mask) {
  const int rows = static_cast<int>(mask.rows());
  const int cols = static_cast<int>(mask.cols());
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> label =
      Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(rows, cols);

  int next_label = 0;
  int best_label = 0;
  std::int64_t best_size = 0;
  std::vector<Pixel> stack;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (mask(y, x) == 0 || label(y, x) != 0) continue;
      ++next_label;
      std::int64_t size = 0;
      stack.push_back({x, y});
      label(y, x) = next_label;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        ++size;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (nx < 0 || ny < 0 || nx >= cols || ny >= rows) continue;
            if (mask(ny, nx) == 0 || label(ny, nx) != 0) continue;
            label(ny, nx) = next_label;
            stack.push_back({nx, ny});
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next_label;
      }
    }
  }
  if (next_label <= 1) return (mask != 0).cast<std::uint8_t>();
  return (label == best_label).cast<std::uint8_t>();
}

Mask resize_nearest(const Mask& src, int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "resize to an empty raster");
  Mask dst(rows, cols);
  const double sy = static_cast<double>(src.rows()) / rows;
  const double sx = static_cast<double>(src.cols()) / cols;
  std::vector<Eigen::Index> col_map(cols);
  for (int c = 0; c < cols; ++c) {
    col_map[c] = std::min<Eigen::Index>(src.cols() - 1,
                                        static_cast<Eigen::Index>(std::floor((c + 0.5) * sx)));
  }
  for (int r = 0; r < rows; ++r) {
    const auto sr = std::min<Eigen::Index>(src.rows() - 1,
                                           static_cast<Eigen::Index>(std::floor((r + 0.5) * sy)));
    for (int c = 0; c < cols; ++c) dst(r, c) = src(sr, col_map[c]);
  }
  return dst;
}

NormalizedSilhouette normalize(const RawSilhouette& s, const BoundingBox& box,
                               const NormalizationParams& params, std::string source_id) {
  if (params.height < 1 || params.width < 1) {
    throw Error(ErrorCode::InvalidArgument, "normalized size must be positive");
  }
  const int x0 = std::max(0, box.x);
  const int y0 = std::max(0, box.y);
  const int x1 = std::min(s.width(), box.x + box.width);
  const int y1 = std::min(s.height(), box.y + box.height);
  if (x1 <= x0 || y1 <= y0) {
    throw Error(ErrorCode::DegenerateBox, "bounding box does not overlap the silhouette raster");
  }
  const Mask crop = largest_component(s.mask().block(y0, x0, y1 - y0, x1 - x0));
  const auto tight = foreground_bounds(crop);
  if (!tight) throw Error(ErrorCode::EmptySilhouette, "no foreground inside bounding box");
  if (tight->width == 0 || tight->height == 0) {
    throw Error(ErrorCode::DegenerateBox, "tight foreground extent is degenerate");
  }

  const double scale = static_cast<double>(params.height) / tight->height;
  const int scaled_width = std::max(1, round_half_up(tight->width * scale));
  const Mask scaled = resize_nearest(
      crop.block(tight->y, tight->x, tight->height, tight->width), params.height, scaled_width);

  const Centroid c = centroid(scaled);
  const int offset = round_half_up(params.width / 2.0 - c.x);

  Mask out = Mask::Zero(params.height, params.width);
  const int dst_begin = std::max(0, offset);
  const int dst_end = std::min(params.width, offset + scaled_width);
  if (dst_end > dst_begin) {
    out.middleCols(dst_begin, dst_end - dst_begin) =
        scaled.middleCols(dst_begin - offset, dst_end - dst_begin);
  }
  return NormalizedSilhouette(std::move(out), std::move(source_id));
}

NormalizedSilhouette normalize(const RawSilhouette& s, const NormalizationParams& params,
                               std::string source_id) {
  return normalize(s, BoundingBox{0, 0, s.width(), s.height()}, params, std::move(source_id));
}

namespace {

// Clockwise on screen, starting west.
constexpr std::array<Pixel, 8> kRing = {{{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                         {1, 0},  {1, 1},   {0, 1},  {-1, 1}}};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kRing[i].x == dx && kRing[i].y == dy) return i;
  }
  return -1;
}

}  // namespace

Contour trace_contour(const Mask& mask, const Centroid& c) {
  const Mask comp = largest_component(mask);
  const auto bounds = foreground_bounds(comp);
  if (!bounds) throw Error(ErrorCode::EmptySilhouette, "contour of an empty silhouette");

  const int rows = static_cast<int>(comp.rows());
  const int cols = static_cast<int>(comp.cols());
  auto is_fg = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < cols && y < rows && comp(y, x) != 0;
  };

  Pixel start{bounds->x, bounds->y};
  while (!is_fg(start.x, start.y)) ++start.x;

  // Moore-neighbour tracing; stops when the first move out of `start`
  // repeats, which closes the loop for thin structures too.
  Contour cw;
  Pixel current = start;
  int backtrack = 0;  // west of the first raster pixel is background
  std::optional<Pixel> first_move;
  const std::size_t max_steps = 4 * static_cast<std::size_t>(popcount(comp)) + 8;
  for (std::size_t step = 0; step < max_steps; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int dir = (backtrack + k) % 8;
      if (is_fg(current.x + kRing[dir].x, current.y + kRing[dir].y)) {
        found = dir;
        break;
      }
    }
    if (found < 0) {  // isolated pixel
      cw.push_back(current);
      break;
    }
    const Pixel next{current.x + kRing[found].x, current.y + kRing[found].y};
    if (current == start) {
      if (!first_move) {
        first_move = next;
      } else if (next == *first_move) {
        break;
      }
    }
    cw.push_back(current);
    const int prev = (found + 7) % 8;
    const Pixel prev_bg{current.x + kRing[prev].x, current.y + kRing[prev].y};
    backtrack = ring_index(prev_bg.x - next.x, prev_bg.y - next.y);
    current = next;
  }

  // Reverse into counterclockwise order keeping the first point.
  Contour ccw;
  ccw.reserve(cw.size());
  ccw.push_back(cw.front());
  for (auto it = cw.rbegin(); it != cw.rend() - 1; ++it) ccw.push_back(*it);

  std::size_t best = 0;
  double best_gap = 1e300;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    double deg = std::atan2(-(ccw[i].y - c.y), ccw[i].x - c.x) * 180.0 / std::numbers::pi;
    if (deg < 0) deg += 360.0;
    const double gap = std::min(deg, 360.0 - deg);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  std::rotate(ccw.begin(), ccw.begin() + static_cast<std::ptrdiff_t>(best), ccw.end());
  return ccw;
}

double iou(const Mask& a, const Mask& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "iou of differently sized masks");
  }
  const auto fa = (a != 0);
  const auto fb = (b != 0);
  const auto inter = (fa && fb).count();
  const auto uni = (fa || fb).count();
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace gaitgender
