#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gaitgender/error.hpp"

namespace gaitgender {

/// Row-major binary raster; 1 = foreground. Row index is y, column index is x.
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kDefaultNormHeight = 144;
inline constexpr int kDefaultNormWidth = 144;

/// Rounds half-up (towards +inf at .5), the convention for every pixel snap.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct BoundingBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A silhouette of arbitrary size as produced by segmentation.
class RawSilhouette {
 public:
  RawSilhouette() = default;
  /// Any nonzero entry becomes foreground.
  explicit RawSilhouette(Mask mask);
  RawSilhouette(int width, int height, std::span<const std::uint8_t> row_major);

  int width() const { return static_cast<int>(mask_.cols()); }
  int height() const { return static_cast<int>(mask_.rows()); }
  const Mask& mask() const { return mask_; }

 private:
  Mask mask_;
};

struct NormalizationParams {
  int height = kDefaultNormHeight;
  int width = kDefaultNormWidth;
};

/// Fixed-size silhouette: foreground spans the full height and is centered
/// horizontally on its centroid.
class NormalizedSilhouette {
 public:
  NormalizedSilhouette() = default;
  explicit NormalizedSilhouette(Mask mask, std::string source_id = {})
      : mask_(std::move(mask)), source_id_(std::move(source_id)) {}

  int width() const { return static_cast<int>(mask_.cols()); }
  int height() const { return static_cast<int>(mask_.rows()); }
  const Mask& mask() const { return mask_; }
  const std::string& source_id() const { return source_id_; }

 private:
  Mask mask_;
  std::string source_id_;
};

/// Ordered boundary of the largest component, counterclockwise as seen on
/// screen (y grows downwards).
using Contour = std::vector<Pixel>;

/// Sum over foreground pixels of x^i * y^j.
template <typename Derived>
double raw_moment(const Eigen::ArrayBase<Derived>& mask, int i, int j) {
  double sum = 0.0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    const double yj = std::pow(static_cast<double>(y), j);
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x) != 0) sum += std::pow(static_cast<double>(x), i) * yj;
    }
  }
  return sum;
}

std::int64_t popcount(const Mask& mask);

/// (M10/M00, M01/M00). Throws EmptySilhouette when M00 = 0.
Centroid centroid(const Mask& mask);
inline Centroid centroid(const RawSilhouette& s) { return centroid(s.mask()); }
inline Centroid centroid(const NormalizedSilhouette& s) { return centroid(s.mask()); }

/// Tight bounds of the foreground, or nullopt if there is none.
std::optional<BoundingBox> foreground_bounds(const Mask& mask);

/// Keeps only the largest 8-connected component. Ties go to the component
/// found first in raster order.
Mask largest_component(const Mask& mask);

/// Nearest-neighbour resampling sampled at pixel centers.
Mask resize_nearest(const Mask& src, int rows, int cols);

/// Crop to `box`, keep the largest component, scale the tight foreground to
/// `params.height` rows preserving aspect ratio, then pad or crop columns so
/// the centroid lands on column width/2.
NormalizedSilhouette normalize(const RawSilhouette& s, const BoundingBox& box,
                               const NormalizationParams& params = {},
                               std::string source_id = {});

/// normalize() over the full raster.
NormalizedSilhouette normalize(const RawSilhouette& s, const NormalizationParams& params = {},
                               std::string source_id = {});

/// Outer boundary (Moore-neighbour trace) of the largest 8-connected
/// component, rotated to start at the point angularly closest to the +x ray
/// from `c`.
Contour trace_contour(const Mask& mask, const Centroid& c);

/// Intersection over union of two equally sized masks. Two empty masks give 1.
double iou(const Mask& a, const Mask& b);

}  // namespace gaitgender
