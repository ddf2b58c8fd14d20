#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "gaitgender/error.hpp"
#include "gaitgender/silhouette.hpp"

namespace gaitgender {

template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Window length T = round(cycle_time * frame_rate), at least one frame.
struct GaitWindowParams {
  double frame_rate = 25.0;
  double cycle_time = 0.6;

  int window() const { return std::max(1, static_cast<int>(std::lround(cycle_time * frame_rate))); }
};

/// First row of the lower band: floor(0.715 * height), in exact integer math.
inline int lower_band_start(int height) { return (715 * height) / 1000; }

template <typename Scalar = double>
struct AverageGaitImage {
  Image<Scalar> pixels;
  int frame_count = 0;
  std::optional<int> view_hint;
};

template <typename Scalar = double>
struct LowerAGI {
  Image<Scalar> pixels;
  int first_row = 0;
};

/// Pixelwise mean of a window of equally sized silhouettes.
template <typename Scalar = double>
AverageGaitImage<Scalar> compute_agi(std::span<const NormalizedSilhouette> frames) {
  if (frames.empty()) throw Error(ErrorCode::EmptyWindow, "cannot average an empty window");
  const auto rows = frames.front().mask().rows();
  const auto cols = frames.front().mask().cols();
  Image<std::int32_t> sum = Image<std::int32_t>::Zero(rows, cols);
  for (const auto& f : frames) {
    if (f.mask().rows() != rows || f.mask().cols() != cols) {
      throw Error(ErrorCode::ShapeMismatch, "window frames differ in size");
    }
    sum += f.mask().template cast<std::int32_t>();
  }
  AverageGaitImage<Scalar> agi;
  agi.pixels = sum.template cast<Scalar>() / static_cast<Scalar>(frames.size());
  agi.frame_count = static_cast<int>(frames.size());
  return agi;
}

/// Bottom rows [floor(0.715 h), h) of any image-like array, as an Eigen block.
template <typename Derived>
auto lower_rows(const Eigen::DenseBase<Derived>& image) {
  const auto first = lower_band_start(static_cast<int>(image.rows()));
  return image.bottomRows(image.rows() - first);
}

template <typename Scalar>
LowerAGI<Scalar> extract_lower(const AverageGaitImage<Scalar>& agi) {
  LowerAGI<Scalar> lower;
  lower.first_row = lower_band_start(static_cast<int>(agi.pixels.rows()));
  lower.pixels = lower_rows(agi.pixels);
  return lower;
}

/// Running per-pixel foreground counts over a sliding window. Adding and
/// removing whole frames keeps the mean exact.
class WindowAccumulator {
 public:
  WindowAccumulator() = default;
  WindowAccumulator(int rows, int cols) : sum_(Image<std::int32_t>::Zero(rows, cols)) {}

  void add(const Mask& m) {
    check(m);
    sum_ += m.cast<std::int32_t>();
    ++count_;
  }
  void remove(const Mask& m) {
    check(m);
    if (count_ == 0) throw Error(ErrorCode::EmptyWindow, "remove from an empty window");
    sum_ -= m.cast<std::int32_t>();
    --count_;
  }
  void clear() {
    sum_.setZero();
    count_ = 0;
  }
  int count() const { return count_; }

  template <typename Scalar = double>
  AverageGaitImage<Scalar> agi() const {
    if (count_ == 0) throw Error(ErrorCode::EmptyWindow, "window is empty");
    return {sum_.cast<Scalar>() / static_cast<Scalar>(count_), count_, std::nullopt};
  }

 private:
  void check(const Mask& m) const {
    if (m.rows() != sum_.rows() || m.cols() != sum_.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "frame size does not match the window");
    }
  }

  Image<std::int32_t> sum_;
  int count_ = 0;
};

}  // namespace gaitgender
