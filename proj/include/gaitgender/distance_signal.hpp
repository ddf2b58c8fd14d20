#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gaitgender/silhouette.hpp"

namespace gaitgender {

inline constexpr int kDefaultBins = 360;
inline constexpr int kDefaultSmoothingWindow = 3;

/// Polar angle of (dx, dy) in degrees within [0, 360), counterclockwise on
/// screen from the +x ray. Image rows grow downwards, hence the flipped dy.
double polar_angle_deg(double dx, double dy);

/// Bin k covers [k*w - w/2, k*w + w/2) with w = 360/bins.
int angle_bin(double dx, double dy, int bins);

/// Boundary distance per angular bin around `origin`.
struct DistanceSignal {
  Eigen::ArrayXd bins;
  Centroid origin;

  int size() const { return static_cast<int>(bins.size()); }
  double bin_width_deg() const { return 360.0 / static_cast<double>(bins.size()); }
};

/// A distance signal together with the contour point that produced each bin
/// (nullopt for bins filled by interpolation).
struct PolarProfile {
  DistanceSignal signal;
  std::vector<std::optional<Pixel>> outermost;
};

/// Per-bin maximum contour distance around `origin`; empty bins are filled
/// by circular linear interpolation.
PolarProfile polar_profile(const Mask& mask, const Centroid& origin, int bins = kDefaultBins);

DistanceSignal build_ds(const Mask& mask, const Centroid& origin, int bins = kDefaultBins);
DistanceSignal build_ds(const NormalizedSilhouette& s, int bins = kDefaultBins);

/// Circular moving average; `window` must be odd.
DistanceSignal smooth(const DistanceSignal& signal, int window);

/// MaDS (upper) and MiDS (lower) curves for one view.
struct Envelope {
  Eigen::ArrayXd upper;
  Eigen::ArrayXd lower;
};

struct DSModel {
  std::map<int, Envelope> envelopes;
  int bins = kDefaultBins;
  int smoothing_window = kDefaultSmoothingWindow;

  const Envelope& at(int view) const;
};

/// Pools every training signal of a view into pointwise max/min curves.
class DSModelBuilder {
 public:
  explicit DSModelBuilder(int bins = kDefaultBins, int smoothing_window = kDefaultSmoothingWindow)
      : bins_(bins), smoothing_window_(smoothing_window) {}

  /// `signal` must already be smoothed.
  void add(int view, const DistanceSignal& signal);
  DSModel build(std::span<const int> views) const;

 private:
  int bins_;
  int smoothing_window_;
  std::map<int, Envelope> envelopes_;
};

/// Signals must already be smoothed with `smoothing_window`.
DSModel build_ds_model(const std::map<int, std::vector<DistanceSignal>>& per_view_signals,
                       std::span<const int> views, int smoothing_window = kDefaultSmoothingWindow);

}  // namespace gaitgender
