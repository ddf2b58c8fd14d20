#include "gaitgender/distance_signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gaitgender/error.hpp"

namespace gaitgender {

double polar_angle_deg(double dx, double dy) {
  double deg = std::atan2(-dy, dx) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

int angle_bin(double dx, double dy, int bins) {
  const double width = 360.0 / bins;
  const int k = static_cast<int>(std::floor(polar_angle_deg(dx, dy) / width + 0.5));
  return k % bins;
}

PolarProfile polar_profile(const Mask& mask, const Centroid& origin, int bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");
  const Contour contour = trace_contour(mask, origin);

  PolarProfile profile;
  profile.signal.origin = origin;
  profile.signal.bins = Eigen::ArrayXd::Constant(bins, -1.0);
  profile.outermost.assign(bins, std::nullopt);
  for (const Pixel& p : contour) {
    const double dx = p.x - origin.x;
    const double dy = p.y - origin.y;
    const double d = std::hypot(dx, dy);
    const int k = angle_bin(dx, dy, bins);
    if (d > profile.signal.bins[k]) {
      profile.signal.bins[k] = d;
      profile.outermost[k] = p;
    }
  }

  // Circular linear interpolation across empty bins.
  std::vector<int> filled;
  for (int k = 0; k < bins; ++k) {
    if (profile.outermost[k]) filled.push_back(k);
  }
  auto& v = profile.signal.bins;
  for (std::size_t i = 0; i < filled.size(); ++i) {
    const int a = filled[i];
    const int b = filled[(i + 1) % filled.size()];
    const int gap = ((b - a) % bins + bins) % bins;
    const int span = gap == 0 ? bins : gap;
    for (int step = 1; step < span; ++step) {
      const double t = static_cast<double>(step) / span;
      v[(a + step) % bins] = (1.0 - t) * v[a] + t * v[b];
    }
  }
  return profile;
}

DistanceSignal build_ds(const Mask& mask, const Centroid& origin, int bins) {
  return polar_profile(mask, origin, bins).signal;
}

DistanceSignal build_ds(const NormalizedSilhouette& s, int bins) {
  return build_ds(s.mask(), centroid(s.mask()), bins);
}

DistanceSignal smooth(const DistanceSignal& signal, int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::EvenWindow, "smoothing window must be odd and positive, got " +
                                           std::to_string(window));
  }
  const int n = signal.size();
  const int half = window / 2;
  DistanceSignal out = signal;
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    for (int j = -half; j <= half; ++j) sum += signal.bins[((k + j) % n + n) % n];
    out.bins[k] = sum / window;
  }
  return out;
}

const Envelope& DSModel::at(int view) const {
  const auto it = envelopes.find(view);
  if (it == envelopes.end()) {
    throw Error(ErrorCode::UnknownView, "no distance envelope for view " + std::to_string(view));
  }
  return it->second;
}

void DSModelBuilder::add(int view, const DistanceSignal& signal) {
  if (signal.size() != bins_) {
    throw Error(ErrorCode::ShapeMismatch, "signal has " + std::to_string(signal.size()) +
                                              " bins, model expects " + std::to_string(bins_));
  }
  auto [it, inserted] = envelopes_.try_emplace(view, Envelope{signal.bins, signal.bins});
  if (!inserted) {
    it->second.upper = it->second.upper.max(signal.bins);
    it->second.lower = it->second.lower.min(signal.bins);
  }
}

DSModel DSModelBuilder::build(std::span<const int> views) const {
  DSModel model;
  model.bins = bins_;
  model.smoothing_window = smoothing_window_;
  for (int view : views) {
    const auto it = envelopes_.find(view);
    if (it == envelopes_.end()) {
      throw Error(ErrorCode::MissingView, "no distance signals for view " + std::to_string(view));
    }
    model.envelopes[view] = it->second;
  }
  return model;
}

DSModel build_ds_model(const std::map<int, std::vector<DistanceSignal>>& per_view_signals,
                       std::span<const int> views, int smoothing_window) {
  int bins = kDefaultBins;
  for (const auto& [view, signals] : per_view_signals) {
    if (!signals.empty()) {
      bins = signals.front().size();
      break;
    }
  }
  DSModelBuilder builder(bins, smoothing_window);
  for (const auto& [view, signals] : per_view_signals) {
    for (const auto& s : signals) builder.add(view, s);
  }
  return builder.build(views);
}

}  // namespace gaitgender
