#include "gaitgender/attachment_removal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gaitgender/error.hpp"

namespace gaitgender {

namespace {

constexpr int kRunSmoothingTaps = 5;
constexpr double kReferenceTolerance = 0.25;

// Maximal circular runs of flagged bins, each as a CCW list of bin indices.
std::vector<std::vector<int>> flagged_segments(const std::vector<bool>& flags) {
  const int n = static_cast<int>(flags.size());
  std::vector<std::vector<int>> segments;
  if (n == 0) return segments;
  if (std::all_of(flags.begin(), flags.end(), [](bool f) { return f; })) {
    std::vector<int> all(n);
    for (int k = 0; k < n; ++k) all[k] = k;
    segments.push_back(std::move(all));
    return segments;
  }
  // Start scanning just after an unflagged bin so no segment is split.
  int origin = 0;
  while (flags[origin]) ++origin;
  std::vector<int> current;
  for (int step = 1; step <= n; ++step) {
    const int k = (origin + step) % n;
    if (flags[k]) {
      current.push_back(k);
    } else if (!current.empty()) {
      segments.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) segments.push_back(std::move(current));
  return segments;
}

// Box filter over one segment; windows shrink at the segment ends.
void smooth_segment(Eigen::ArrayXd& values, const std::vector<int>& segment) {
  const int len = static_cast<int>(segment.size());
  const int half = kRunSmoothingTaps / 2;
  std::vector<double> out(len);
  for (int q = 0; q < len; ++q) {
    const int lo = std::max(0, q - half);
    const int hi = std::min(len - 1, q + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += values[segment[j]];
    out[q] = sum / (hi - lo + 1);
  }
  for (int q = 0; q < len; ++q) values[segment[q]] = out[q];
}

}  // namespace

std::vector<bool> torso_angular_range(const PolarProfile& profile, const BodyPartBands& bands) {
  const auto& signal = profile.signal;
  const int n = signal.size();
  std::vector<bool> torso(n, false);
  if (bands.torso_end <= bands.head_end) return torso;
  for (int k = 0; k < n; ++k) {
    int row = 0;
    if (profile.outermost[k]) {
      row = profile.outermost[k]->y;
    } else {
      const double theta = k * signal.bin_width_deg() * std::numbers::pi / 180.0;
      row = round_half_up(signal.origin.y - signal.bins[k] * std::sin(theta));
    }
    torso[k] = bands.in_torso(row);
  }
  return torso;
}

std::vector<bool> torso_angular_range(const NormalizedSilhouette& s, const Centroid& c, int bins) {
  return torso_angular_range(polar_profile(s.mask(), c, bins), BodyPartBands::for_height(s.height()));
}

CorrectionReport correct_signal(const DistanceSignal& ds, const Envelope& envelope,
                                const std::vector<bool>& torso_bins) {
  const int n = ds.size();
  if (envelope.upper.size() != n || envelope.lower.size() != n ||
      static_cast<int>(torso_bins.size()) != n) {
    throw Error(ErrorCode::ShapeMismatch, "signal, envelope and torso mask differ in length");
  }
  const auto& upper = envelope.upper;
  const auto& lower = envelope.lower;

  CorrectionReport report;
  report.corrected_signal = ds;
  Eigen::ArrayXd& sig = report.corrected_signal.bins;

  for (const auto& segment : flagged_segments(torso_bins)) {
    const int len = static_cast<int>(segment.size());
    bool touched = false;
    int q = 0;
    while (q < len) {
      if (ds.bins[segment[q]] <= upper[segment[q]]) {
        ++q;
        continue;
      }
      const int run_first = q;
      while (q < len && ds.bins[segment[q]] > upper[segment[q]]) {
        sig[segment[q]] = lower[segment[q]];
        ++q;
      }
      // A is the run's last bin, B the segment's last bin. C is where the
      // original signal comes closest to the lower envelope past A.
      const int a = q - 1;
      int c = a;
      double best = std::numeric_limits<double>::infinity();
      for (int j = a + 1; j < len; ++j) {
        const double gap = std::abs(ds.bins[segment[j]] - lower[segment[j]]);
        if (gap < best) {
          best = gap;
          c = j;
        }
      }
      for (int j = a + 1; j <= c; ++j) sig[segment[j]] = lower[segment[j]];
      report.violating_runs.push_back({segment[run_first], segment[c]});
      touched = true;
      q = std::max(q, c + 1);
    }
    if (touched) smooth_segment(sig, segment);
  }

  // Dips below the lower envelope are segmentation noise.
  sig = sig.max(lower);
  return report;
}

CorrectionReport correct_signal(const DistanceSignal& ds, int view, const DSModel& model,
                                const std::vector<bool>& torso_bins) {
  if (ds.size() != model.bins) {
    throw Error(ErrorCode::ShapeMismatch, "signal has " + std::to_string(ds.size()) +
                                              " bins, model has " + std::to_string(model.bins));
  }
  return correct_signal(ds, model.at(view), torso_bins);
}

NormalizedSilhouette reconstruct(const NormalizedSilhouette& s, const CorrectionReport& report,
                                 const Centroid& c) {
  if (report.violating_runs.empty()) return s;
  const auto& signal = report.corrected_signal;
  const int n = signal.size();
  std::vector<bool> corrected(n, false);
  for (const BinSpan& span : report.violating_runs) {
    for (int k = span.first;; k = (k + 1) % n) {
      corrected[k] = true;
      if (k == span.last) break;
    }
  }

  Mask out = s.mask();
  for (int y = 0; y < out.rows(); ++y) {
    for (int x = 0; x < out.cols(); ++x) {
      if (out(y, x) == 0) continue;
      const double dx = x - c.x;
      const double dy = y - c.y;
      const int k = angle_bin(dx, dy, n);
      if (corrected[k] && std::hypot(dx, dy) > signal.bins[k]) out(y, x) = 0;
    }
  }
  return NormalizedSilhouette(std::move(out), s.source_id());
}

namespace {

// Removes torso-band pixels lying beyond the upper envelope as seen from `c`.
Mask clip_to_upper(const Mask& mask, const std::vector<bool>& torso, const DistanceSignal& ds,
                   const Envelope& envelope, const Centroid& c) {
  const int n = ds.size();
  Mask out = mask;
  for (int y = 0; y < out.rows(); ++y) {
    for (int x = 0; x < out.cols(); ++x) {
      if (out(y, x) == 0) continue;
      const double dx = x - c.x;
      const double dy = y - c.y;
      const int k = angle_bin(dx, dy, n);
      if (torso[k] && ds.bins[k] > envelope.upper[k] && std::hypot(dx, dy) > envelope.upper[k]) {
        out(y, x) = 0;
      }
    }
  }
  return out;
}

}  // namespace

Centroid attachment_free_reference(const NormalizedSilhouette& s, int view, const DSModel& model,
                                   int refinements) {
  const Envelope& envelope = model.at(view);
  const BodyPartBands bands = BodyPartBands::for_height(s.height());
  Centroid c = centroid(s.mask());
  for (int i = 0; i < refinements; ++i) {
    const PolarProfile profile = polar_profile(s.mask(), c, model.bins);
    const auto torso = torso_angular_range(profile, bands);
    const DistanceSignal ds = smooth(profile.signal, model.smoothing_window);
    const Mask clipped = clip_to_upper(s.mask(), torso, ds, envelope, c);
    if (popcount(clipped) == 0) break;
    const Centroid next = centroid(clipped);
    const bool settled = std::hypot(next.x - c.x, next.y - c.y) < kReferenceTolerance;
    c = next;
    if (settled) break;
  }
  return c;
}

AttachmentRemoval remove_attachment(const NormalizedSilhouette& s, int view, const DSModel& model,
                                    int refinements) {
  const Centroid c = attachment_free_reference(s, view, model, refinements);
  const PolarProfile profile = polar_profile(s.mask(), c, model.bins);
  const auto torso = torso_angular_range(profile, BodyPartBands::for_height(s.height()));
  const DistanceSignal ds = smooth(profile.signal, model.smoothing_window);

  AttachmentRemoval result;
  result.report = correct_signal(ds, view, model, torso);
  result.silhouette = reconstruct(s, result.report, c);
  result.report.removed_pixel_count = popcount(s.mask()) - popcount(result.silhouette.mask());
  return result;
}

}  // namespace gaitgender
