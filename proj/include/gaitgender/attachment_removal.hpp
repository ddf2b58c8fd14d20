#pragma once

#include <cstdint>
#include <vector>

#include "gaitgender/distance_signal.hpp"
#include "gaitgender/silhouette.hpp"

namespace gaitgender {

/// Row bands of a silhouette of height h: head [0, 0.17h), torso and thigh
/// [0.17h, 0.715h), calf [0.715h, h). Boundaries are floored.
struct BodyPartBands {
  int head_end = 0;
  int torso_end = 0;
  int height = 0;

  static BodyPartBands for_height(int h) { return {(17 * h) / 100, (715 * h) / 1000, h}; }

  bool in_torso(int row) const { return row >= head_end && row < torso_end; }
};

/// Inclusive counterclockwise range of bins; `first > last` means it wraps.
struct BinSpan {
  int first = 0;
  int last = 0;
  friend bool operator==(const BinSpan&, const BinSpan&) = default;
};

struct CorrectionReport {
  DistanceSignal corrected_signal;
  /// One span per attachment run, from its first violating bin to C.
  std::vector<BinSpan> violating_runs;
  std::int64_t removed_pixel_count = 0;
};

/// Flags the bins whose outermost boundary point lies in the torso band.
std::vector<bool> torso_angular_range(const NormalizedSilhouette& s, const Centroid& c,
                                      int bins = kDefaultBins);
std::vector<bool> torso_angular_range(const PolarProfile& profile, const BodyPartBands& bands);

/// Replaces torso bins above the upper envelope by the lower envelope,
/// extends each run to the closest approach C of the signal to the lower
/// envelope, smooths the touched torso segment with a 5-tap box filter and
/// finally lifts every bin below the lower envelope onto it.
CorrectionReport correct_signal(const DistanceSignal& ds, const Envelope& envelope,
                                const std::vector<bool>& torso_bins);
CorrectionReport correct_signal(const DistanceSignal& ds, int view, const DSModel& model,
                                const std::vector<bool>& torso_bins);

/// Deletes foreground pixels on the bins of `report.violating_runs` that lie
/// farther from `c` than the corrected distance. Never adds pixels.
NormalizedSilhouette reconstruct(const NormalizedSilhouette& s, const CorrectionReport& report,
                                 const Centroid& c);

struct AttachmentRemoval {
  NormalizedSilhouette silhouette;
  CorrectionReport report;
};

inline constexpr int kDefaultReferenceRefinements = 3;

/// The envelopes describe distances from the centroid of an attachment-free
/// body, which an attachment drags towards itself. Starting at the frame
/// centroid, torso pixels beyond the upper envelope are clipped and the
/// centroid of what remains is taken as the next estimate.
Centroid attachment_free_reference(const NormalizedSilhouette& s, int view, const DSModel& model,
                                   int refinements = kDefaultReferenceRefinements);

/// Full per-frame removal for a known view: distance signal around
/// attachment_free_reference(), correction and reconstruction. The output
/// keeps the input's frame; no re-centering.
AttachmentRemoval remove_attachment(const NormalizedSilhouette& s, int view, const DSModel& model,
                                    int refinements = kDefaultReferenceRefinements);

}  // namespace gaitgender
