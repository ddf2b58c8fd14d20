#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitgender/attachment_removal.hpp"
#include "gaitgender/distance_signal.hpp"
#include "gaitgender/gait_features.hpp"
#include "gaitgender/linear_svm.hpp"
#include "gaitgender/silhouette.hpp"
#include "gaitgender/viewpoint_model.hpp"

namespace gaitgender {

enum class Condition { Normal, Bag, Coat };

std::string_view to_string(Condition c);
/// Accepts "normal"/"nm", "bag"/"bg", "coat"/"cl".
Condition parse_condition(std::string_view text);

/// Random access to the frames of one sequence; decoding may be deferred.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t size() const = 0;
  virtual RawSilhouette load(std::size_t index) const = 0;
  virtual std::string frame_id(std::size_t index) const = 0;
};

class InMemoryFrames final : public FrameSource {
 public:
  InMemoryFrames(std::vector<RawSilhouette> frames, std::string prefix = {})
      : frames_(std::move(frames)), prefix_(std::move(prefix)) {}
  std::size_t size() const override { return frames_.size(); }
  RawSilhouette load(std::size_t index) const override { return frames_.at(index); }
  std::string frame_id(std::size_t index) const override;

 private:
  std::vector<RawSilhouette> frames_;
  std::string prefix_;
};

struct Sequence {
  std::string subject;
  int gender = kMale;
  Condition condition = Condition::Normal;
  int index = 1;
  int view = 0;
  std::shared_ptr<const FrameSource> frames;
};

using Dataset = std::vector<Sequence>;

struct PipelineParams {
  NormalizationParams norm;
  int bins = kDefaultBins;
  int smoothing_window = kDefaultSmoothingWindow;
  GaitWindowParams window;
  std::vector<int> views = default_views();
  SvmOptions svm;
  /// Step between consecutive training windows of one sequence.
  int train_stride = 1;
  int reference_refinements = kDefaultReferenceRefinements;
  bool attachment_removal = true;
  /// Re-center corrected frames on their own centroid before averaging.
  bool renormalize_after_removal = true;

  int T() const { return window.window(); }
};

/// Outputs of training: viewpoint templates, distance envelopes and one
/// classifier per view, all sharing `params.views` and `params.norm`.
struct TrainedModel {
  PipelineParams params;
  VPModel<double> vp;
  DSModel ds;
  ClassifierBank<double> bank;
  std::string dataset_fingerprint;
};

/// One decoded and normalized frame plus its smoothed distance signal.
/// Frames whose normalization failed are kept as gaps.
struct PreparedFrame {
  NormalizedSilhouette silhouette;
  DistanceSignal smoothed_ds;
};

struct PreparedSequence {
  std::string subject;
  int gender = kMale;
  Condition condition = Condition::Normal;
  int index = 1;
  int view = 0;
  std::vector<std::optional<PreparedFrame>> frames;
};

using PreparedDataset = std::vector<PreparedSequence>;

PreparedSequence prepare(const Sequence& sequence, const PipelineParams& params);
PreparedDataset prepare(const Dataset& dataset, const PipelineParams& params);

/// Flattened AGI windows of a sequence, `stride` frames apart; one window
/// over everything when the sequence is shorter than T. Gaps are skipped.
std::vector<AverageGaitImage<double>> training_windows(const PreparedSequence& sequence, int T,
                                                       int stride);

/// Builds the VP model, DS model and classifier bank from the normal-walking
/// sequences. Other conditions are ignored.
TrainedModel train_pipeline(std::span<const PreparedSequence* const> sequences,
                            const PipelineParams& params);
TrainedModel train_pipeline(const PreparedDataset& dataset, const PipelineParams& params);
TrainedModel train_pipeline(const Dataset& dataset, const PipelineParams& params);

/// Row-major flattening of an AGI, the classifier's feature vector.
Vector<double> agi_features(const AverageGaitImage<double>& agi);

/// Finds the person in a frame. The pipeline consumes pre-segmented
/// silhouettes, so the default simply takes the whole raster.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::optional<BoundingBox> detect(const RawSilhouette& frame) const = 0;
};

class PassThroughDetector final : public Detector {
 public:
  std::optional<BoundingBox> detect(const RawSilhouette& frame) const override;
};

/// Wall-clock milliseconds spent in each stage of one step_stream call.
struct StageTimings {
  double normalize_ms = 0.0;
  double window_ms = 0.0;
  double view_ms = 0.0;
  double removal_ms = 0.0;
  double predict_ms = 0.0;

  double total_ms() const { return normalize_ms + window_ms + view_ms + removal_ms + predict_ms; }
};

struct StreamDecision {
  int view = 0;
  int label = kMale;
  double decision = 0.0;
  /// Consecutive detections when the decision was made.
  int counter = 0;
  std::int64_t removed_pixels = 0;
};

/// Per-person streaming state. Holds at most T frames; each frame keeps its
/// corrected versions per view so a frame is cleaned once per view.
class StreamState {
 public:
  StreamState() = default;

  int counter() const { return counter_; }
  std::size_t buffered() const { return buffer_.size(); }
  const std::optional<StreamDecision>& last_decision() const { return last_; }
  void reset();

 private:
  struct Buffered {
    NormalizedSilhouette original;
    std::map<int, NormalizedSilhouette> corrected;
    std::map<int, std::int64_t> removed;
  };

  std::deque<Buffered> buffer_;
  WindowAccumulator window_;
  int counter_ = 0;
  std::optional<StreamDecision> last_;

  friend std::optional<StreamDecision> step_stream_normalized(
      StreamState&, const std::optional<NormalizedSilhouette>&, const TrainedModel&, StageTimings*);
};

/// A detected frame: the raster and where the person is.
struct Detection {
  RawSilhouette frame;
  BoundingBox box;
};

/// One step of the streaming classifier. A missing detection or a frame that
/// fails to normalize resets the counter and empties the window. Once T
/// consecutive frames are buffered, every step estimates the view, cleans the
/// buffered frames for that view, classifies their AGI and drops the oldest
/// frame.
std::optional<StreamDecision> step_stream(StreamState& state, const std::optional<Detection>& frame,
                                          const TrainedModel& model, StageTimings* timings = nullptr);
std::optional<StreamDecision> step_stream_normalized(StreamState& state,
                                                     const std::optional<NormalizedSilhouette>& frame,
                                                     const TrainedModel& model,
                                                     StageTimings* timings = nullptr);

/// The window AGI after cleaning every frame for `view`.
AverageGaitImage<double> corrected_agi(std::span<const NormalizedSilhouette> frames, int view,
                                       const TrainedModel& model);

}  // namespace gaitgender
