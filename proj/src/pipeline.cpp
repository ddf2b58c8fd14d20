#include "gaitgender/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include <zlib.h>

#include "gaitgender/error.hpp"

namespace gaitgender {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Normal: return "normal";
    case Condition::Bag: return "bag";
    case Condition::Coat: return "coat";
  }
  return "unknown";
}

Condition parse_condition(std::string_view text) {
  if (text == "normal" || text == "nm") return Condition::Normal;
  if (text == "bag" || text == "bg") return Condition::Bag;
  if (text == "coat" || text == "cl") return Condition::Coat;
  throw Error(ErrorCode::InvalidArgument, "unknown condition '" + std::string(text) + "'");
}

std::string InMemoryFrames::frame_id(std::size_t index) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", index + 1);
  return prefix_.empty() ? std::string(buf) : prefix_ + "/" + buf;
}

PreparedSequence prepare(const Sequence& sequence, const PipelineParams& params) {
  PreparedSequence out{sequence.subject, sequence.gender, sequence.condition, sequence.index,
                       sequence.view, {}};
  if (!sequence.frames) return out;
  const PassThroughDetector detector;
  out.frames.reserve(sequence.frames->size());
  for (std::size_t i = 0; i < sequence.frames->size(); ++i) {
    const RawSilhouette raw = sequence.frames->load(i);
    const auto box = detector.detect(raw);
    if (!box) {
      out.frames.emplace_back();
      continue;
    }
    try {
      NormalizedSilhouette s = normalize(raw, *box, params.norm, sequence.frames->frame_id(i));
      DistanceSignal ds = smooth(build_ds(s, params.bins), params.smoothing_window);
      out.frames.push_back(PreparedFrame{std::move(s), std::move(ds)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptySilhouette && e.code() != ErrorCode::DegenerateBox) throw;
      out.frames.emplace_back();
    }
  }
  return out;
}

PreparedDataset prepare(const Dataset& dataset, const PipelineParams& params) {
  PreparedDataset out;
  out.reserve(dataset.size());
  for (const Sequence& s : dataset) out.push_back(prepare(s, params));
  return out;
}

std::vector<AverageGaitImage<double>> training_windows(const PreparedSequence& sequence, int T,
                                                       int stride) {
  if (T < 1 || stride < 1) throw Error(ErrorCode::InvalidArgument, "window and stride must be >= 1");
  std::vector<const Mask*> masks;
  for (const auto& f : sequence.frames) {
    if (f) masks.push_back(&f->silhouette.mask());
  }
  std::vector<AverageGaitImage<double>> out;
  if (masks.empty()) return out;
  const int n = static_cast<int>(masks.size());
  WindowAccumulator acc(static_cast<int>(masks.front()->rows()), static_cast<int>(masks.front()->cols()));
  if (n < T) {
    for (const Mask* m : masks) acc.add(*m);
    out.push_back(acc.agi<double>());
    return out;
  }
  for (int i = 0; i < T; ++i) acc.add(*masks[i]);
  for (int start = 0;; ++start) {
    if (start % stride == 0) out.push_back(acc.agi<double>());
    if (start + T >= n) break;
    acc.remove(*masks[start]);
    acc.add(*masks[start + T]);
  }
  return out;
}

Vector<double> agi_features(const AverageGaitImage<double>& agi) {
  return Eigen::Map<const Vector<double>>(agi.pixels.data(), agi.pixels.size());
}

namespace {

std::string fingerprint_hex(uLong crc, std::size_t frames) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08lx-%zu", static_cast<unsigned long>(crc), frames);
  return buf;
}

uLong crc_of(uLong crc, const void* data, std::size_t size) {
  return crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(size));
}

}  // namespace

TrainedModel train_pipeline(std::span<const PreparedSequence* const> sequences,
                            const PipelineParams& params) {
  VPModelBuilder vp;
  DSModelBuilder ds(params.bins, params.smoothing_window);
  std::map<int, std::vector<Vector<double>>> rows;
  std::map<int, std::vector<int>> labels;
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t frames = 0;

  const int T = params.T();
  for (const PreparedSequence* seq : sequences) {
    if (seq->condition != Condition::Normal) continue;
    if (std::find(params.views.begin(), params.views.end(), seq->view) == params.views.end()) continue;
    crc = crc_of(crc, seq->subject.data(), seq->subject.size());
    crc = crc_of(crc, &seq->gender, sizeof seq->gender);
    crc = crc_of(crc, &seq->view, sizeof seq->view);
    for (const auto& f : seq->frames) {
      if (!f) continue;
      vp.add(seq->view, f->silhouette.mask());
      ds.add(seq->view, f->smoothed_ds);
      crc = crc_of(crc, f->silhouette.mask().data(), f->silhouette.mask().size());
      ++frames;
    }
    for (const auto& agi : training_windows(*seq, T, params.train_stride)) {
      rows[seq->view].push_back(agi_features(agi));
      labels[seq->view].push_back(seq->gender);
    }
  }

  TrainedModel model;
  model.params = params;
  model.vp = vp.build<double>(params.views);
  model.ds = ds.build(params.views);

  std::map<int, TrainingSet<double>> per_view;
  for (auto& [view, samples] : rows) {
    TrainingSet<double>& set = per_view[view];
    set.features.resize(static_cast<Eigen::Index>(samples.size()), samples.front().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      set.features.row(static_cast<Eigen::Index>(i)) = samples[i].transpose();
    }
    set.labels = std::move(labels[view]);
  }
  model.bank = train_bank(per_view, params.views, params.svm);
  model.dataset_fingerprint = fingerprint_hex(crc, frames);
  return model;
}

TrainedModel train_pipeline(const PreparedDataset& dataset, const PipelineParams& params) {
  std::vector<const PreparedSequence*> all;
  all.reserve(dataset.size());
  for (const auto& s : dataset) all.push_back(&s);
  return train_pipeline(std::span<const PreparedSequence* const>(all), params);
}

TrainedModel train_pipeline(const Dataset& dataset, const PipelineParams& params) {
  return train_pipeline(prepare(dataset, params), params);
}

std::optional<BoundingBox> PassThroughDetector::detect(const RawSilhouette& frame) const {
  if (frame.width() < 1 || frame.height() < 1 || popcount(frame.mask()) == 0) return std::nullopt;
  return BoundingBox{0, 0, frame.width(), frame.height()};
}

namespace {

NormalizedSilhouette clean_frame(const NormalizedSilhouette& s, int view, const TrainedModel& model,
                                 std::int64_t& removed) {
  AttachmentRemoval r = remove_attachment(s, view, model.ds, model.params.reference_refinements);
  removed = r.report.removed_pixel_count;
  if (r.report.violating_runs.empty() || !model.params.renormalize_after_removal) {
    return std::move(r.silhouette);
  }
  return normalize(RawSilhouette(r.silhouette.mask()), model.params.norm, s.source_id());
}

}  // namespace

AverageGaitImage<double> corrected_agi(std::span<const NormalizedSilhouette> frames, int view,
                                       const TrainedModel& model) {
  std::vector<NormalizedSilhouette> cleaned;
  cleaned.reserve(frames.size());
  for (const auto& f : frames) {
    std::int64_t removed = 0;
    cleaned.push_back(clean_frame(f, view, model, removed));
  }
  return compute_agi<double>(cleaned);
}

void StreamState::reset() {
  buffer_.clear();
  window_.clear();
  counter_ = 0;
}

namespace {

// Adds the time since the last lap to `slot`, when timing is enabled.
class Lap {
 public:
  explicit Lap(StageTimings* t) : t_(t), last_(std::chrono::steady_clock::now()) {}
  void operator()(double StageTimings::*slot) {
    if (!t_) return;
    const auto now = std::chrono::steady_clock::now();
    t_->*slot += std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

 private:
  StageTimings* t_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace

std::optional<StreamDecision> step_stream_normalized(StreamState& state,
                                                     const std::optional<NormalizedSilhouette>& frame,
                                                     const TrainedModel& model, StageTimings* timings) {
  Lap lap(timings);
  if (!frame) {
    state.reset();
    return std::nullopt;
  }
  const Mask& mask = frame->mask();
  if (state.buffer_.empty()) state.window_ = WindowAccumulator(static_cast<int>(mask.rows()), static_cast<int>(mask.cols()));
  state.window_.add(mask);
  state.buffer_.push_back({*frame, {}, {}});
  ++state.counter_;

  const int T = model.params.T();
  if (state.counter_ < T || static_cast<int>(state.buffer_.size()) < T) {
    lap(&StageTimings::window_ms);
    return std::nullopt;
  }

  const AverageGaitImage<double> agi = state.window_.agi<double>();
  lap(&StageTimings::window_ms);
  StreamDecision decision;
  decision.view = estimate_viewpoint(extract_lower(agi), model.vp);
  decision.counter = state.counter_;
  lap(&StageTimings::view_ms);

  Vector<double> features;
  if (model.params.attachment_removal) {
    Image<std::int32_t> sum = Image<std::int32_t>::Zero(mask.rows(), mask.cols());
    for (auto& b : state.buffer_) {
      auto it = b.corrected.find(decision.view);
      if (it == b.corrected.end()) {
        std::int64_t removed = 0;
        it = b.corrected.emplace(decision.view, clean_frame(b.original, decision.view, model, removed)).first;
        b.removed[decision.view] = removed;
      }
      sum += it->second.mask().cast<std::int32_t>();
      decision.removed_pixels += b.removed[decision.view];
    }
    AverageGaitImage<double> cleaned{sum.cast<double>() / static_cast<double>(state.buffer_.size()),
                                     static_cast<int>(state.buffer_.size()), decision.view};
    features = agi_features(cleaned);
  } else {
    features = agi_features(agi);
  }
  lap(&StageTimings::removal_ms);

  const auto clf = model.bank.find(decision.view);
  if (clf == model.bank.end()) {
    throw Error(ErrorCode::MissingView, "no classifier for view " + std::to_string(decision.view));
  }
  const Prediction p = predict(clf->second, features);
  decision.label = p.label;
  decision.decision = p.decision;
  state.last_ = decision;

  state.window_.remove(state.buffer_.front().original.mask());
  state.buffer_.pop_front();
  lap(&StageTimings::predict_ms);
  return decision;
}

std::optional<StreamDecision> step_stream(StreamState& state, const std::optional<Detection>& frame,
                                          const TrainedModel& model, StageTimings* timings) {
  if (!frame) return step_stream_normalized(state, std::nullopt, model, timings);
  Lap lap(timings);
  std::optional<NormalizedSilhouette> s;
  try {
    s = normalize(frame->frame, frame->box, model.params.norm);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptySilhouette && e.code() != ErrorCode::DegenerateBox) throw;
  }
  lap(&StageTimings::normalize_ms);
  return step_stream_normalized(state, s, model, timings);
}

}  // namespace gaitgender
