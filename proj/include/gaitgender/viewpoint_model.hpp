#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gaitgender/error.hpp"
#include "gaitgender/gait_features.hpp"
#include "gaitgender/silhouette.hpp"

namespace gaitgender {

/// The eleven camera angles 0, 18, ..., 180 degrees.
inline std::vector<int> default_views() {
  std::vector<int> views;
  for (int a = 0; a <= 180; a += 18) views.push_back(a);
  return views;
}

/// Per-view templates of the lower band of the average silhouette.
template <typename Scalar = double>
struct VPModel {
  std::map<int, Image<Scalar>> templates;
  int norm_height = kDefaultNormHeight;
  int norm_width = kDefaultNormWidth;
};

/// Accumulates lower-band foreground counts per view; build() turns them
/// into mean templates.
class VPModelBuilder {
 public:
  void add(int view, const Mask& silhouette) {
    if (height_ == 0) {
      height_ = static_cast<int>(silhouette.rows());
      width_ = static_cast<int>(silhouette.cols());
    }
    if (silhouette.rows() != height_ || silhouette.cols() != width_) {
      throw Error(ErrorCode::ShapeMismatch, "training silhouettes differ in size");
    }
    const auto lower = lower_rows(silhouette);
    auto& acc = sums_[view];
    if (acc.count == 0) acc.sum = Image<std::int64_t>::Zero(lower.rows(), lower.cols());
    acc.sum += lower.template cast<std::int64_t>();
    ++acc.count;
  }

  template <typename Scalar = double>
  VPModel<Scalar> build(std::span<const int> views) const {
    VPModel<Scalar> model;
    model.norm_height = height_;
    model.norm_width = width_;
    for (int view : views) {
      const auto it = sums_.find(view);
      if (it == sums_.end() || it->second.count == 0) {
        throw Error(ErrorCode::MissingView, "no training silhouettes for view " + std::to_string(view));
      }
      model.templates[view] =
          it->second.sum.template cast<Scalar>() / static_cast<Scalar>(it->second.count);
    }
    return model;
  }

 private:
  struct Acc {
    Image<std::int64_t> sum;
    std::int64_t count = 0;
  };
  std::map<int, Acc> sums_;
  int height_ = 0;
  int width_ = 0;
};

template <typename Scalar = double>
VPModel<Scalar> build_vp_model(const std::map<int, std::vector<NormalizedSilhouette>>& training,
                               std::span<const int> views) {
  VPModelBuilder builder;
  for (const auto& [view, silhouettes] : training) {
    for (const auto& s : silhouettes) builder.add(view, s.mask());
  }
  return builder.template build<Scalar>(views);
}

/// Squared Euclidean distance from the probe to every template.
template <typename Scalar>
std::map<int, double> viewpoint_distances(const Image<Scalar>& probe, const VPModel<Scalar>& model) {
  std::map<int, double> out;
  for (const auto& [view, tmpl] : model.templates) {
    if (tmpl.rows() != probe.rows() || tmpl.cols() != probe.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "probe shape does not match viewpoint templates");
    }
    out[view] = static_cast<double>((probe - tmpl).matrix().squaredNorm());
  }
  return out;
}

/// Nearest template in Euclidean distance; ties go to the smallest angle.
template <typename Scalar>
int estimate_viewpoint(const LowerAGI<Scalar>& probe, const VPModel<Scalar>& model) {
  if (model.templates.empty()) throw Error(ErrorCode::MissingView, "viewpoint model is empty");
  int best_view = model.templates.begin()->first;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [view, d2] : viewpoint_distances(probe.pixels, model)) {
    if (d2 < best) {
      best = d2;
      best_view = view;
    }
  }
  return best_view;
}

}  // namespace gaitgender
