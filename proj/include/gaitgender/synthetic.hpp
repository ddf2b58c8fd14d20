#pragma once

#include <cstdint>

#include "gaitgender/silhouette.hpp"

namespace gaitgender {

enum class Attachment { None, Bag, Coat };

/// Body proportions in units of standing height. make_subject() derives
/// them from gender and a subject seed.
struct SubjectProfile {
  int gender = +1;  // +1 male, -1 female
  double head_radius = 0.064;
  double shoulder_half_breadth = 0.115;
  double waist_half_breadth = 0.09;
  double hip_half_breadth = 0.107;
  double chest_half_depth = 0.064;
  double waist_half_depth = 0.055;
  double hip_half_depth = 0.064;
  double leg_offset = 0.057;
  double thigh_radius = 0.045;
  double ankle_radius = 0.028;
  double stride = 0.14;
  double phase = 0.0;  // radians
};

SubjectProfile make_subject(int gender, std::uint64_t subject_seed);

struct WalkerOptions {
  Attachment attachment = Attachment::None;
  /// Fraction of canvas pixels flipped after rendering.
  double noise = 0.0;
  /// Identifies the subject (proportions, gait phase) and seeds the noise.
  std::uint64_t seed = 0;
  int canvas_width = 200;
  int canvas_height = 210;
  /// Standing height in pixels.
  double body_height = 180.0;
  /// Horizontal and vertical shift of the body from its default placement.
  double offset_x = 0.0;
  double offset_y = 0.0;
  /// Frames per gait cycle. 15 is the 0.6 s cycle at 25 fps, so a default
  /// classification window spans exactly one cycle.
  int gait_period = 15;
};

/// Renders one frame of `profile` walking at camera angle `view` (degrees;
/// 0 approaches the camera, 90 walks left to right, 180 walks away).
Mask render_walker(const SubjectProfile& profile, int view, int t, const WalkerOptions& options);

/// Deterministic parametric walker: head disc, torso, two swinging legs and
/// feet; optional backpack or coat and salt-and-pepper noise.
RawSilhouette generate_synthetic_walker(int gender, int view, int t, const WalkerOptions& options);

}  // namespace gaitgender
