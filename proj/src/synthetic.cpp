#include "gaitgender/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace gaitgender {

namespace {

// Camera elevation: how far (in body heights) ground points move down the
// image per unit of depth towards the camera.
constexpr double kGroundForeshortening = 0.3;
constexpr double kHipJoint = 0.50;
constexpr double kAnkle = 0.045;
constexpr double kFootHeight = 0.02;
constexpr double kCrotch = 0.47;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double jitter(std::mt19937_64& rng, double value, double rel) {
  return value * (1.0 + rel * (2.0 * uniform01(rng) - 1.0));
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct TorsoKey {
  double up;
  double half_breadth;
  double half_depth;
};

struct Point2 {
  double x;
  double y;
};

double segment_distance(Point2 p, Point2 a, Point2 b, double& t) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  t = len2 > 0 ? std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Tapered capsule between two image points.
struct Capsule {
  Point2 a;
  Point2 b;
  double radius_a;
  double radius_b;

  bool contains(Point2 p) const {
    double t = 0.0;
    const double d = segment_distance(p, a, b, t);
    return d <= radius_a + t * (radius_b - radius_a);
  }
  double min_x() const { return std::min(a.x, b.x) - std::max(radius_a, radius_b); }
  double max_x() const { return std::max(a.x, b.x) + std::max(radius_a, radius_b); }
  double min_y() const { return std::min(a.y, b.y) - std::max(radius_a, radius_b); }
  double max_y() const { return std::max(a.y, b.y) + std::max(radius_a, radius_b); }
};

}  // namespace

SubjectProfile make_subject(int gender, std::uint64_t subject_seed) {
  std::mt19937_64 rng(mix(subject_seed, gender > 0 ? 0x4d414c45ULL : 0x46454d41ULL));
  SubjectProfile p;
  p.gender = gender > 0 ? +1 : -1;
  const bool male = p.gender > 0;
  constexpr double kRel = 0.03;
  constexpr double kDepthRel = 0.02;
  p.head_radius = jitter(rng, male ? 0.060 : 0.068, kRel);
  p.shoulder_half_breadth = jitter(rng, male ? 0.125 : 0.104, kRel);
  p.waist_half_breadth = jitter(rng, male ? 0.095 : 0.085, kRel);
  p.hip_half_breadth = jitter(rng, male ? 0.098 : 0.116, kRel);
  // Torso depth is gender-neutral; gender shows in breadths and head size.
  p.chest_half_depth = jitter(rng, 0.064, kDepthRel);
  p.waist_half_depth = jitter(rng, 0.055, kDepthRel);
  p.hip_half_depth = jitter(rng, 0.062, kDepthRel);
  p.leg_offset = jitter(rng, male ? 0.055 : 0.060, kRel);
  p.thigh_radius = jitter(rng, 0.045, kRel);
  p.ankle_radius = jitter(rng, 0.028, kRel);
  p.stride = jitter(rng, 0.14, 0.07);
  p.phase = 2.0 * std::numbers::pi * uniform01(rng);
  return p;
}

Mask render_walker(const SubjectProfile& p, int view, int t, const WalkerOptions& o) {
  const int width = o.canvas_width;
  const int height = o.canvas_height;
  Mask mask = Mask::Zero(height, width);
  const double scale = o.body_height;
  const double phi = view * std::numbers::pi / 180.0;
  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);
  const double cx = width / 2.0 + o.offset_x;
  const double top = (height - scale) / 2.0 + o.offset_y;

  auto image_x = [&](double f, double l) { return cx + scale * (f * sin_phi + l * cos_phi); };
  auto image_y = [&](double up) { return top + scale * (1.0 - up); };
  // Ground-plane points drop lower in the image the closer they are.
  auto ground_shift = [&](double f, double l, double up) {
    const double weight = std::clamp((kHipJoint - up) / kHipJoint, 0.0, 1.0);
    return scale * kGroundForeshortening * (f * cos_phi - l * sin_phi) * weight;
  };
  auto project_leg = [&](double f, double l, double up) {
    return Point2{image_x(f, l), image_y(up) + ground_shift(f, l, up)};
  };

  const bool coat = o.attachment == Attachment::Coat;
  const double coat_margin = coat ? 0.022 : 0.0;
  const double shoulder_top = 1.0 - 2.0 * p.head_radius - 0.035;
  std::vector<TorsoKey> torso = {
      {shoulder_top, 0.70 * p.shoulder_half_breadth, 0.80 * p.chest_half_depth},
      {shoulder_top - 0.035, p.shoulder_half_breadth, p.chest_half_depth},
      {0.66, p.waist_half_breadth, p.waist_half_depth},
      {0.56, p.hip_half_breadth, p.hip_half_depth},
      {kCrotch, 0.9 * p.hip_half_breadth, 0.9 * p.hip_half_depth},
  };
  if (coat) {
    for (auto& k : torso) {
      k.half_breadth += coat_margin;
      k.half_depth += coat_margin;
    }
    torso.push_back({0.32, p.hip_half_breadth + 0.04, p.hip_half_depth + 0.045});
  }

  auto fill = [&](int y, double x0, double x1) {
    const int a = std::max(0, static_cast<int>(std::ceil(x0 - 0.5)));
    const int b = std::min(width - 1, static_cast<int>(std::floor(x1 - 0.5)));
    for (int x = a; x <= b; ++x) mask(y, x) = 1;
  };

  const double head_cy = image_y(1.0 - p.head_radius);
  const double head_r = scale * p.head_radius;
  const double neck_r = scale * 0.028;
  const double bag_front = -p.chest_half_depth + 0.015;
  const double bag_back = -p.chest_half_depth - 0.085;
  const double bag_half = 0.085;

  for (int y = 0; y < height; ++y) {
    const double py = y + 0.5;
    const double up = 1.0 - (py - top) / scale;

    const double dy = py - head_cy;
    if (std::abs(dy) <= head_r) {
      const double half = std::sqrt(head_r * head_r - dy * dy);
      fill(y, cx - half, cx + half);
    }
    if (up <= 1.0 - 1.5 * p.head_radius && up >= shoulder_top - 0.01) fill(y, cx - neck_r, cx + neck_r);

    for (std::size_t k = 0; k + 1 < torso.size(); ++k) {
      const TorsoKey& hi = torso[k];
      const TorsoKey& lo = torso[k + 1];
      if (up > hi.up || up < lo.up) continue;
      const double s = (hi.up - up) / (hi.up - lo.up);
      const double b = hi.half_breadth + s * (lo.half_breadth - hi.half_breadth);
      const double d = hi.half_depth + s * (lo.half_depth - hi.half_depth);
      const double half = scale * std::hypot(b * cos_phi, d * sin_phi);
      fill(y, cx - half, cx + half);
      break;
    }

    if (o.attachment == Attachment::Bag && up >= 0.57 && up <= shoulder_top - 0.02) {
      const std::array<double, 4> xs = {image_x(bag_front, -bag_half), image_x(bag_front, bag_half),
                                        image_x(bag_back, -bag_half), image_x(bag_back, bag_half)};
      fill(y, *std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end()));
    }
  }

  const double omega = 2.0 * std::numbers::pi / std::max(1, o.gait_period);
  std::vector<Capsule> limbs;
  for (int leg = 0; leg < 2; ++leg) {
    const double lateral = leg == 0 ? p.leg_offset : -p.leg_offset;
    const double foot_f = p.stride * std::sin(omega * t + p.phase + leg * std::numbers::pi);
    limbs.push_back({project_leg(0.0, lateral, kHipJoint), project_leg(foot_f, lateral, kAnkle),
                     scale * (p.thigh_radius + coat_margin), scale * p.ankle_radius});
    const double foot_r = scale * 0.022;
    limbs.push_back({project_leg(foot_f - 0.025, lateral, kFootHeight),
                     project_leg(foot_f + 0.075, lateral, kFootHeight), foot_r, foot_r});
  }
  for (const Capsule& c : limbs) {
    const int y0 = std::max(0, static_cast<int>(std::floor(c.min_y())));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(c.max_y())));
    const int x0 = std::max(0, static_cast<int>(std::floor(c.min_x())));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(c.max_x())));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (c.contains({x + 0.5, y + 0.5})) mask(y, x) = 1;
      }
    }
  }
  return mask;
}

RawSilhouette generate_synthetic_walker(int gender, int view, int t, const WalkerOptions& options) {
  Mask mask = render_walker(make_subject(gender, options.seed), view, t, options);
  if (options.noise > 0.0) {
    // Selection sampling flips exactly round(noise * N) distinct pixels.
    std::mt19937_64 rng(mix(mix(options.seed, static_cast<std::uint64_t>(view)),
                            static_cast<std::uint64_t>(t) + 0x6e6f697365ULL));
    const std::int64_t total = mask.size();
    std::int64_t needed = std::llround(std::clamp(options.noise, 0.0, 1.0) * total);
    for (std::int64_t i = 0; i < total && needed > 0; ++i) {
      if (uniform01(rng) * static_cast<double>(total - i) < static_cast<double>(needed)) {
        mask.data()[i] ^= 1;
        --needed;
      }
    }
  }
  return RawSilhouette(std::move(mask));
}

}  // namespace gaitgender
