#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gaitgender/error.hpp"
#include "gaitgender/linear_svm.hpp"
#include "gaitgender/silhouette.hpp"
#include "gaitgender/synthetic.hpp"
#include "support.hpp"

namespace gaitgender {
namespace {

using testing::brute_centroid;
using testing::brute_moment;

TEST(RawMoment, SinglePixelCount) {
  Mask m = Mask::Zero(8, 8);
  m(5, 3) = 1;
  EXPECT_EQ(raw_moment(m, 0, 0), 1.0);
  EXPECT_EQ(raw_moment(m, 1, 0), 3.0);
  EXPECT_EQ(raw_moment(m, 0, 1), 5.0);
}

TEST(RawMoment, TwoByTwoBlock) {
  Mask m = Mask::Zero(4, 4);
  m.block(0, 0, 2, 2).setOnes();
  EXPECT_EQ(raw_moment(m, 1, 0), 2.0);
}

TEST(RawMoment, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Mask m = testing::random_mask(rng, 32, 32);
    for (int i = 0; i <= 2; ++i) {
      for (int j = 0; i + j <= 2; ++j) EXPECT_EQ(raw_moment(m, i, j), brute_moment(m, i, j));
    }
    EXPECT_EQ(raw_moment(m, 0, 0), static_cast<double>(popcount(m)));
  }
}

TEST(Centroid, Square) {
  Mask m = Mask::Zero(6, 6);
  m.block(0, 0, 3, 3).setOnes();
  const Centroid c = centroid(m);
  EXPECT_EQ(c.x, 1.0);
  EXPECT_EQ(c.y, 1.0);
}

TEST(Centroid, SinglePixel) {
  Mask m = Mask::Zero(10, 10);
  m(2, 7) = 1;
  const Centroid c = centroid(m);
  EXPECT_EQ(c.x, 7.0);
  EXPECT_EQ(c.y, 2.0);
}

TEST(Centroid, EmptyThrows) {
  try {
    centroid(Mask::Zero(4, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySilhouette);
  }
}

TEST(Centroid, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Mask m = testing::random_mask(rng, 40, 30, 0.3);
    const Centroid a = centroid(m);
    const Centroid b = brute_centroid(m);
    EXPECT_NEAR(a.x, b.x, 1e-12);
    EXPECT_NEAR(a.y, b.y, 1e-12);
  }
}

TEST(Centroid, TranslationEquivariant) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Mask m = Mask::Zero(40, 40);
    m.block(0, 0, 20, 20) = testing::random_mask(rng, 20, 20);
    m(0, 0) = 1;
    const int dx = static_cast<int>(rng() % 20);
    const int dy = static_cast<int>(rng() % 20);
    Mask shifted = Mask::Zero(40, 40);
    shifted.block(dy, dx, 20, 20) = m.block(0, 0, 20, 20);
    const Centroid a = centroid(m);
    const Centroid b = centroid(shifted);
    EXPECT_DOUBLE_EQ(b.x, a.x + dx);
    EXPECT_DOUBLE_EQ(b.y, a.y + dy);
  }
}

TEST(LargestComponent, KeepsBiggest) {
  Mask m = Mask::Zero(10, 10);
  m.block(0, 0, 2, 2).setOnes();
  m.block(5, 5, 3, 3).setOnes();
  const Mask out = largest_component(m);
  EXPECT_EQ(popcount(out), 9);
  EXPECT_EQ(out(0, 0), 0);
}

TEST(LargestComponent, DiagonalIsConnected) {
  Mask m = Mask::Zero(5, 5);
  for (int i = 0; i < 5; ++i) m(i, i) = 1;
  EXPECT_EQ(popcount(largest_component(m)), 5);
}

TEST(Normalize, RectangleAspect) {
  Mask m = Mask::Zero(50, 50);
  m.block(10, 5, 20, 10).setOnes();  // 10 wide, 20 tall
  const NormalizedSilhouette s = normalize(RawSilhouette(m));
  ASSERT_EQ(s.height(), 144);
  ASSERT_EQ(s.width(), 144);
  const auto b = foreground_bounds(s.mask());
  ASSERT_TRUE(b);
  EXPECT_EQ(b->height, 144);
  EXPECT_NEAR(b->width, 72, 1);
  EXPECT_NEAR(centroid(s).x, 72.0, 0.5);
}

TEST(Normalize, FixedPoint) {
  Mask m = Mask::Zero(144, 144);
  m.block(0, 52, 144, 40).setOnes();
  const NormalizedSilhouette once = normalize(RawSilhouette(m));
  const NormalizedSilhouette twice = normalize(RawSilhouette(once.mask()));
  EXPECT_TRUE((once.mask() == twice.mask()).all());
}

TEST(Normalize, IdempotentOnWalkers) {
  for (int view : {0, 54, 90, 144}) {
    const auto raw = generate_synthetic_walker(kMale, view, 7, {});
    const auto once = normalize(raw);
    const auto twice = normalize(RawSilhouette(once.mask()));
    EXPECT_GE(iou(once.mask(), twice.mask()), 0.99) << view;
  }
}

TEST(Normalize, IntegerTranslationInvariance) {
  for (int view : {0, 36, 90, 126, 180}) {
    WalkerOptions a;
    a.seed = 5;
    WalkerOptions b = a;
    b.offset_x = -17;
    b.offset_y = 4;
    const auto na = normalize(generate_synthetic_walker(kFemale, view, 3, a));
    const auto nb = normalize(generate_synthetic_walker(kFemale, view, 3, b));
    EXPECT_TRUE((na.mask() == nb.mask()).all()) << view;
  }
}

// A new scale or sub-pixel offset re-rasterizes the walker, and a side-view
// body is only ~17 px wide at 144 rows, so one flipped edge pixel per row
// already costs ~6% IoU, and separated frontal legs (~8 px each) more. The
// bound reflects that, not a centering error.
TEST(Normalize, ScaleAndSubpixelOffsetStayClose) {
  for (int view : {0, 36, 90, 126, 180}) {
    WalkerOptions a;
    a.seed = 5;
    WalkerOptions b = a;
    b.offset_x = -16.7;
    b.offset_y = 4.2;
    b.body_height = 164;
    const auto na = normalize(generate_synthetic_walker(kFemale, view, 3, a));
    const auto nb = normalize(generate_synthetic_walker(kFemale, view, 3, b));
    EXPECT_GE(iou(na.mask(), nb.mask()), 0.85) << view;
    EXPECT_NEAR(centroid(na).x, centroid(nb).x, 1.0) << view;
  }
}

TEST(Normalize, BoxCropsAndRejectsOutside) {
  Mask m = Mask::Zero(40, 40);
  m.block(2, 2, 10, 5).setOnes();
  m.block(20, 20, 15, 15).setOnes();
  const auto s = normalize(RawSilhouette(m), BoundingBox{0, 0, 15, 15});
  EXPECT_EQ(foreground_bounds(s.mask())->height, 144);
  EXPECT_NEAR(foreground_bounds(s.mask())->width, 72, 1);
  try {
    normalize(RawSilhouette(m), BoundingBox{100, 100, 5, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateBox);
  }
  try {
    normalize(RawSilhouette(Mask::Zero(10, 10)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySilhouette);
  }
}

bool has_background_neighbour(const Mask& m, int x, int y) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int xx = x + dx;
      const int yy = y + dy;
      if (xx < 0 || yy < 0 || xx >= m.cols() || yy >= m.rows() || m(yy, xx) == 0) return true;
    }
  }
  return false;
}

TEST(TraceContour, SinglePixel) {
  Mask m = Mask::Zero(5, 5);
  m(2, 2) = 1;
  const Contour c = trace_contour(m, {2, 2});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], (Pixel{2, 2}));
}

TEST(TraceContour, RectanglePerimeter) {
  const Mask m = testing::rect(20, 20, 3, 4, 7, 5);
  const Contour c = trace_contour(m, centroid(m));
  std::set<std::pair<int, int>> got;
  for (const auto& p : c) got.insert({p.x, p.y});
  std::set<std::pair<int, int>> want;
  for (int y = 4; y < 9; ++y) {
    for (int x = 3; x < 10; ++x) {
      if (x == 3 || x == 9 || y == 4 || y == 8) want.insert({x, y});
    }
  }
  EXPECT_EQ(got, want);
  EXPECT_EQ(c.size(), want.size());
}

TEST(TraceContour, ClosedLoopCoveringOuterBoundary) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Mask m = testing::random_blob(rng, 60);
    const Centroid ctr = centroid(m);
    const Contour c = trace_contour(m, ctr);
    ASSERT_GT(c.size(), 2u);
    std::set<std::pair<int, int>> on;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Pixel a = c[i];
      const Pixel b = c[(i + 1) % c.size()];
      EXPECT_LE(std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)), 1);
      EXPECT_TRUE(has_background_neighbour(m, a.x, a.y));
      on.insert({a.x, a.y});
    }
    // Outer boundary: foreground pixels 4-adjacent to background reachable
    // from the image border.
    Mask outside = Mask::Zero(m.rows(), m.cols());
    std::vector<std::pair<int, int>> stack;
    for (int x = 0; x < m.cols(); ++x) stack.push_back({x, 0}), stack.push_back({x, static_cast<int>(m.rows()) - 1});
    for (int y = 0; y < m.rows(); ++y) stack.push_back({0, y}), stack.push_back({static_cast<int>(m.cols()) - 1, y});
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      if (x < 0 || y < 0 || x >= m.cols() || y >= m.rows() || m(y, x) || outside(y, x)) continue;
      outside(y, x) = 1;
      stack.push_back({x + 1, y});
      stack.push_back({x - 1, y});
      stack.push_back({x, y + 1});
      stack.push_back({x, y - 1});
    }
    for (int y = 0; y < m.rows(); ++y) {
      for (int x = 0; x < m.cols(); ++x) {
        if (!m(y, x)) continue;
        bool touches = false;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < m.cols() && yy < m.rows() && outside(yy, xx)) touches = true;
        }
        if (touches) {
          EXPECT_TRUE(on.contains({x, y})) << x << "," << y;
        }
      }
    }
  }
}

TEST(TraceContour, StartsNearestPositiveXRay) {
  const Mask m = testing::disk(41, 41, 20, 20, 12);
  const Contour c = trace_contour(m, {20, 20});
  EXPECT_EQ(c.front(), (Pixel{32, 20}));
  // counterclockwise on screen: the next point moves up (smaller y).
  EXPECT_LE(c[1].y, 20);
}

TEST(Iou, Basics) {
  const Mask a = testing::rect(10, 10, 0, 0, 4, 4);
  const Mask b = testing::rect(10, 10, 2, 0, 4, 4);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, b), 8.0 / 24.0);
  EXPECT_DOUBLE_EQ(iou(Mask::Zero(3, 3), Mask::Zero(3, 3)), 1.0);
}

}  // namespace
}  // namespace gaitgender
