#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"

using namespace segsem;

namespace {

void expect_valid_contours(const BinaryMask& m, const std::vector<Contour>& cs) {
  for (const Contour& c : cs) {
    ASSERT_FALSE(c.points.empty());
    EXPECT_TRUE(c.closed);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const Point a = c.points[i];
      const Point b = c.points[(i + 1) % c.points.size()];
      ASSERT_TRUE(m.contains(a.x, a.y) && m(a.x, a.y));
      if (c.points.size() > 1) {
        ASSERT_LE(std::abs(a.x - b.x), 1);
        ASSERT_LE(std::abs(a.y - b.y), 1);
      }
    }
  }
}

}  // namespace

TEST(Morphology, StructuringElementOffsets) {
  EXPECT_EQ(StructuringElement{}.offsets().size(), 9u);
  EXPECT_EQ((StructuringElement{5, ElementShape::plus}.offsets().size()), 9u);
  EXPECT_THROW((StructuringElement{4}.offsets()), InvalidArgument);
}

TEST(Morphology, ClosingKeepsSolidRectangle) {
  const BinaryMask m = oracle::rect_mask(20, 20, 5, 5, 10, 10);
  EXPECT_EQ(morph_close(m), m);
}

TEST(Morphology, ClosingKeepsIsolatedPixel) {
  BinaryMask m(9, 9, 0);
  m(4, 4) = 1;
  EXPECT_EQ(morph_close(m), m);
}

TEST(Morphology, BorderCountsAsBackground) {
  const BinaryMask full(6, 6, 1);
  EXPECT_EQ(foreground_count(erode(full)), 16u);
  EXPECT_EQ(dilate(BinaryMask(6, 6, 0)), BinaryMask(6, 6, 0));
}

TEST(Morphology, MatchesStampOraclesOnRandomMasks) {
  Rng rng(404);
  for (int t = 0; t < 50; ++t) {
    const BinaryMask m = t % 2 ? oracle::random_mask(rng, 32, 32) : oracle::random_blob_mask(rng, 32, 32);
    for (int side : {3, 5}) {
      for (bool plus : {false, true}) {
        const StructuringElement se{side, plus ? ElementShape::plus : ElementShape::square};
        ASSERT_EQ(dilate(m, se), oracle::stamp_dilate(m, side, plus));
        ASSERT_EQ(erode(m, se), oracle::stamp_erode(m, side, plus));
        ASSERT_EQ(morph_close(m, se), oracle::stamp_erode(oracle::stamp_dilate(m, side, plus), side, plus));
      }
    }
  }
}

TEST(Morphology, ClosingIsIdempotentAndExtensive) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const BinaryMask m = oracle::random_blob_mask(rng, 24, 24);
    const BinaryMask c = morph_close(m);
    EXPECT_EQ(morph_close(c), c);
    // extensive away from the border, where off-canvas background can erode
    for (int y = 1; y < 23; ++y)
      for (int x = 1; x < 23; ++x)
        if (m(x, y)) {
          EXPECT_EQ(c(x, y), 1);
        }
  }
}

TEST(FillHoles, RingBecomesDisk) {
  BinaryMask ring(21, 21, 0), disk(21, 21, 0);
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const int d2 = (x - 10) * (x - 10) + (y - 10) * (y - 10);
      ring(x, y) = d2 <= 64 && d2 >= 16;
      disk(x, y) = d2 <= 64;
    }
  EXPECT_EQ(fill_holes(ring), disk);
}

TEST(FillHoles, OpenShapeUnchanged) {
  BinaryMask c = oracle::rect_mask(16, 16, 3, 3, 10, 10);
  for (int y = 6; y < 10; ++y)
    for (int x = 6; x < 16; ++x) c(x, y) = 0;  // mouth runs to the right border
  EXPECT_EQ(fill_holes(c), c);
}

TEST(FillHoles, DiagonalLeakDoesNotOpenHole) {
  // the hole touches the outside only through a diagonal gap
  BinaryMask m = oracle::rect_mask(8, 8, 1, 1, 5, 5);
  m(3, 3) = 0;
  m(4, 4) = 0;
  m(5, 5) = 0;
  m(6, 6) = 0;
  EXPECT_EQ(fill_holes(m), oracle::labeled_fill_holes(m));
  EXPECT_EQ(fill_holes(m)(4, 4), 1);
}

TEST(FillHoles, MatchesLabelOracleOnRandomMasks) {
  Rng rng(66);
  for (int t = 0; t < 50; ++t) {
    const BinaryMask m = oracle::random_mask(rng, 20, 20);
    ASSERT_EQ(fill_holes(m), oracle::labeled_fill_holes(m)) << t;
    EXPECT_EQ(fill_holes(fill_holes(m)), fill_holes(m));
  }
}

TEST(Sobel, FlatFieldIsZero) {
  const GradientMap g = sobel_magnitude(GrayImage(10, 10, 90));
  for (auto v : g.pixels()) EXPECT_EQ(v, 0);
}

TEST(Sobel, VerticalStep) {
  GrayImage img(10, 8, 0);
  for (int y = 0; y < 8; ++y)
    for (int x = 5; x < 10; ++x) img(x, y) = 255;
  const GradientMap g = sobel_magnitude(img);
  for (int y = 1; y < 7; ++y) {
    EXPECT_EQ(g(4, y), 1020);
    EXPECT_EQ(g(5, y), 1020);
    EXPECT_EQ(g(3, y), 0);
    EXPECT_EQ(g(6, y), 0);
  }
  EXPECT_EQ(g(4, 0), 0);  // border row
}

TEST(Sobel, TransposeEquivariance) {
  Rng rng(2);
  const GrayImage img = oracle::random_image(rng, 12, 12);
  GrayImage t(12, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) t(y, x) = img(x, y);
  const GradientMap a = sobel_magnitude(img), b = sobel_magnitude(t);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) EXPECT_EQ(a(x, y), b(y, x));
}

TEST(Contours, SinglePixel) {
  BinaryMask m(5, 5, 0);
  m(2, 3) = 1;
  const auto cs = extract_contours(m);
  ASSERT_EQ(cs.size(), 1u);
  ASSERT_EQ(cs[0].points.size(), 1u);
  EXPECT_EQ(cs[0].points[0], (Point{2, 3}));
}

TEST(Contours, ThreeByThreeSquareClockwise) {
  const BinaryMask m = oracle::rect_mask(12, 12, 5, 5, 3, 3);
  const auto cs = extract_contours(m);
  ASSERT_EQ(cs.size(), 1u);
  const std::vector<Point> want{{5, 5}, {6, 5}, {7, 5}, {7, 6}, {7, 7}, {6, 7}, {5, 7}, {5, 6}};
  EXPECT_EQ(cs[0].points, want);
}

TEST(Contours, TwoRectanglesOrderedByStart) {
  BinaryMask m = oracle::rect_mask(30, 30, 15, 2, 4, 4);
  for (int y = 10; y < 20; ++y)
    for (int x = 1; x < 6; ++x) m(x, y) = 1;
  const auto cs = extract_contours(m);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].points[0], (Point{15, 2}));
  EXPECT_EQ(cs[1].points[0], (Point{1, 10}));
}

TEST(Contours, HoleGivesSecondLoop) {
  BinaryMask m = oracle::rect_mask(20, 20, 2, 2, 12, 12);
  for (int y = 6; y < 10; ++y)
    for (int x = 6; x < 10; ++x) m(x, y) = 0;
  const auto cs = extract_contours(m);
  EXPECT_EQ(cs.size(), 2u);
  expect_valid_contours(m, cs);
}

TEST(Contours, InnerCornerPixelsIncluded) {
  BinaryMask m = oracle::rect_mask(12, 12, 2, 2, 3, 8);
  for (int y = 7; y < 10; ++y)
    for (int x = 2; x < 10; ++x) m(x, y) = 1;  // L shape
  const auto cs = extract_contours(m);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(boundary_points(cs, 12, 12), oracle::boundary_set(m));
  expect_valid_contours(m, cs);
}

TEST(Contours, BorderTouchingMask) {
  const BinaryMask m(7, 5, 1);
  const auto cs = extract_contours(m);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].points.size(), 2u * 7 + 2u * 5 - 4);
}

TEST(Contours, EmptyMaskHasNone) { EXPECT_TRUE(extract_contours(BinaryMask(6, 6, 0)).empty()); }

TEST(Contours, PointSetEqualsBoundaryOnRandomMasks) {
  Rng rng(1234);
  for (int t = 0; t < 300; ++t) {
    const BinaryMask m = t % 3 == 0 ? oracle::random_mask(rng, 16, 16) : oracle::random_blob_mask(rng, 24, 20);
    const auto cs = extract_contours(m);
    ASSERT_EQ(boundary_points(cs, m.width(), m.height()), oracle::boundary_set(m)) << "mask " << t;
    expect_valid_contours(m, cs);
    // a pixel can lie on two loops, so starting points may tie, but no loop repeats
    for (std::size_t i = 1; i < cs.size(); ++i) {
      EXPECT_LE(cs[i - 1].points[0], cs[i].points[0]);
      EXPECT_NE(cs[i - 1].points, cs[i].points);
    }
    // distinct points never exceed the foreground
    EXPECT_LE(boundary_points(cs, m.width(), m.height()).size(), foreground_count(m));
  }
}

TEST(Contours, OneLoopPerSimpleShape) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const BinaryMask m = refine_mask(rasterize(random_layout(rng)));
    EXPECT_EQ(extract_contours(m).size(), 1u) << t;
  }
}

TEST(Refine, ClosesThenFills) {
  BinaryMask m = oracle::rect_mask(20, 20, 2, 2, 14, 14);
  for (int y = 5; y < 12; ++y)
    for (int x = 5; x < 12; ++x) m(x, y) = 0;
  for (int y = 2; y < 5; ++y) m(8, y) = 0;  // one-pixel crack into the hole
  const BinaryMask r = refine_mask(m);
  EXPECT_EQ(r, oracle::rect_mask(20, 20, 2, 2, 14, 14));
}
