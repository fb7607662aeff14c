#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace segsem;

TEST(Integral, TablesMatchDirectSums) {
  Rng rng(11);
  const GrayImage img = oracle::random_image(rng, 37, 23);
  const IntegralImage ii(img);
  for (int y = 0; y <= img.height(); ++y) {
    for (int x = 0; x <= img.width(); ++x) {
      std::uint64_t s = 0, q = 0;
      for (int yy = 0; yy < y; ++yy)
        for (int xx = 0; xx < x; ++xx) {
          s += img(xx, yy);
          q += std::uint64_t{img(xx, yy)} * img(xx, yy);
        }
      ASSERT_EQ(ii.sum_at(x, y), s);
      ASSERT_EQ(ii.sq_sum_at(x, y), q);
    }
  }
}

TEST(WindowStats, TwoByTwoFullWindow) {
  const GrayImage img(2, 2, std::vector<std::uint8_t>{1, 2, 3, 4});
  const auto s = window_stats(IntegralImage(img), 0, 0, 1);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(1.25), 1e-15);
}

TEST(WindowStats, ConstantImageHasZeroSpread) {
  const GrayImage img(9, 7, 77);
  const IntegralImage ii(img);
  for (int r : {1, 2, 5}) {
    const auto s = window_stats(ii, 4, 3, r);
    EXPECT_EQ(s.mean, 77.0);
    EXPECT_EQ(s.stddev, 0.0);
  }
}

TEST(WindowStats, RandomWindowsMatchLoop) {
  Rng rng(5);
  const GrayImage img = oracle::random_image(rng, 64, 64);
  const IntegralImage ii(img);
  for (int i = 0; i < 500; ++i) {
    const int cx = static_cast<int>(rng.uniform_int(0, 63));
    const int cy = static_cast<int>(rng.uniform_int(0, 63));
    const int r = static_cast<int>(rng.uniform_int(1, 20));
    const auto n = oracle::naive_window(img, cx, cy, r);
    const double mean = double(n.sum) / double(n.n);
    double ss = 0;
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x)
        if (img.contains(x, y)) ss += (img(x, y) - mean) * (img(x, y) - mean);
    const double sd = std::sqrt(ss / double(n.n));
    const auto s = window_stats(ii, cx, cy, r);
    EXPECT_NEAR(s.mean, mean, 1e-9 * std::max(1.0, mean));
    EXPECT_NEAR(s.stddev, sd, 1e-9 * std::max(1.0, sd));
  }
}

TEST(WindowStats, RejectsBadArguments) {
  const IntegralImage ii(GrayImage(4, 4, 0));
  EXPECT_THROW(window_stats(ii, 4, 0, 1), InvalidArgument);
  EXPECT_THROW(window_stats(ii, 0, -1, 1), InvalidArgument);
  EXPECT_THROW(window_stats(ii, 0, 0, 0), InvalidArgument);
}

TEST(Labeling, EmptyMaskHasNoComponents) {
  const auto lm = label_components(BinaryMask(8, 8, 0));
  EXPECT_EQ(lm.component_count, 0);
  EXPECT_TRUE(lm.regions.empty());
}

TEST(Labeling, DiagonalPixelsDependOnConnectivity) {
  BinaryMask m(4, 4, 0);
  m(1, 1) = 1;
  m(2, 2) = 1;
  EXPECT_EQ(label_components(m, Connectivity::four).component_count, 2);
  EXPECT_EQ(label_components(m, Connectivity::eight).component_count, 1);
}

TEST(Labeling, MatchesFloodFillOnRandomMasks) {
  Rng rng(2024);
  for (int t = 0; t < 200; ++t) {
    const BinaryMask m = oracle::random_mask(rng, 16, 16);
    for (int conn : {4, 8}) {
      int n = 0;
      const auto want = oracle::flood_labels(m, conn, &n);
      const auto got = label_components(m, connectivity_from_int(conn));
      ASSERT_EQ(got.component_count, n);
      ASSERT_EQ(got.labels, want) << "mask " << t << " connectivity " << conn;
    }
  }
}

TEST(Labeling, RegionStatsAgreeWithLabels) {
  Rng rng(99);
  const BinaryMask m = oracle::random_blob_mask(rng, 24, 24);
  const auto lm = label_components(m);
  std::size_t total = 0;
  for (int i = 0; i < lm.component_count; ++i) {
    const RegionStats& r = lm.regions[i];
    std::size_t area = 0;
    double sx = 0;
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (lm.labels(x, y) == i + 1) {
          ++area;
          sx += x;
          EXPECT_GE(x, r.min_x);
          EXPECT_LE(x, r.max_x);
          EXPECT_GE(y, r.min_y);
          EXPECT_LE(y, r.max_y);
        }
    EXPECT_EQ(r.area, area);
    EXPECT_NEAR(r.centroid_x, sx / double(area), 1e-12);
    total += area;
  }
  EXPECT_EQ(total, foreground_count(m));
}

TEST(Labeling, LargestComponentPrefersLowestLabelOnTie) {
  BinaryMask m(10, 3, 0);
  m(0, 0) = m(1, 0) = 1;
  m(5, 2) = m(6, 2) = 1;
  const BinaryMask big = largest_component(m);
  EXPECT_EQ(big(0, 0), 1);
  EXPECT_EQ(big(5, 2), 0);
}

TEST(Labeling, RejectsOtherConnectivity) { EXPECT_THROW(connectivity_from_int(6), InvalidArgument); }

TEST(Pgm, RoundTripsImagesAndMasks) {
  oracle::TempDir dir("pgm");
  Rng rng(3);
  const GrayImage img = oracle::random_image(rng, 13, 9);
  pgm::write_image(dir / "a.pgm", img);
  EXPECT_EQ(pgm::read_image(dir / "a.pgm"), img);
  const BinaryMask m = oracle::random_mask(rng, 13, 9);
  pgm::write_mask(dir / "m.pgm", m);
  EXPECT_EQ(pgm::read_mask(dir / "m.pgm"), m);
}

TEST(Pgm, AcceptsHeaderComments) {
  std::istringstream in(std::string("P5\n# made by hand\n2 1\n255\n") + '\x07' + '\x09');
  const GrayImage img = pgm::decode_image(in);
  EXPECT_EQ(img.width(), 2);
  EXPECT_EQ(img(1, 0), 9);
}

TEST(Pgm, RejectsMalformedInput) {
  auto decode = [](const std::string& s) {
    std::istringstream in(s);
    return pgm::decode_image(in);
  };
  EXPECT_THROW(decode("P2\n1 1\n255\n0"), IoError);
  EXPECT_THROW(decode("P5\n1 1\n65535\nxx"), IoError);
  EXPECT_THROW(decode("P5\n2 2\n255\nabc"), IoError);
  EXPECT_THROW(decode("P5\n0 2\n255\n"), IoError);
  EXPECT_THROW(decode("P5\n"), IoError);
}

TEST(Pgm, MaskValuesMustBeBinary) {
  oracle::TempDir dir("pgm");
  pgm::write_image(dir / "g.pgm", GrayImage(3, 3, 128));
  EXPECT_THROW(pgm::read_mask(dir / "g.pgm"), IoError);
  EXPECT_THROW(pgm::read_image(dir / "missing.pgm"), IoError);
}

TEST(Rng, StreamsAreReproducibleAndSeedSensitive) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
  EXPECT_NE(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(8);
  double s = 0, s2 = 0, u = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double v = rng.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    u += v;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(u / n, 0.5, 0.005);
}
