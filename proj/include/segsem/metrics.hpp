#pragma once

// Mask accuracy metrics, edge placement error, exposure score and the composite
// mask score used for ranking predictions against ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "segsem/raster.hpp"
#include "segsem/refine.hpp"

namespace segsem {

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "confusion");
  ConfusionCounts c;
  const auto p = pred.pixels();
  const auto g = gt.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0, b = g[i] != 0;
    if (a && b) ++c.tp;
    else if (a) ++c.fp;
    else if (b) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace detail {
inline double ratio(std::uint64_t num, std::uint64_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

// 0/0 is defined as 0 for every ratio below.
inline double iou(const ConfusionCounts& c) noexcept { return detail::ratio(c.tp, c.tp + c.fp + c.fn); }
inline double precision(const ConfusionCounts& c) noexcept { return detail::ratio(c.tp, c.tp + c.fp); }
inline double recall(const ConfusionCounts& c) noexcept { return detail::ratio(c.tp, c.tp + c.fn); }
inline double f1(const ConfusionCounts& c) noexcept {
  const double p = precision(c), r = recall(c);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}
inline double dice(const ConfusionCounts& c) noexcept {
  return detail::ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
}

inline double iou(const BinaryMask& pred, const BinaryMask& gt) { return iou(confusion(pred, gt)); }

struct EpeResult {
  double mean_epe = 0.0;
  double max_epe = 0.0;
  std::size_t sample_count = 0;
};

/// Edge placement error from each ground-truth point to its nearest predicted point.
///
/// An empty prediction scores `empty_pred_distance` for both mean and max; callers
/// pass the image diagonal.
inline EpeResult epe(std::span<const Point> pred, std::span<const Point> gt,
                     double empty_pred_distance) {
  if (gt.empty()) throw InvalidArgument("epe: ground-truth point set is empty");
  EpeResult r;
  r.sample_count = gt.size();
  if (pred.empty()) {
    r.mean_epe = r.max_epe = empty_pred_distance;
    return r;
  }
  std::vector<Point> sorted(pred.begin(), pred.end());
  std::sort(sorted.begin(), sorted.end(), [](Point a, Point b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  double sum = 0.0;
  for (const Point& g : gt) {
    // sweep outwards in x from the insertion point until dx^2 exceeds the best d^2
    const auto mid = std::lower_bound(sorted.begin(), sorted.end(), g,
                                      [](Point a, Point b) { return a.x < b.x; });
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    auto consider = [&](const Point& p) {
      const std::int64_t dx = p.x - g.x, dy = p.y - g.y;
      best = std::min(best, dx * dx + dy * dy);
    };
    for (auto it = mid; it != sorted.end(); ++it) {
      const std::int64_t dx = it->x - g.x;
      if (dx * dx > best) break;
      consider(*it);
    }
    for (auto it = mid; it != sorted.begin();) {
      --it;
      const std::int64_t dx = g.x - it->x;
      if (dx * dx > best) break;
      consider(*it);
    }
    const double d = std::sqrt(static_cast<double>(best));
    sum += d;
    r.max_epe = std::max(r.max_epe, d);
  }
  r.mean_epe = sum / static_cast<double>(gt.size());
  return r;
}

inline double image_diagonal(int width, int height) noexcept {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

/// EPE between the contour point sets of two masks.
inline EpeResult mask_epe(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "mask_epe");
  const auto g = boundary_points(gt);
  const auto p = boundary_points(pred);
  return epe(p, g, image_diagonal(gt.width(), gt.height()));
}

/// Population variance of the 4-neighbour Laplacian [0,1,0; 1,-4,1; 0,1,0] over
/// interior pixels.
inline double exposure_score(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) {
    throw InvalidArgument("exposure_score needs an image of at least 3x3");
  }
  std::int64_t sum = 0;
  std::int64_t sq = 0;
  std::int64_t n = 0;
  for (int y = 1; y + 1 < img.height(); ++y) {
    for (int x = 1; x + 1 < img.width(); ++x) {
      const std::int64_t lap = static_cast<std::int64_t>(img(x - 1, y)) + img(x + 1, y) +
                               img(x, y - 1) + img(x, y + 1) - 4 * static_cast<std::int64_t>(img(x, y));
      sum += lap;
      sq += lap * lap;
      ++n;
    }
  }
  const double mean = static_cast<double>(sum) / static_cast<double>(n);
  return std::max(0.0, static_cast<double>(sq) / static_cast<double>(n) - mean * mean);
}

inline int mask_count(const BinaryMask& mask) {
  return label_components(mask, Connectivity::eight).component_count;
}

struct ScoreWeights {
  double lambda_iou = 1.0;
  double lambda_count = 0.1;
  double lambda_epe = 0.01;

  void validate() const {
    for (double v : {lambda_iou, lambda_count, lambda_epe}) {
      if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("score weights must be finite and >= 0");
    }
  }
};

/// Composite mask score, lower is better:
///   dice_loss - lambda_iou * iou + lambda_count * max(0, components - 1)
///   + lambda_epe * mean_epe(boundary(pred), boundary(gt)).
/// The overlap term is a reward and the other two are penalties.
inline double score_eq1(const BinaryMask& pred, const BinaryMask& gt, const ScoreWeights& w = {}) {
  require_same_shape(pred, gt, "score_eq1");
  w.validate();
  if (foreground_count(gt) == 0) throw InvalidArgument("score_eq1: ground truth is empty");
  const ConfusionCounts c = confusion(pred, gt);
  const double dice_loss = 1.0 - dice(c);
  const int extra = std::max(0, mask_count(pred) - 1);
  const double mean_epe = mask_epe(pred, gt).mean_epe;
  return dice_loss - w.lambda_iou * iou(c) + w.lambda_count * extra + w.lambda_epe * mean_epe;
}

}  // namespace segsem
