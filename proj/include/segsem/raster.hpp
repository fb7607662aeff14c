#pragma once

// Raster primitives: grayscale images, binary masks, integral images and
// union-find connected-component labeling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "segsem/error.hpp"

namespace segsem {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point& a, const Point& b) {
    // row-major: y first
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

/// Dense row-major raster. `Tag` keeps images and masks apart at the type level.
template <typename T, typename Tag = void>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvalidArgument("raster dimensions must be >= 1, got " + std::to_string(width) +
                            "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<T> data) : Raster(width, height) {
    if (data.size() != data_.size()) {
      throw InvalidArgument("raster data length " + std::to_string(data.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    data_ = std::move(data);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  /// Value at (x,y), or `outside` when the coordinate is off-raster.
  T at_or(int x, int y, T outside) const noexcept {
    return contains(x, y) ? data_[index(x, y)] : outside;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct GrayTag;
struct MaskTag;

/// 8-bit grayscale image.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Foreground map; each pixel is 0 (background) or 1 (foreground).
using BinaryMask = Raster<std::uint8_t, MaskTag>;
/// Per-pixel non-negative gradient magnitudes.
using GradientMap = Raster<std::int32_t>;

inline std::size_t foreground_count(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto v) { return v != 0; }));
}

inline BinaryMask invert(const BinaryMask& mask) {
  BinaryMask out = mask;
  for (auto& v : out.pixels()) v = v ? 0 : 1;
  return out;
}

inline void require_same_shape(const auto& a, const auto& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch " + std::to_string(a.width()) +
                          "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                          "x" + std::to_string(b.height()));
  }
}

// ---------------------------------------------------------------------------
// Integral image

/// Summed-area tables of intensities and squared intensities.
///
/// Both tables are (width+1) x (height+1); entry (x,y) holds the exact sum over
/// the half-open rectangle [0,x) x [0,y). Row 0 and column 0 are zero.
class IntegralImage {
 public:
  IntegralImage() = default;

  explicit IntegralImage(const GrayImage& img)
      : width_(img.width()), height_(img.height()) {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    sum_.assign(stride * (static_cast<std::size_t>(height_) + 1), 0);
    sq_.assign(sum_.size(), 0);
    for (int y = 0; y < height_; ++y) {
      std::uint64_t row_sum = 0;
      std::uint64_t row_sq = 0;
      for (int x = 0; x < width_; ++x) {
        const std::uint64_t v = img(x, y);
        row_sum += v;
        row_sq += v * v;
        const std::size_t at = (static_cast<std::size_t>(y) + 1) * stride + x + 1;
        sum_[at] = sum_[at - stride] + row_sum;
        sq_[at] = sq_[at - stride] + row_sq;
      }
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::uint64_t sum_at(int x, int y) const noexcept { return sum_[offset(x, y)]; }
  std::uint64_t sq_sum_at(int x, int y) const noexcept { return sq_[offset(x, y)]; }

  /// Sum over the half-open box [x0,x1) x [y0,y1).
  std::uint64_t box_sum(int x0, int y0, int x1, int y1) const noexcept {
    return sum_at(x1, y1) - sum_at(x0, y1) - sum_at(x1, y0) + sum_at(x0, y0);
  }
  std::uint64_t box_sq_sum(int x0, int y0, int x1, int y1) const noexcept {
    return sq_sum_at(x1, y1) - sq_sum_at(x0, y1) - sq_sum_at(x1, y0) + sq_sum_at(x0, y0);
  }

 private:
  std::size_t offset(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * (static_cast<std::size_t>(width_) + 1) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sq_;
};

inline IntegralImage integral_build(const GrayImage& img) { return IntegralImage(img); }

/// Exact integer moments of a pixel window.
struct WindowMoments {
  std::uint64_t count = 0;
  std::uint64_t sum = 0;
  std::uint64_t sq_sum = 0;

  double mean() const noexcept { return static_cast<double>(sum) / static_cast<double>(count); }

  /// Population standard deviation, computed from n*sq - sum^2 in 128-bit integers
  /// so the only rounding happens in the final division and square root.
  double stddev() const noexcept {
    using u128 = unsigned __int128;
    const u128 n = count;
    const u128 num = n * static_cast<u128>(sq_sum) - static_cast<u128>(sum) * sum;
    return std::sqrt(static_cast<double>(num)) / static_cast<double>(count);
  }
};

/// Clipped window [cx-r, cx+r] x [cy-r, cy+r] intersected with the image.
struct Window {
  int x0, y0, x1, y1;  // half-open
};

inline Window clamp_window(int width, int height, int cx, int cy, int radius) noexcept {
  return {std::max(0, cx - radius), std::max(0, cy - radius), std::min(width, cx + radius + 1),
          std::min(height, cy + radius + 1)};
}

inline WindowMoments window_moments(const IntegralImage& ii, int cx, int cy, int radius) {
  if (cx < 0 || cy < 0 || cx >= ii.width() || cy >= ii.height()) {
    throw InvalidArgument("window center (" + std::to_string(cx) + "," + std::to_string(cy) +
                          ") outside " + std::to_string(ii.width()) + "x" +
                          std::to_string(ii.height()) + " image");
  }
  if (radius < 1) throw InvalidArgument("window radius must be >= 1");
  const Window w = clamp_window(ii.width(), ii.height(), cx, cy, radius);
  return {static_cast<std::uint64_t>(w.x1 - w.x0) * static_cast<std::uint64_t>(w.y1 - w.y0),
          ii.box_sum(w.x0, w.y0, w.x1, w.y1), ii.box_sq_sum(w.x0, w.y0, w.x1, w.y1)};
}

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and population standard deviation over the window of the given radius
/// centred on (cx,cy), clipped to the image bounds.
inline WindowStats window_stats(const IntegralImage& ii, int cx, int cy, int radius) {
  const WindowMoments m = window_moments(ii, cx, cy, radius);
  return {m.mean(), m.stddev()};
}

// ---------------------------------------------------------------------------
// Connected components

enum class Connectivity : int { four = 4, eight = 8 };

inline Connectivity connectivity_from_int(int c) {
  if (c == 4) return Connectivity::four;
  if (c == 8) return Connectivity::eight;
  throw InvalidArgument("connectivity must be 4 or 8, got " + std::to_string(c));
}

struct RegionStats {
  std::size_t area = 0;
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double centroid_x = 0.0, centroid_y = 0.0;

  int bbox_width() const noexcept { return max_x - min_x + 1; }
  int bbox_height() const noexcept { return max_y - min_y + 1; }
  double aspect() const noexcept {
    return static_cast<double>(bbox_width()) / static_cast<double>(bbox_height());
  }
};

struct LabelMap {
  Raster<std::int32_t> labels;  // 0 = background, components numbered 1..count
  int component_count = 0;
  std::vector<RegionStats> regions;  // regions[i] describes label i+1

  int width() const noexcept { return labels.width(); }
  int height() const noexcept { return labels.height(); }
};

namespace detail {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }
  std::int32_t find(std::int32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // smaller root wins so resolution is scan-order independent
    if (a < b) parent_[b] = a; else parent_[a] = b;
  }
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace detail

/// Two-pass union-find labeling. Labels are assigned in row-major order of each
/// component's first pixel.
inline LabelMap label_components(const BinaryMask& mask,
                                 Connectivity connectivity = Connectivity::eight) {
  const int w = mask.width();
  const int h = mask.height();
  LabelMap out;
  out.labels = Raster<std::int32_t>(w, h, 0);
  detail::DisjointSet sets;
  sets.make();  // provisional label 0 is background

  const bool diag = connectivity == Connectivity::eight;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      std::int32_t neighbours[4];
      int n = 0;
      auto take = [&](int nx, int ny) {
        if (mask.contains(nx, ny) && mask(nx, ny)) neighbours[n++] = out.labels(nx, ny);
      };
      take(x - 1, y);
      take(x, y - 1);
      if (diag) {
        take(x - 1, y - 1);
        take(x + 1, y - 1);
      }
      if (n == 0) {
        out.labels(x, y) = sets.make();
      } else {
        std::int32_t lbl = *std::min_element(neighbours, neighbours + n);
        for (int i = 0; i < n; ++i) sets.unite(lbl, neighbours[i]);
        out.labels(x, y) = lbl;
      }
    }
  }

  std::vector<std::int32_t> final_label(sets.size(), 0);
  for (auto& lbl : out.labels.pixels()) {
    if (lbl == 0) continue;
    const std::int32_t root = sets.find(lbl);
    if (final_label[root] == 0) {
      final_label[root] = ++out.component_count;
      out.regions.push_back({});
    }
    lbl = final_label[root];
  }

  std::vector<double> sx(out.regions.size(), 0.0), sy(out.regions.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t lbl = out.labels(x, y);
      if (lbl == 0) continue;
      RegionStats& r = out.regions[lbl - 1];
      if (r.area == 0) {
        r.min_x = r.max_x = x;
        r.min_y = r.max_y = y;
      } else {
        r.min_x = std::min(r.min_x, x);
        r.max_x = std::max(r.max_x, x);
        r.max_y = y;
      }
      ++r.area;
      sx[lbl - 1] += x;
      sy[lbl - 1] += y;
    }
  }
  for (std::size_t i = 0; i < out.regions.size(); ++i) {
    out.regions[i].centroid_x = sx[i] / static_cast<double>(out.regions[i].area);
    out.regions[i].centroid_y = sy[i] / static_cast<double>(out.regions[i].area);
  }
  return out;
}

/// Keeps the component with the greatest area; ties go to the lowest label.
inline BinaryMask largest_component(const BinaryMask& mask,
                                    Connectivity connectivity = Connectivity::eight) {
  const LabelMap lm = label_components(mask, connectivity);
  BinaryMask out(mask.width(), mask.height(), 0);
  if (lm.component_count == 0) return out;
  std::int32_t best = 1;
  for (int i = 1; i < lm.component_count; ++i) {
    if (lm.regions[i].area > lm.regions[best - 1].area) best = i + 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = lm.labels.pixels()[i] == best ? 1 : 0;
  }
  return out;
}

/// Stats of all foreground pixels taken together, or nullopt-like zero area.
inline RegionStats foreground_stats(const BinaryMask& mask) {
  RegionStats r;
  double sx = 0, sy = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      if (r.area == 0) {
        r.min_x = r.max_x = x;
        r.min_y = r.max_y = y;
      } else {
        r.min_x = std::min(r.min_x, x);
        r.max_x = std::max(r.max_x, x);
        r.max_y = y;
      }
      ++r.area;
      sx += x;
      sy += y;
    }
  }
  if (r.area) {
    r.centroid_x = sx / static_cast<double>(r.area);
    r.centroid_y = sy / static_cast<double>(r.area);
  }
  return r;
}

}  // namespace segsem
