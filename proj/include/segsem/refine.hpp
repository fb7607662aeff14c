#pragma once

// Mask refinement (closing, hole filling) and contour extraction (Sobel edge map
// plus Moore-neighbour boundary tracing).

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "segsem/raster.hpp"

namespace segsem {

enum class ElementShape { square, plus };

struct StructuringElement {
  int side = 3;
  ElementShape shape = ElementShape::square;

  void validate() const {
    if (side < 1 || side % 2 == 0) {
      throw InvalidArgument("structuring element side must be odd and >= 1, got " +
                            std::to_string(side));
    }
  }

  std::vector<Point> offsets() const {
    validate();
    const int r = side / 2;
    std::vector<Point> out;
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (shape == ElementShape::plus && dx != 0 && dy != 0) continue;
        out.push_back({dx, dy});
      }
    }
    return out;
  }
};

inline ElementShape element_shape_from_string(const std::string& s) {
  if (s == "square") return ElementShape::square;
  if (s == "plus") return ElementShape::plus;
  throw InvalidArgument("unknown structuring element shape '" + s + "'");
}

inline std::string to_string(ElementShape s) { return s == ElementShape::plus ? "plus" : "square"; }

/// Off-raster neighbours count as background for both operators.
inline BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se = {}) {
  const auto offs = se.offsets();
  BinaryMask out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      for (const Point& o : offs) {
        if (mask.at_or(x + o.x, y + o.y, 0)) {
          out(x, y) = 1;
          break;
        }
      }
    }
  }
  return out;
}

inline BinaryMask erode(const BinaryMask& mask, const StructuringElement& se = {}) {
  const auto offs = se.offsets();
  BinaryMask out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool all = true;
      for (const Point& o : offs) {
        if (!mask.at_or(x + o.x, y + o.y, 0)) {
          all = false;
          break;
        }
      }
      out(x, y) = all ? 1 : 0;
    }
  }
  return out;
}

inline BinaryMask morph_close(const BinaryMask& mask, const StructuringElement& se = {}) {
  return erode(dilate(mask, se), se);
}

/// Background not 4-connected to the image border becomes foreground.
inline BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  Raster<std::uint8_t> outside(w, h, 0);
  std::vector<Point> stack;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      stack.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr std::array<Point, 4> four{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    for (const Point& d : four) {
      const int nx = p.x + d.x, ny = p.y + d.y;
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }
  BinaryMask out(w, h, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = outside.pixels()[i] ? 0 : 1;
  return out;
}

/// Closing followed by hole filling.
inline BinaryMask refine_mask(const BinaryMask& mask, const StructuringElement& se = {}) {
  return fill_holes(morph_close(mask, se));
}

/// |Gx| + |Gy| with the 3x3 Sobel kernels. Pixels without a full neighbourhood are 0.
template <typename Tag>
GradientMap sobel_magnitude(const Raster<std::uint8_t, Tag>& img) {
  GradientMap out(img.width(), img.height(), 0);
  for (int y = 1; y + 1 < img.height(); ++y) {
    for (int x = 1; x + 1 < img.width(); ++x) {
      auto v = [&](int dx, int dy) { return static_cast<int>(img(x + dx, y + dy)); };
      const int gx = (v(1, -1) + 2 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2 * v(-1, 0) + v(-1, 1));
      const int gy = (v(-1, 1) + 2 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2 * v(0, -1) + v(1, -1));
      out(x, y) = std::abs(gx) + std::abs(gy);
    }
  }
  return out;
}

struct Contour {
  std::vector<Point> points;
  bool closed = true;
};

namespace detail {

// Clockwise in image coordinates (y down), starting west.
inline constexpr std::array<Point, 8> kMoore{
    {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

inline int moore_direction(Point from, Point to) {
  for (int i = 0; i < 8; ++i) {
    if (from.x + kMoore[i].x == to.x && from.y + kMoore[i].y == to.y) return i;
  }
  return -1;
}

/// Foreground pixels that have a background (or off-raster) 8-neighbour.
/// The Sobel response of the 0/255 mask, padded by one background pixel, marks most
/// of them; pixels whose neighbourhood is symmetric (one-pixel lines, isolated pixels)
/// cancel in both kernels and are caught by the direct neighbour test.
inline BinaryMask edge_pixels(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  GrayImage padded(w + 2, h + 2, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) padded(x + 1, y + 1) = mask(x, y) ? 255 : 0;
  const GradientMap grad = sobel_magnitude(padded);
  BinaryMask edges(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      bool edge = grad(x + 1, y + 1) > 0;
      for (int i = 0; i < 8 && !edge; ++i) edge = !mask.at_or(x + kMoore[i].x, y + kMoore[i].y, 0);
      edges(x, y) = edge ? 1 : 0;
    }
  }
  return edges;
}

/// Moore-neighbour tracing. The walk is a deterministic function of the state
/// (pixel, backtrack), so it stops at the first repeated state and returns the cycle.
/// From an outer-boundary start that is Jacobi's rule (re-entering the start from its
/// first backtrack); from other starts the walk can run through a tail first, which
/// is dropped.
///
/// On a diagonal step the corner pixel shared by both ends is emitted when it is
/// foreground, so inner-corner pixels (background only on a diagonal) are part of the
/// contour and consecutive points stay 8-adjacent.
inline Contour moore_trace(const BinaryMask& mask, Point start, Point backtrack) {
  Contour c;
  auto fg = [&](Point p) { return mask.at_or(p.x, p.y, 0) != 0; };
  // first index into c.points for each seen state, -1 if unseen
  std::vector<std::int64_t> seen(mask.size() * 8, -1);
  auto state = [&](Point p, Point b) {
    return (static_cast<std::size_t>(p.y) * static_cast<std::size_t>(mask.width()) +
            static_cast<std::size_t>(p.x)) * 8 + static_cast<std::size_t>(moore_direction(p, b));
  };
  Point p = start;
  Point b = backtrack;
  seen[state(p, b)] = 0;
  c.points.push_back(p);
  for (;;) {
    const int d = moore_direction(p, b);
    std::optional<Point> corner;
    bool moved = false;
    for (int i = 1; i <= 8; ++i) {
      const Point q{p.x + kMoore[(d + i) % 8].x, p.y + kMoore[(d + i) % 8].y};
      if (!fg(q)) continue;
      const Point prev{p.x + kMoore[(d + i - 1) % 8].x, p.y + kMoore[(d + i - 1) % 8].y};
      if (q.x != p.x && q.y != p.y) {
        // the two pixels shared by p and q; prev is one of them and is background
        const Point other = prev == Point{q.x, p.y} ? Point{p.x, q.y} : Point{q.x, p.y};
        if (fg(other)) corner = other;
      }
      p = q;
      b = prev;
      moved = true;
      break;
    }
    if (!moved) break;  // isolated pixel
    if (corner) c.points.push_back(*corner);
    const std::size_t s = state(p, b);
    if (seen[s] >= 0) {
      c.points.erase(c.points.begin(), c.points.begin() + seen[s]);
      // begin the loop at its first pixel in row-major order
      std::rotate(c.points.begin(), std::min_element(c.points.begin(), c.points.end()), c.points.end());
      break;
    }
    seen[s] = static_cast<std::int64_t>(c.points.size());
    c.points.push_back(p);
  }
  return c;
}

}  // namespace detail

/// One closed contour per boundary loop, sorted by starting point (row-major).
///
/// Outer boundaries start at their topmost-then-leftmost pixel and run clockwise.
/// The union of all contour points is exactly the set of foreground pixels with a
/// background 8-neighbour or on the image border; points may repeat within a contour
/// where the boundary doubles back along one-pixel-wide parts.
inline std::vector<Contour> extract_contours(const BinaryMask& mask) {
  const BinaryMask edges = detail::edge_pixels(mask);
  Raster<std::uint8_t> covered(mask.width(), mask.height(), 0);
  std::vector<Contour> out;
  auto bg = [&](int x, int y) { return !mask.at_or(x, y, 0); };
  // loops start only at pixels with a 4-adjacent background pixel to backtrack into
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!edges(x, y) || covered(x, y)) continue;
      std::optional<Point> back;
      for (int i : {0, 2, 4, 6}) {
        const Point q{x + detail::kMoore[i].x, y + detail::kMoore[i].y};
        if (bg(q.x, q.y)) {
          back = q;
          break;
        }
      }
      if (!back) continue;
      Contour c = detail::moore_trace(mask, {x, y}, *back);
      // a walk that ran into an already traced loop adds nothing new
      bool fresh = false;
      for (const Point& p : c.points) fresh |= !covered(p.x, p.y);
      if (!fresh) continue;
      for (const Point& p : c.points) covered(p.x, p.y) = 1;
      out.push_back(std::move(c));
    }
  }
  // edge pixels no loop passed through become single-point loops
  std::vector<Contour> extra;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (edges(x, y) && !covered(x, y)) extra.push_back({{{x, y}}, true});
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Contour& a, const Contour& b) { return a.points[0] < b.points[0]; });
  return out;
}

/// Distinct contour points in row-major order.
inline std::vector<Point> boundary_points(const std::vector<Contour>& contours, int width,
                                          int height) {
  Raster<std::uint8_t> seen(width, height, 0);
  for (const Contour& c : contours)
    for (const Point& p : c.points) seen(p.x, p.y) = 1;
  std::vector<Point> out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (seen(x, y)) out.push_back({x, y});
  return out;
}

inline std::vector<Point> boundary_points(const BinaryMask& mask) {
  return boundary_points(extract_contours(mask), mask.width(), mask.height());
}

}  // namespace segsem
