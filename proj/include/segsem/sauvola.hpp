#pragma once

// Sauvola adaptive thresholding and the fallback mask extractor built on it.

#include <cmath>
#include <string>
#include <string_view>

#include "segsem/raster.hpp"

namespace segsem {

enum class Polarity { bright_foreground, dark_foreground, automatic };

inline std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::bright_foreground: return "bright_foreground";
    case Polarity::dark_foreground: return "dark_foreground";
    case Polarity::automatic: return "auto";
  }
  return "auto";
}

inline Polarity polarity_from_string(std::string_view s) {
  if (s == "bright_foreground" || s == "bright") return Polarity::bright_foreground;
  if (s == "dark_foreground" || s == "dark") return Polarity::dark_foreground;
  if (s == "auto" || s == "automatic") return Polarity::automatic;
  throw InvalidArgument("unknown polarity '" + std::string(s) + "'");
}

struct SauvolaParams {
  int window = 31;  // odd side length
  double k = 0.2;
  double r_dynamic = 128.0;
  Polarity polarity = Polarity::automatic;

  void validate() const {
    if (window < 3 || window % 2 == 0) {
      throw InvalidArgument("sauvola window must be odd and >= 3, got " + std::to_string(window));
    }
    if (!(r_dynamic > 0.0)) throw InvalidArgument("sauvola r_dynamic must be > 0");
    if (!std::isfinite(k)) throw InvalidArgument("sauvola k must be finite");
  }
};

/// T = m * (1 + k * (s / R - 1)).
inline double sauvola_threshold(double mean, double stddev, double k, double r_dynamic) noexcept {
  return mean * (1.0 + k * (stddev / r_dynamic - 1.0));
}

inline BinaryMask sauvola_mask(const GrayImage& img, const SauvolaParams& p = {}) {
  p.validate();
  const IntegralImage ii(img);
  const int radius = p.window / 2;
  const bool dark = p.polarity == Polarity::dark_foreground;
  BinaryMask out(img.width(), img.height(), 0);
  std::size_t fg = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const WindowMoments m = window_moments(ii, x, y, radius);
      const double t = sauvola_threshold(m.mean(), m.stddev(), p.k, p.r_dynamic);
      const double v = img(x, y);
      const bool on = dark ? v < t : v > t;
      out(x, y) = on ? 1 : 0;
      fg += on;
    }
  }
  // foreground is taken to be the minority structure
  if (p.polarity == Polarity::automatic && 2 * fg > out.size()) out = invert(out);
  return out;
}

/// Sauvola mask reduced to its largest 8-connected component. Never empty: an image that
/// thresholds to nothing yields the first maximum-intensity pixel in row-major order.
inline BinaryMask fallback_extract(const GrayImage& img, const SauvolaParams& p = {}) {
  BinaryMask mask = largest_component(sauvola_mask(img, p), Connectivity::eight);
  if (foreground_count(mask) > 0) return mask;
  int bx = 0, by = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img(x, y) > img(bx, by)) {
        bx = x;
        by = y;
      }
    }
  }
  mask(bx, by) = 1;
  return mask;
}

}  // namespace segsem
