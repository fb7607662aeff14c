#pragma once

// Synthetic SEM corpus: layout rasterization, SEM-like rendering and the on-disk
// corpus manifest.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "segsem/pgm.hpp"
#include "segsem/raster.hpp"
#include "segsem/rng.hpp"

namespace segsem {

struct RectShape {
  int x = 0, y = 0, w = 0, h = 0;
};

struct PolygonShape {
  struct Vertex {
    double x = 0, y = 0;
  };
  std::vector<Vertex> vertices;
};

using Shape = std::variant<RectShape, PolygonShape>;

struct LayoutSpec {
  int width = 64;
  int height = 64;
  std::vector<Shape> shapes;

  void validate() const {
    if (width < 1 || height < 1) throw InvalidArgument("layout canvas must be at least 1x1");
    auto inside = [&](double x, double y) { return x >= 0 && y >= 0 && x <= width && y <= height; };
    for (const Shape& s : shapes) {
      if (const auto* r = std::get_if<RectShape>(&s)) {
        if (r->w < 0 || r->h < 0 || !inside(r->x, r->y) || !inside(r->x + r->w, r->y + r->h)) {
          throw InvalidArgument("rectangle outside canvas");
        }
      } else {
        const auto& poly = std::get<PolygonShape>(s);
        if (poly.vertices.size() < 3) throw InvalidArgument("polygon needs >= 3 vertices");
        for (const auto& v : poly.vertices) {
          if (!inside(v.x, v.y)) throw InvalidArgument("polygon vertex outside canvas");
        }
      }
    }
  }
};

namespace detail {

inline bool point_in_polygon(const PolygonShape& poly, double px, double py) {
  bool in = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > py) != (v[j].y > py)) {
      const double xc = v[j].x + (py - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (px < xc) in = !in;
    }
  }
  return in;
}

}  // namespace detail

/// A pixel is foreground iff its centre lies inside any shape (even-odd rule for polygons).
inline BinaryMask rasterize(const LayoutSpec& layout) {
  layout.validate();
  BinaryMask mask(layout.width, layout.height, 0);
  for (const Shape& s : layout.shapes) {
    if (const auto* r = std::get_if<RectShape>(&s)) {
      for (int y = r->y; y < r->y + r->h; ++y)
        for (int x = r->x; x < r->x + r->w; ++x) mask(x, y) = 1;
    } else {
      const auto& poly = std::get<PolygonShape>(s);
      for (int y = 0; y < layout.height; ++y)
        for (int x = 0; x < layout.width; ++x)
          if (detail::point_in_polygon(poly, x + 0.5, y + 0.5)) mask(x, y) = 1;
    }
  }
  return mask;
}

struct SynthParams {
  int fg_level = 70;
  int bg_level = 150;
  double bloom_gain = 40.0;   // intensity added on foreground boundary pixels
  double blur_sigma = 1.0;    // pixels
  double noise_sigma = 10.0;  // intensity units before exposure scaling
  double exposure_gain = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (fg_level < 0 || fg_level > 255 || bg_level < 0 || bg_level > 255) {
      throw InvalidArgument("fg_level and bg_level must be in [0,255]");
    }
    if (fg_level == bg_level) throw InvalidArgument("fg_level must differ from bg_level");
    if (!std::isfinite(bloom_gain) || bloom_gain < 0) throw InvalidArgument("bloom_gain must be >= 0");
    if (!std::isfinite(blur_sigma) || blur_sigma < 0) throw InvalidArgument("blur_sigma must be >= 0");
    if (!std::isfinite(noise_sigma) || noise_sigma < 0) throw InvalidArgument("noise_sigma must be >= 0");
    if (!std::isfinite(exposure_gain) || exposure_gain <= 0) {
      throw InvalidArgument("exposure_gain must be > 0");
    }
  }
};

inline void to_json(nlohmann::json& j, const SynthParams& p) {
  j = {{"fg_level", p.fg_level},         {"bg_level", p.bg_level},
       {"bloom_gain", p.bloom_gain},     {"blur_sigma", p.blur_sigma},
       {"noise_sigma", p.noise_sigma},   {"exposure_gain", p.exposure_gain},
       {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, SynthParams& p) {
  SynthParams d;
  p.fg_level = j.value("fg_level", d.fg_level);
  p.bg_level = j.value("bg_level", d.bg_level);
  p.bloom_gain = j.value("bloom_gain", d.bloom_gain);
  p.blur_sigma = j.value("blur_sigma", d.blur_sigma);
  p.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  p.exposure_gain = j.value("exposure_gain", d.exposure_gain);
  p.seed = j.value("seed", d.seed);
}

namespace detail {

inline constexpr int kFixedShift = 8;  // intensities carried in 1/256 units during blur
inline constexpr int kKernelShift = 16;

/// Integer Gaussian taps summing exactly to 1 << kKernelShift.
inline std::vector<std::int64_t> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> g(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    g[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += g[i + radius];
  }
  std::vector<std::int64_t> taps(g.size());
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    taps[i] = std::llround(g[i] / total * (1 << kKernelShift));
    acc += taps[i];
  }
  taps[radius] += (std::int64_t{1} << kKernelShift) - acc;
  return taps;
}

inline void blur_pass(std::vector<std::int64_t>& v, int w, int h, const std::vector<std::int64_t>& taps,
                      bool horizontal) {
  const int radius = static_cast<int>(taps.size() / 2);
  std::vector<std::int64_t> out(v.size());
  const std::int64_t half = std::int64_t{1} << (kKernelShift - 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int64_t acc = 0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = horizontal ? std::clamp(x + k, 0, w - 1) : x;
        const int sy = horizontal ? y : std::clamp(y + k, 0, h - 1);
        acc += taps[k + radius] * v[static_cast<std::size_t>(sy) * w + sx];
      }
      out[static_cast<std::size_t>(y) * w + x] = (acc + half) >> kKernelShift;
    }
  }
  v.swap(out);
}

}  // namespace detail

/// Renders an SEM-like image from a ground-truth mask.
///
/// Steps: base levels; bloom on foreground pixels with a background 4-neighbour;
/// separable Gaussian blur (radius ceil(3 sigma), integer taps, edge replication);
/// additive Gaussian noise from Rng(seed), one deviate per pixel in row-major order;
/// multiply by exposure_gain; clamp to [0,255]; round half up.
inline GrayImage render_sem(const BinaryMask& gt, const SynthParams& p) {
  p.validate();
  const int w = gt.width(), h = gt.height();
  std::vector<std::int64_t> v(gt.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double level = gt(x, y) ? p.fg_level : p.bg_level;
      if (gt(x, y)) {
        const bool boundary = (gt.contains(x - 1, y) && !gt(x - 1, y)) ||
                              (gt.contains(x + 1, y) && !gt(x + 1, y)) ||
                              (gt.contains(x, y - 1) && !gt(x, y - 1)) ||
                              (gt.contains(x, y + 1) && !gt(x, y + 1));
        if (boundary) level += p.bloom_gain;
      }
      v[static_cast<std::size_t>(y) * w + x] = std::llround(level * (1 << detail::kFixedShift));
    }
  }
  if (p.blur_sigma > 0) {
    const auto taps = detail::gaussian_taps(p.blur_sigma);
    detail::blur_pass(v, w, h, taps, true);
    detail::blur_pass(v, w, h, taps, false);
  }
  Rng rng(p.seed);
  GrayImage img(w, h);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double val = static_cast<double>(v[i]) / (1 << detail::kFixedShift);
    val += p.noise_sigma * rng.normal();
    val *= p.exposure_gain;
    val = std::clamp(val, 0.0, 255.0);
    img.pixels()[i] = static_cast<std::uint8_t>(std::floor(val + 0.5));
  }
  return img;
}

/// Random Manhattan-style test pattern: a rectangle, an L, a T or a slanted quad,
/// kept at least `margin` pixels away from the canvas border.
inline LayoutSpec random_layout(Rng& rng, int width = 64, int height = 64, int margin = 8) {
  LayoutSpec layout{width, height, {}};
  const int span_x = width - 2 * margin;
  const int span_y = height - 2 * margin;
  const int kind = static_cast<int>(rng.uniform_int(0, 3));
  const int w = static_cast<int>(rng.uniform_int(span_x * 5 / 8, span_x));
  const int h = static_cast<int>(rng.uniform_int(span_y * 5 / 8, span_y));
  const int x0 = margin + static_cast<int>(rng.uniform_int(0, span_x - w));
  const int y0 = margin + static_cast<int>(rng.uniform_int(0, span_y - h));
  const int arm = static_cast<int>(rng.uniform_int(std::max(6, w / 3), std::max(6, w / 2)));
  switch (kind) {
    case 0:
      layout.shapes.push_back(RectShape{x0, y0, w, h});
      break;
    case 1:  // L: vertical bar plus horizontal foot
      layout.shapes.push_back(RectShape{x0, y0, arm, h});
      layout.shapes.push_back(RectShape{x0, y0 + h - arm, w, arm});
      break;
    case 2:  // T: horizontal head plus vertical stem
      layout.shapes.push_back(RectShape{x0, y0, w, arm});
      layout.shapes.push_back(RectShape{x0 + (w - arm) / 2, y0, arm, h});
      break;
    default: {
      const double skew = static_cast<double>(rng.uniform_int(2, std::max(2, w / 4)));
      PolygonShape quad;
      quad.vertices = {{x0 + skew, double(y0)},
                       {double(x0 + w), double(y0)},
                       {x0 + w - skew, double(y0 + h)},
                       {double(x0), double(y0 + h)}};
      layout.shapes.push_back(std::move(quad));
      break;
    }
  }
  return layout;
}

// ---------------------------------------------------------------------------
// Corpus manifest

inline constexpr int kCorpusSchemaVersion = 1;

struct CorpusRecord {
  std::string id;
  std::string case_id;
  std::string image_path;    // relative to the manifest directory
  std::string gt_mask_path;  // relative to the manifest directory
  SynthParams params;
};

struct Corpus {
  std::filesystem::path root;  // directory containing manifest.json
  std::vector<CorpusRecord> records;

  std::filesystem::path image_file(const CorpusRecord& r) const { return root / r.image_path; }
  std::filesystem::path gt_file(const CorpusRecord& r) const { return root / r.gt_mask_path; }

  const CorpusRecord* find(const std::string& id) const {
    for (const auto& r : records)
      if (r.id == id) return &r;
    return nullptr;
  }
};

inline std::string case_label(std::size_t case_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case%02zu", case_index + 1);
  return buf;
}

inline std::string sample_id(std::size_t case_index, std::size_t sample_index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "c%02zu_s%03zu", case_index + 1, sample_index);
  return buf;
}

inline nlohmann::json manifest_json(const std::vector<CorpusRecord>& records) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"id", r.id},
                    {"case_id", r.case_id},
                    {"image_path", r.image_path},
                    {"gt_mask_path", r.gt_mask_path},
                    {"params", r.params}});
  }
  return {{"schema_version", kCorpusSchemaVersion}, {"records", std::move(recs)}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
}

/// Per-sample variation around a case's parameters, as relative half-ranges:
/// noise_sigma, blur_sigma and bloom_gain are each scaled by 1 + a * U(-1, 1).
struct SampleJitter {
  double noise = 0.0;
  double blur = 0.0;
  double bloom = 0.0;

  SynthParams apply(SynthParams p, std::uint64_t sample_seed) const {
    Rng rng(derive_seed(sample_seed, 0x717u));
    auto scale = [&](double a) { return 1.0 + a * (2.0 * rng.uniform() - 1.0); };
    p.noise_sigma = std::max(0.0, p.noise_sigma * scale(noise));
    p.blur_sigma = std::max(0.0, p.blur_sigma * scale(blur));
    p.bloom_gain = std::max(0.0, p.bloom_gain * scale(bloom));
    return p;
  }
};

/// Writes images/, masks/ and manifest.json under `out_dir`. Sample j of case i uses
/// layouts[j % layouts.size()] and seed derive_seed(seed, i, j), so any sample can be
/// regenerated on its own from its manifest record. Returns the manifest path.
inline std::filesystem::path make_corpus(const std::filesystem::path& out_dir,
                                         const std::vector<LayoutSpec>& layouts,
                                         const std::vector<SynthParams>& cases,
                                         std::size_t samples_per_case, std::uint64_t seed,
                                         const SampleJitter& jitter = {}) {
  if (layouts.empty()) throw InvalidArgument("make_corpus: no layouts");
  if (cases.empty()) throw InvalidArgument("make_corpus: no cases");
  if (samples_per_case < 1) throw InvalidArgument("make_corpus: samples_per_case must be >= 1");
  for (const auto& c : cases) c.validate();

  ensure_directory(out_dir / "images");
  ensure_directory(out_dir / "masks");

  std::vector<BinaryMask> gts;
  gts.reserve(layouts.size());
  for (const auto& l : layouts) gts.push_back(rasterize(l));

  std::vector<CorpusRecord> records;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    for (std::size_t si = 0; si < samples_per_case; ++si) {
      CorpusRecord r;
      r.id = sample_id(ci, si);
      r.case_id = case_label(ci);
      r.image_path = "images/" + r.id + ".pgm";
      r.gt_mask_path = "masks/" + r.id + ".gt.pgm";
      const std::uint64_t sample_seed = derive_seed(seed, ci, si);
      r.params = jitter.apply(cases[ci], sample_seed);
      r.params.seed = sample_seed;
      const BinaryMask& gt = gts[si % gts.size()];
      pgm::write_image(out_dir / r.image_path, render_sem(gt, r.params));
      pgm::write_mask(out_dir / r.gt_mask_path, gt);
      records.push_back(std::move(r));
    }
  }
  const auto manifest = out_dir / "manifest.json";
  write_text_file(manifest, manifest_json(records).dump(2) + "\n");
  return manifest;
}

/// Accepts either a manifest path or the directory holding manifest.json.
inline Corpus load_corpus(const std::filesystem::path& path) {
  const auto manifest = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const nlohmann::json j = read_json_file(manifest);
  Corpus c;
  c.root = manifest.parent_path();
  try {
    if (j.at("schema_version").get<int>() != kCorpusSchemaVersion) {
      throw IoError(manifest.string(), "unsupported schema_version");
    }
    for (const auto& r : j.at("records")) {
      CorpusRecord rec;
      rec.id = r.at("id").get<std::string>();
      rec.case_id = r.at("case_id").get<std::string>();
      rec.image_path = r.at("image_path").get<std::string>();
      rec.gt_mask_path = r.value("gt_mask_path", std::string{});
      if (r.contains("params")) rec.params = r.at("params").get<SynthParams>();
      c.records.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(manifest.string(), std::string("malformed manifest: ") + e.what());
  }
  return c;
}

/// Ground-truth masks were built from a list of layouts; this regenerates the
/// layout list the CLI uses for a given seed.
inline std::vector<LayoutSpec> random_layouts(std::size_t count, std::uint64_t seed, int width = 64,
                                              int height = 64) {
  Rng rng(derive_seed(seed, 0x1A70u));
  std::vector<LayoutSpec> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_layout(rng, width, height));
  return out;
}

/// Exposure cases of increasing gain and noise. Structures are darker than the
/// substrate and carry a bright edge bloom.
inline std::vector<SynthParams> default_cases(std::size_t count = 10) {
  std::vector<SynthParams> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
    SynthParams p;
    p.fg_level = 70;
    p.bg_level = 150;
    p.bloom_gain = 45.0;
    p.exposure_gain = 0.8 + 0.7 * t;
    p.blur_sigma = 1.0 + 0.5 * static_cast<double>(i % 3) / 2.0;
    p.noise_sigma = 12.0 + 18.0 * t;
    out.push_back(p);
  }
  return out;
}

}  // namespace segsem
