#pragma once

// Candidate providers: sources of scored masks standing in front of the gate.
//
// Interchange file `<image_id>.candidates.json`:
//   {"schema_version": 1, "image_id": "...",
//    "candidates": [{"mask_path": "relative/to/this/dir.pgm", "predicted_iou": 0.93}, ...]}
// Masks are 0/255 P5 PGMs with the image's dimensions.

#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segsem/gate.hpp"
#include "segsem/metrics.hpp"
#include "segsem/pgm.hpp"
#include "segsem/refine.hpp"
#include "segsem/rng.hpp"
#include "segsem/synth.hpp"

namespace segsem {

inline constexpr int kCandidateSchemaVersion = 1;

class CandidateProvider {
 public:
  virtual ~CandidateProvider() = default;
  /// Deterministic for a given provider state; safe to call concurrently.
  virtual std::vector<ScoredMask> candidates_for(const std::string& image_id,
                                                 const GrayImage& img) const = 0;
  virtual std::string name() const = 0;
};

class NullProvider final : public CandidateProvider {
 public:
  std::vector<ScoredMask> candidates_for(const std::string&, const GrayImage&) const override {
    return {};
  }
  std::string name() const override { return "null"; }
};

// ---------------------------------------------------------------------------
// Directory provider

inline std::filesystem::path candidates_manifest_path(const std::filesystem::path& root,
                                                      const std::string& image_id) {
  return root / (image_id + ".candidates.json");
}

/// Writes one interchange manifest plus its mask files (`<image_id>.cand<i>.pgm`).
inline std::filesystem::path write_candidates(const std::filesystem::path& root,
                                              const std::string& image_id,
                                              const std::vector<ScoredMask>& cands) {
  ensure_directory(root);
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::string file = image_id + ".cand" + std::to_string(i) + ".pgm";
    pgm::write_mask(root / file, cands[i].mask);
    list.push_back({{"mask_path", file}, {"predicted_iou", cands[i].predicted_iou}});
  }
  const nlohmann::json doc = {{"schema_version", kCandidateSchemaVersion},
                              {"image_id", image_id},
                              {"candidates", std::move(list)}};
  const auto path = candidates_manifest_path(root, image_id);
  write_text_file(path, doc.dump(2) + "\n");
  return path;
}

/// Reads `<image_id>.candidates.json`; a missing file means no candidates.
inline std::vector<ScoredMask> read_candidates(const std::filesystem::path& root,
                                               const std::string& image_id, int width, int height) {
  const auto path = candidates_manifest_path(root, image_id);
  if (!std::filesystem::exists(path)) return {};
  const nlohmann::json doc = read_json_file(path);
  std::vector<ScoredMask> out;
  try {
    if (doc.at("schema_version").get<int>() != kCandidateSchemaVersion) {
      throw IoError(path.string(), "unsupported schema_version");
    }
    if (doc.at("image_id").get<std::string>() != image_id) {
      throw IoError(path.string(), "image_id does not match file name");
    }
    for (const auto& c : doc.at("candidates")) {
      const auto mask_file = root / c.at("mask_path").get<std::string>();
      ScoredMask m;
      m.mask = pgm::read_mask(mask_file);
      if (m.mask.width() != width || m.mask.height() != height) {
        throw IoError(mask_file.string(), "candidate mask is " + std::to_string(m.mask.width()) +
                                              "x" + std::to_string(m.mask.height()) +
                                              ", image is " + std::to_string(width) + "x" +
                                              std::to_string(height));
      }
      m.predicted_iou = c.at("predicted_iou").get<double>();
      if (!std::isfinite(m.predicted_iou) || m.predicted_iou < 0.0 || m.predicted_iou > 1.0) {
        throw IoError(path.string(), "predicted_iou outside [0,1]");
      }
      m.candidate_id = std::to_string(out.size()) + ":" + c.at("mask_path").get<std::string>();
      out.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string(), std::string("malformed candidate manifest: ") + e.what());
  }
  return out;
}

class DirectoryProvider final : public CandidateProvider {
 public:
  explicit DirectoryProvider(std::filesystem::path root) : root_(std::move(root)) {}

  std::vector<ScoredMask> candidates_for(const std::string& image_id,
                                         const GrayImage& img) const override {
    return read_candidates(root_, image_id, img.width(), img.height());
  }
  std::string name() const override { return "dir:" + root_.string(); }

 private:
  std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Oracle provider

struct Perturbation {
  enum class Kind { none, erode, dilate, translate, split, flip_noise };
  Kind kind = Kind::none;
  int n = 1;       // erode/dilate iterations, split gap rows
  int dx = 0, dy = 0;
  double p = 0.0;  // flip_noise probability

  std::string describe() const {
    std::ostringstream s;
    switch (kind) {
      case Kind::none: s << "none"; break;
      case Kind::erode: s << "erode(" << n << ")"; break;
      case Kind::dilate: s << "dilate(" << n << ")"; break;
      case Kind::translate: s << "translate(" << dx << "," << dy << ")"; break;
      case Kind::split: s << "split(" << n << ")"; break;
      case Kind::flip_noise: s << "flip_noise(" << p << ")"; break;
    }
    return s.str();
  }

  /// Parses "none", "erode(2)", "dilate(1)", "translate(1,-2)", "split(2)", "flip_noise(0.3)".
  static Perturbation parse(const std::string& text) {
    Perturbation out;
    const auto open = text.find('(');
    const std::string head = text.substr(0, open);
    std::string args;
    if (open != std::string::npos) {
      const auto close = text.find(')', open);
      if (close == std::string::npos || close + 1 != text.size()) {
        throw InvalidArgument("malformed perturbation '" + text + "'");
      }
      args = text.substr(open + 1, close - open - 1);
    }
    auto need_int = [&](const std::string& s) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(s, &used);
      } catch (const std::exception&) {
        used = std::string::npos;
      }
      if (used != s.size()) throw InvalidArgument("bad integer in perturbation '" + text + "'");
      return v;
    };
    if (head == "none") {
      out.kind = Kind::none;
    } else if (head == "erode" || head == "dilate" || head == "split") {
      out.kind = head == "erode" ? Kind::erode : head == "dilate" ? Kind::dilate : Kind::split;
      out.n = need_int(args);
      if (out.n < 1) throw InvalidArgument("perturbation size must be >= 1 in '" + text + "'");
    } else if (head == "translate") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw InvalidArgument("translate needs dx,dy");
      out.kind = Kind::translate;
      out.dx = need_int(args.substr(0, comma));
      out.dy = need_int(args.substr(comma + 1));
    } else if (head == "flip_noise") {
      out.kind = Kind::flip_noise;
      try {
        out.p = std::stod(args);
      } catch (const std::exception&) {
        throw InvalidArgument("bad probability in '" + text + "'");
      }
      if (!(out.p >= 0.0 && out.p <= 1.0)) throw InvalidArgument("flip_noise p must be in [0,1]");
    } else {
      throw InvalidArgument("unknown perturbation '" + text + "'");
    }
    return out;
  }
};

struct OracleConfig {
  std::vector<Perturbation> perturbations{Perturbation{}};
  enum class ScoreMode { true_iou, fixed };
  ScoreMode score_mode = ScoreMode::true_iou;
  double fixed_score = 0.95;
  double fail_probability = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(fail_probability >= 0.0 && fail_probability <= 1.0)) {
      throw InvalidArgument("oracle fail_probability must be in [0,1]");
    }
    if (!(fixed_score >= 0.0 && fixed_score <= 1.0)) {
      throw InvalidArgument("oracle fixed score must be in [0,1]");
    }
  }
};

/// Mask shifted by (dx,dy); pixels leaving the raster are dropped.
inline BinaryMask translate(const BinaryMask& m, int dx, int dy) {
  BinaryMask out(m.width(), m.height(), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y) && out.contains(x + dx, y + dy)) out(x + dx, y + dy) = 1;
  return out;
}

/// Clears `gap` rows through the middle of the foreground bounding box (or columns, when
/// the box is too short); the result always has zero or at least two 8-components.
inline BinaryMask split_mask(const BinaryMask& m, int gap) {
  BinaryMask out = m;
  const RegionStats r = foreground_stats(m);
  if (r.area == 0) return out;
  if (r.bbox_height() >= gap + 2) {
    const int y0 = r.min_y + (r.bbox_height() - gap) / 2;
    for (int y = y0; y < y0 + gap; ++y)
      for (int x = 0; x < m.width(); ++x) out(x, y) = 0;
  } else if (r.bbox_width() >= gap + 2) {
    const int x0 = r.min_x + (r.bbox_width() - gap) / 2;
    for (int x = x0; x < x0 + gap; ++x)
      for (int y = 0; y < m.height(); ++y) out(x, y) = 0;
  } else {
    out = BinaryMask(m.width(), m.height(), 0);
  }
  return out;
}

/// Flips each pixel of the one-pixel band on both sides of the boundary with probability p.
inline BinaryMask flip_boundary_noise(const BinaryMask& m, double p, Rng& rng) {
  BinaryMask out = m;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const std::uint8_t v = m(x, y);
      const bool band = m.at_or(x - 1, y, v) != v || m.at_or(x + 1, y, v) != v ||
                        m.at_or(x, y - 1, v) != v || m.at_or(x, y + 1, v) != v;
      const bool flip = rng.bernoulli(p);  // drawn for every pixel to keep the stream aligned
      if (band && flip) out(x, y) = v ? 0 : 1;
    }
  }
  return out;
}

inline BinaryMask apply_perturbation(const BinaryMask& gt, const Perturbation& pert, Rng& rng) {
  switch (pert.kind) {
    case Perturbation::Kind::none: return gt;
    case Perturbation::Kind::erode: return erode(gt, {2 * pert.n + 1});
    case Perturbation::Kind::dilate: return dilate(gt, {2 * pert.n + 1});
    case Perturbation::Kind::translate: return translate(gt, pert.dx, pert.dy);
    case Perturbation::Kind::split: return split_mask(gt, pert.n);
    case Perturbation::Kind::flip_noise: return flip_boundary_noise(gt, pert.p, rng);
  }
  return gt;
}

/// Stand-in for the segmentation model: perturbs ground truth from a corpus.
class OracleProvider final : public CandidateProvider {
 public:
  OracleProvider(OracleConfig cfg, Corpus corpus) : cfg_(std::move(cfg)), corpus_(std::move(corpus)) {
    cfg_.validate();
  }

  std::vector<ScoredMask> candidates_for(const std::string& image_id,
                                         const GrayImage& img) const override {
    const CorpusRecord* rec = corpus_.find(image_id);
    if (!rec || rec->gt_mask_path.empty()) {
      throw InvalidArgument("oracle provider: no ground truth for image '" + image_id + "'");
    }
    const BinaryMask gt = pgm::read_mask(corpus_.gt_file(*rec));
    require_same_shape(gt, img, "oracle provider");
    return candidates_from_gt(image_id, gt);
  }

  /// Per-image failure is drawn from its own substream before any perturbation
  /// sampling, so editing the perturbation list does not move which images fail.
  std::vector<ScoredMask> candidates_from_gt(const std::string& image_id, const BinaryMask& gt) const {
    const std::uint64_t key = fnv1a(image_id);
    Rng fail_rng(derive_seed(cfg_.seed, key, 0));
    const bool fail = fail_rng.bernoulli(cfg_.fail_probability);
    Rng pert_rng(derive_seed(cfg_.seed, key, 1));

    std::vector<ScoredMask> out;
    for (std::size_t i = 0; i < cfg_.perturbations.size(); ++i) {
      const Perturbation& pert = cfg_.perturbations[i];
      ScoredMask m;
      if (fail) {
        m.mask = split_mask(gt, 2);
        m.candidate_id = std::to_string(i) + ":split(2)";
      } else {
        m.mask = apply_perturbation(gt, pert, pert_rng);
        m.candidate_id = std::to_string(i) + ":" + pert.describe();
      }
      m.predicted_iou =
          cfg_.score_mode == OracleConfig::ScoreMode::true_iou ? iou(m.mask, gt) : cfg_.fixed_score;
      out.push_back(std::move(m));
    }
    return out;
  }

  std::string name() const override { return "oracle"; }
  const OracleConfig& config() const noexcept { return cfg_; }

 private:
  OracleConfig cfg_;
  Corpus corpus_;
};

}  // namespace segsem
