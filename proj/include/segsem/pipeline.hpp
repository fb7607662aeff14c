#pragma once

// Hybrid contour extraction: candidates -> gate -> (selected | Sauvola fallback)
// -> closing + hole filling -> contour tracing; plus the batch runner.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "segsem/backend.hpp"
#include "segsem/gate.hpp"
#include "segsem/metrics.hpp"
#include "segsem/refine.hpp"
#include "segsem/sauvola.hpp"
#include "segsem/synth.hpp"

namespace segsem {

struct PipelineConfig {
  GateConfig gate;
  bool gate_geometry_from_gt = true;  // derive area/aspect ranges from ground truth when present
  SauvolaParams sauvola;
  StructuringElement se;
  int workers = 1;

  void validate() const {
    gate.validate();
    sauvola.validate();
    se.validate();
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
  }
};

enum class MaskSource { sam2, fallback };

inline std::string to_string(MaskSource s) { return s == MaskSource::sam2 ? "sam2" : "fallback"; }

struct PipelineResult {
  std::string image_id;
  MaskSource source = MaskSource::fallback;
  BinaryMask final_mask;
  std::vector<Contour> contours;
  std::vector<GateReport> gate_reports;
  std::optional<std::string> selected_candidate_id;
  double wall_time_ms = 0.0;
};

/// `gt` only narrows the gate's geometry ranges (when configured); it never feeds the
/// mask itself.
inline PipelineResult process_image(const std::string& image_id, const GrayImage& img,
                                    const PipelineConfig& cfg, const CandidateProvider& provider,
                                    const BinaryMask* gt = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult r;
  r.image_id = image_id;

  std::vector<ScoredMask> cands;
  try {
    cands = provider.candidates_for(image_id, img);
  } catch (const Error& e) {
    throw Error("image '" + image_id + "': " + e.what());
  }

  const GateConfig gate =
      gt && cfg.gate_geometry_from_gt ? cfg.gate.with_geometry_from(*gt) : cfg.gate;
  Selection sel = select_candidate(cands, gate);
  r.gate_reports = std::move(sel.reports);

  BinaryMask chosen;
  if (sel.index) {
    r.source = MaskSource::sam2;
    r.selected_candidate_id = cands[*sel.index].candidate_id;
    chosen = std::move(cands[*sel.index].mask);
  } else {
    r.source = MaskSource::fallback;
    chosen = fallback_extract(img, cfg.sauvola);
  }

  r.final_mask = refine_mask(chosen, cfg.se);
  // closing can erase a mask that hugs the border; fall back to the unrefined mask
  if (foreground_count(r.final_mask) == 0) r.final_mask = fill_holes(chosen);
  r.contours = extract_contours(r.final_mask);

  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const GateReport& g) {
  return {{"candidate_id", g.candidate_id},
          {"predicted_iou", g.predicted_iou},
          {"confidence_pass", g.confidence_pass},
          {"topology_pass", g.topology_pass},
          {"geometry_pass", g.geometry_pass},
          {"component_count", g.component_count},
          {"area", g.area},
          {"aspect", g.aspect},
          {"overall_pass", g.overall_pass},
          {"failure_reason", g.failure_reason}};
}

inline nlohmann::json contours_json(const std::string& image_id, const std::vector<Contour>& cs) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Point& p : cs[i].points) pts.push_back({p.x, p.y});
    list.push_back({{"id", i}, {"closed", cs[i].closed}, {"points", std::move(pts)}});
  }
  return {{"image_id", image_id}, {"contours", std::move(list)}};
}

inline std::vector<Contour> contours_from_json(const nlohmann::json& j) {
  std::vector<Contour> out;
  for (const auto& c : j.at("contours")) {
    Contour k;
    k.closed = c.at("closed").get<bool>();
    for (const auto& p : c.at("points")) k.points.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    out.push_back(std::move(k));
  }
  return out;
}

struct ImageMetrics {
  double iou = 0, precision = 0, recall = 0, f1 = 0, mean_epe = 0, max_epe = 0;
};

inline ImageMetrics evaluate(const BinaryMask& pred, const BinaryMask& gt) {
  const ConfusionCounts c = confusion(pred, gt);
  const EpeResult e = mask_epe(pred, gt);
  return {segsem::iou(c), segsem::precision(c), segsem::recall(c), segsem::f1(c), e.mean_epe,
          e.max_epe};
}

struct BatchSummary {
  std::size_t images = 0;
  std::size_t processed = 0;
  std::size_t failed = 0;
  std::size_t fallback_count = 0;
  std::size_t empty_contours = 0;
  std::optional<double> mean_iou;
  double batch_wall_time_ms = 0.0;
  std::filesystem::path results_path;
};

/// Processes every manifest record and writes, under `out_dir`:
///   results.jsonl (one record per image, manifest order), batch.json,
///   masks/<id>.final.pgm and contours/<id>.contours.json.
/// Unreadable samples become records with status "failed"; the batch continues.
inline BatchSummary run_batch(const Corpus& corpus, const PipelineConfig& cfg,
                              const CandidateProvider& provider, bool gt_available,
                              const std::filesystem::path& out_dir) {
  cfg.validate();
  ensure_directory(out_dir / "masks");
  ensure_directory(out_dir / "contours");

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = corpus.records.size();
  std::vector<nlohmann::json> records(n);

  auto work = [&](std::size_t i) {
    const CorpusRecord& rec = corpus.records[i];
    nlohmann::json out = {{"image_id", rec.id}, {"case_id", rec.case_id}};
    try {
      const GrayImage img = pgm::read_image(corpus.image_file(rec));
      std::optional<BinaryMask> gt;
      if (gt_available) {
        if (rec.gt_mask_path.empty()) throw IoError(rec.id, "record has no ground-truth mask");
        gt = pgm::read_mask(corpus.gt_file(rec));
        require_same_shape(*gt, img, "ground truth");
      }
      const PipelineResult res = process_image(rec.id, img, cfg, provider, gt ? &*gt : nullptr);

      const std::string mask_rel = "masks/" + rec.id + ".final.pgm";
      const std::string contour_rel = "contours/" + rec.id + ".contours.json";
      pgm::write_mask(out_dir / mask_rel, res.final_mask);
      write_text_file(out_dir / contour_rel, contours_json(rec.id, res.contours).dump() + "\n");

      nlohmann::json reports = nlohmann::json::array();
      for (const auto& g : res.gate_reports) reports.push_back(to_json(g));
      out["status"] = "ok";
      out["source"] = to_string(res.source);
      if (res.selected_candidate_id) out["selected_candidate_id"] = *res.selected_candidate_id;
      out["gate_reports"] = std::move(reports);
      out["contour_count"] = res.contours.size();
      out["exposure_score"] = exposure_score(img);
      if (gt) {
        const ImageMetrics m = evaluate(res.final_mask, *gt);
        out["metrics"] = {{"iou", m.iou},         {"precision", m.precision},
                          {"recall", m.recall},   {"f1", m.f1},
                          {"mean_epe", m.mean_epe}, {"max_epe", m.max_epe}};
      }
      out["wall_time_ms"] = res.wall_time_ms;
      out["contour_path"] = contour_rel;
      out["mask_path"] = mask_rel;
    } catch (const std::exception& e) {
      out["status"] = "failed";
      out["error"] = e.what();
    }
    records[i] = std::move(out);
  };

  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
  }

  BatchSummary s;
  s.images = n;
  s.results_path = out_dir / "results.jsonl";
  std::string lines;
  double iou_sum = 0;
  std::size_t iou_n = 0;
  for (const auto& r : records) {
    lines += r.dump() + "\n";
    if (r.at("status") != "ok") {
      ++s.failed;
      continue;
    }
    ++s.processed;
    if (r.at("source") == "fallback") ++s.fallback_count;
    if (r.at("contour_count").get<std::size_t>() == 0) ++s.empty_contours;
    if (r.contains("metrics")) {
      iou_sum += r.at("metrics").at("iou").get<double>();
      ++iou_n;
    }
  }
  if (iou_n) s.mean_iou = iou_sum / static_cast<double>(iou_n);
  write_text_file(s.results_path, lines);
  s.batch_wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json batch = {{"provider", provider.name()},
                          {"images", s.images},
                          {"processed", s.processed},
                          {"failed", s.failed},
                          {"fallback_count", s.fallback_count},
                          {"batch_wall_time_ms", s.batch_wall_time_ms}};
  if (s.mean_iou) batch["mean_iou"] = *s.mean_iou;
  write_text_file(out_dir / "batch.json", batch.dump(2) + "\n");
  return s;
}

inline std::vector<nlohmann::json> read_results(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "results.jsonl" : path;
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "cannot open for reading");
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(file.string(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace segsem
