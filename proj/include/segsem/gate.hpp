#pragma once

// Three-stage quality gate (confidence, topology, geometry) over scored candidates,
// and the highest-passing-score selection rule.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "segsem/raster.hpp"

namespace segsem {

struct ScoredMask {
  BinaryMask mask;
  double predicted_iou = 0.0;
  std::string candidate_id;
};

struct GateConfig {
  double tau_conf = 0.90;
  double min_area = 1.0;
  double max_area = std::numeric_limits<double>::max();
  double min_aspect = 0.0;
  double max_aspect = std::numeric_limits<double>::max();
  Connectivity connectivity = Connectivity::eight;

  void validate() const {
    if (!(tau_conf >= 0.0 && tau_conf <= 1.0)) throw InvalidArgument("tau_conf must be in [0,1]");
    if (!(min_area <= max_area)) throw InvalidArgument("min_area must be <= max_area");
    if (!(min_aspect <= max_aspect)) throw InvalidArgument("min_aspect must be <= max_aspect");
  }

  /// Geometry ranges around a reference structure: area in [0.5a, 2a], aspect in [0.5r, 2r].
  GateConfig with_geometry_from(const BinaryMask& reference) const {
    GateConfig g = *this;
    const RegionStats r = foreground_stats(reference);
    if (r.area == 0) return g;
    g.min_area = 0.5 * static_cast<double>(r.area);
    g.max_area = 2.0 * static_cast<double>(r.area);
    g.min_aspect = 0.5 * r.aspect();
    g.max_aspect = 2.0 * r.aspect();
    return g;
  }
};

struct GateReport {
  std::string candidate_id;
  double predicted_iou = 0.0;
  bool confidence_pass = false;
  bool topology_pass = false;
  bool geometry_pass = false;
  int component_count = 0;
  std::size_t area = 0;
  double aspect = 0.0;  // bbox width / height of all foreground; 0 for an empty mask
  bool overall_pass = false;
  std::string failure_reason;
};

/// Every check is evaluated even after an earlier one fails.
inline GateReport assess(const ScoredMask& c, const GateConfig& cfg) {
  GateReport r;
  r.candidate_id = c.candidate_id;
  r.predicted_iou = c.predicted_iou;
  r.confidence_pass = std::isfinite(c.predicted_iou) && c.predicted_iou > cfg.tau_conf;

  const LabelMap lm = label_components(c.mask, cfg.connectivity);
  r.component_count = lm.component_count;
  r.topology_pass = lm.component_count == 1;

  const RegionStats fg = foreground_stats(c.mask);
  r.area = fg.area;
  r.aspect = fg.area ? fg.aspect() : 0.0;
  const double area = static_cast<double>(fg.area);
  r.geometry_pass = fg.area > 0 && area >= cfg.min_area && area <= cfg.max_area &&
                    r.aspect >= cfg.min_aspect && r.aspect <= cfg.max_aspect;

  r.overall_pass = r.confidence_pass && r.topology_pass && r.geometry_pass;

  auto add = [&](const std::string& s) {
    if (!r.failure_reason.empty()) r.failure_reason += "; ";
    r.failure_reason += s;
  };
  if (!r.confidence_pass) {
    add("confidence " + std::to_string(c.predicted_iou) + " <= tau " + std::to_string(cfg.tau_conf));
  }
  if (!r.topology_pass) add(std::to_string(lm.component_count) + " components (need 1)");
  if (!r.geometry_pass) {
    if (fg.area == 0) {
      add("empty mask");
    } else {
      if (area < cfg.min_area || area > cfg.max_area) {
        add("area " + std::to_string(fg.area) + " outside [" + std::to_string(cfg.min_area) +
            ", " + std::to_string(cfg.max_area) + "]");
      }
      if (r.aspect < cfg.min_aspect || r.aspect > cfg.max_aspect) {
        add("aspect " + std::to_string(r.aspect) + " outside [" + std::to_string(cfg.min_aspect) +
            ", " + std::to_string(cfg.max_aspect) + "]");
      }
    }
  }
  return r;
}

struct Selection {
  std::optional<std::size_t> index;  // into the candidate list; empty means fall back
  std::vector<GateReport> reports;   // one per candidate, input order
};

/// Highest predicted_iou among passing candidates; ties resolve to the earliest.
inline Selection select_candidate(const std::vector<ScoredMask>& cands, const GateConfig& cfg) {
  Selection s;
  s.reports.reserve(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    s.reports.push_back(assess(cands[i], cfg));
    if (!s.reports.back().overall_pass) continue;
    if (!s.index || cands[i].predicted_iou > cands[*s.index].predicted_iou) s.index = i;
  }
  return s;
}

}  // namespace segsem
