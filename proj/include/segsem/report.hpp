#pragma once

// Per-exposure-case aggregation of batch results and baseline/hybrid comparison.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segsem/error.hpp"

namespace segsem {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Population mean and standard deviation; two-pass for stability.
inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) return {};
  double sum = 0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

struct CaseReport {
  std::string case_id;
  double avg_exposure = 0.0;
  std::size_t sample_count = 0;
  MeanStd iou, precision, recall, f1;
  double avg_wall_time_ms = 0.0;
  std::size_t fallback_used = 0;
};

inline constexpr const char* kMetricNames[] = {"iou", "precision", "recall", "f1"};

inline const MeanStd& metric(const CaseReport& r, int i) {
  switch (i) {
    case 0: return r.iou;
    case 1: return r.precision;
    case 2: return r.recall;
    default: return r.f1;
  }
}

/// Groups successful records by case_id (cases sorted by id). Records without
/// accuracy metrics still count toward timing and fallback usage; cases with no
/// successful records are omitted, with a warning on `warn`.
inline std::vector<CaseReport> aggregate(const std::vector<nlohmann::json>& results,
                                         std::ostream* warn = &std::cerr) {
  struct Acc {
    std::vector<double> exposure, wall, m[4];
    std::size_t ok = 0, fallback = 0, seen = 0;
  };
  std::map<std::string, Acc> by_case;
  for (const auto& r : results) {
    Acc& a = by_case[r.at("case_id").get<std::string>()];
    ++a.seen;
    if (r.value("status", std::string{"ok"}) != "ok") continue;
    ++a.ok;
    if (r.at("source") == "fallback") ++a.fallback;
    a.wall.push_back(r.value("wall_time_ms", 0.0));
    if (r.contains("exposure_score")) a.exposure.push_back(r.at("exposure_score").get<double>());
    if (r.contains("metrics")) {
      for (int i = 0; i < 4; ++i) a.m[i].push_back(r.at("metrics").at(kMetricNames[i]).get<double>());
    }
  }
  std::vector<CaseReport> out;
  for (const auto& [id, a] : by_case) {
    if (a.ok == 0) {
      if (warn) *warn << "warning: case " << id << " has no successful records; omitted\n";
      continue;
    }
    CaseReport c;
    c.case_id = id;
    c.sample_count = a.ok;
    c.avg_exposure = mean_std(a.exposure).mean;
    c.iou = mean_std(a.m[0]);
    c.precision = mean_std(a.m[1]);
    c.recall = mean_std(a.m[2]);
    c.f1 = mean_std(a.m[3]);
    c.avg_wall_time_ms = mean_std(a.wall).mean;
    c.fallback_used = a.fallback;
    out.push_back(c);
  }
  return out;
}

inline nlohmann::json to_json(const CaseReport& c) {
  nlohmann::json j = {{"case_id", c.case_id},
                      {"avg_exposure", c.avg_exposure},
                      {"sample_count", c.sample_count},
                      {"avg_wall_time_ms", c.avg_wall_time_ms},
                      {"fallback_used", c.fallback_used}};
  for (int i = 0; i < 4; ++i) {
    j[kMetricNames[i]] = {{"mean", metric(c, i).mean}, {"std", metric(c, i).std}};
  }
  return j;
}

inline CaseReport case_report_from_json(const nlohmann::json& j) {
  CaseReport c;
  c.case_id = j.at("case_id").get<std::string>();
  c.avg_exposure = j.at("avg_exposure").get<double>();
  c.sample_count = j.at("sample_count").get<std::size_t>();
  c.avg_wall_time_ms = j.at("avg_wall_time_ms").get<double>();
  c.fallback_used = j.at("fallback_used").get<std::size_t>();
  MeanStd* dst[4] = {&c.iou, &c.precision, &c.recall, &c.f1};
  for (int i = 0; i < 4; ++i) {
    dst[i]->mean = j.at(kMetricNames[i]).at("mean").get<double>();
    dst[i]->std = j.at(kMetricNames[i]).at("std").get<double>();
  }
  return c;
}

inline nlohmann::json report_json(const std::vector<CaseReport>& cases) {
  nlohmann::json list = nlohmann::json::array();
  std::size_t total = 0, fallback = 0;
  for (const auto& c : cases) {
    list.push_back(to_json(c));
    total += c.sample_count;
    fallback += c.fallback_used;
  }
  return {{"cases", std::move(list)}, {"total_samples", total}, {"total_fallback_used", fallback}};
}

namespace detail {

inline std::string fmt(const char* f, auto... args) {
  const int n = std::snprintf(nullptr, 0, f, args...);
  std::string out(static_cast<std::size_t>(n > 0 ? n : 0) + 1, '\0');
  std::snprintf(out.data(), out.size(), f, args...);
  out.pop_back();
  return out;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string mean_pm_std(const MeanStd& m) { return fmt("%.3f ±%.3f", m.mean, m.std); }

// "±" is two bytes in UTF-8 but one column wide.
inline std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) line += " | ";
      line += rows[r][i] + std::string(widths[i] - display_width(rows[r][i]), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < widths.size(); ++i) total += widths[i] + (i ? 3 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

}  // namespace detail

/// Aligned text table, one row per case, in the column order
/// Exposure Case | Average Exposure | Number of Samples | IoU | Precision | Recall |
/// F1 Score | Execution Time (ms) | Fallback Used.
inline std::string render_report(const std::vector<CaseReport>& cases) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Exposure Case", "Average Exposure", "Number of Samples", "IoU", "Precision",
                  "Recall", "F1 Score", "Execution Time (ms)", "Fallback Used"});
  for (const auto& c : cases) {
    rows.push_back({c.case_id, detail::fmt("%.1f", c.avg_exposure), std::to_string(c.sample_count),
                    detail::mean_pm_std(c.iou), detail::mean_pm_std(c.precision),
                    detail::mean_pm_std(c.recall), detail::mean_pm_std(c.f1),
                    detail::fmt("%.3f", c.avg_wall_time_ms), std::to_string(c.fallback_used)});
  }
  return detail::render_table(rows);
}

struct ComparisonReport {
  std::vector<std::pair<CaseReport, CaseReport>> cases;  // (baseline, hybrid), matched by case_id
  double improvement[4] = {0, 0, 0, 0};  // iou, precision, recall, f1; relative
  double baseline_pooled[4] = {0, 0, 0, 0};
  double hybrid_pooled[4] = {0, 0, 0, 0};
};

/// Relative improvement of the unweighted mean of per-case means, over cases present
/// in both runs. A zero baseline mean gives 0 improvement.
inline ComparisonReport compare(const std::vector<CaseReport>& baseline,
                                const std::vector<CaseReport>& hybrid) {
  ComparisonReport out;
  for (const auto& b : baseline) {
    for (const auto& h : hybrid) {
      if (h.case_id == b.case_id) out.cases.emplace_back(b, h);
    }
  }
  if (out.cases.empty()) throw InvalidArgument("compare: baseline and hybrid share no case ids");
  for (int i = 0; i < 4; ++i) {
    double bs = 0, hs = 0;
    for (const auto& [b, h] : out.cases) {
      bs += metric(b, i).mean;
      hs += metric(h, i).mean;
    }
    const double n = static_cast<double>(out.cases.size());
    out.baseline_pooled[i] = bs / n;
    out.hybrid_pooled[i] = hs / n;
    out.improvement[i] =
        out.baseline_pooled[i] == 0.0 ? 0.0 : (out.hybrid_pooled[i] - out.baseline_pooled[i]) / out.baseline_pooled[i];
  }
  return out;
}

inline std::string render_comparison(const ComparisonReport& cmp) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Exposure Case", "Average Exposure", "Number of Samples",
                  "IoU (Baseline / Hybrid)", "Precision (Baseline / Hybrid)",
                  "Recall (Baseline / Hybrid)", "F1 Score (Baseline / Hybrid)",
                  "Execution Time (ms)", "Fallback Used"});
  for (const auto& [b, h] : cmp.cases) {
    std::vector<std::string> row{h.case_id, detail::fmt("%.1f", h.avg_exposure),
                                 std::to_string(h.sample_count)};
    for (int i = 0; i < 4; ++i) {
      row.push_back(detail::mean_pm_std(metric(b, i)) + " / " + detail::mean_pm_std(metric(h, i)));
    }
    row.push_back(detail::fmt("%.3f", h.avg_wall_time_ms));
    row.push_back(std::to_string(h.fallback_used));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> last{"Overall Improvement", "-", "-"};
  for (double imp : cmp.improvement) {
    const char* arrow = imp > 0 ? " ↑" : imp < 0 ? " ↓" : "";
    last.push_back(detail::fmt("%.2f%%", 100.0 * imp) + arrow);
  }
  double wall = 0;
  for (const auto& [b, h] : cmp.cases) wall += h.avg_wall_time_ms;
  last.push_back(detail::fmt("%.3f", wall / static_cast<double>(cmp.cases.size())));
  last.push_back("-");
  rows.push_back(std::move(last));
  return detail::render_table(rows);
}

inline nlohmann::json comparison_json(const ComparisonReport& cmp) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& [b, h] : cmp.cases) cases.push_back({{"baseline", to_json(b)}, {"hybrid", to_json(h)}});
  nlohmann::json overall;
  for (int i = 0; i < 4; ++i) {
    overall[kMetricNames[i]] = {{"baseline", cmp.baseline_pooled[i]},
                                {"hybrid", cmp.hybrid_pooled[i]},
                                {"relative_improvement", cmp.improvement[i]}};
  }
  return {{"cases", std::move(cases)}, {"overall", std::move(overall)}};
}

}  // namespace segsem
