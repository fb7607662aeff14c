#pragma once

// segsem command-line front end: synth | run | report | compare | gate-debug.
// Exit codes: 0 success, 2 usage error, 3 I/O or environment error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "segsem/segsem.hpp"

namespace segsem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr std::uint64_t kDefaultSeed = 7;

namespace fs = std::filesystem;

struct SynthOpts {
  std::string out;
  std::size_t cases = 10;
  std::size_t samples = 50;
  std::size_t layouts = 10;
  int width = 64, height = 64;
  std::uint64_t seed = kDefaultSeed;
  std::string cases_file;
  double jitter = 0.7;
};

struct RunOpts {
  std::string corpus, out, provider, config;
  std::uint64_t seed = kDefaultSeed;
  bool seed_set = false;
  int workers = 0;
  bool no_gt = false;
  double fail_prob = -1;
  std::vector<std::string> perturb;
  std::string score;
  double tau_conf = -1;
};

struct ReportOpts {
  std::string results, out;
};

struct CompareOpts {
  std::string baseline, hybrid, out = ".";
};

struct GateDebugOpts {
  std::string image, image_id, candidates, gt, config;
  double tau_conf = -1;
};

inline int cmd_synth(const SynthOpts& o, std::ostream& os) {
  if (o.samples < 1 || o.cases < 1 || o.layouts < 1) {
    throw InvalidArgument("--cases, --samples and --layouts must be >= 1");
  }
  std::vector<SynthParams> cases;
  if (!o.cases_file.empty()) {
    const auto j = read_json_file(o.cases_file);
    for (const auto& c : j) cases.push_back(c.get<SynthParams>());
    if (cases.empty()) throw InvalidArgument("cases file lists no cases");
  } else {
    cases = default_cases(o.cases);
  }
  const auto layouts = random_layouts(o.layouts, o.seed, o.width, o.height);
  if (!(o.jitter >= 0.0 && o.jitter <= 1.0)) throw InvalidArgument("--jitter must be in [0,1]");
  const auto manifest =
      make_corpus(o.out, layouts, cases, o.samples, o.seed, {o.jitter, o.jitter, o.jitter});
  os << manifest.string() << "\n";
  return kExitOk;
}

inline void apply_provider_flag(const std::string& flag, ProviderSpec& spec) {
  if (flag.rfind("dir:", 0) == 0) {
    spec.kind = "dir";
    spec.dir = flag.substr(4);
  } else if (flag == "null" || flag == "oracle") {
    spec.kind = flag;
  } else {
    throw InvalidArgument("unknown --provider '" + flag + "' (null | oracle | dir:PATH)");
  }
}

inline int cmd_run(const RunOpts& o, std::ostream& os) {
  RunConfig cfg;
  cfg.provider.oracle.seed = kDefaultSeed;
  if (!o.config.empty()) load_config_file(o.config, cfg);
  if (!o.provider.empty()) apply_provider_flag(o.provider, cfg.provider);
  if (o.seed_set) cfg.provider.oracle.seed = o.seed;
  if (o.workers > 0) cfg.pipeline.workers = o.workers;
  if (o.fail_prob >= 0) cfg.provider.oracle.fail_probability = o.fail_prob;
  if (!o.perturb.empty()) {
    cfg.provider.oracle.perturbations.clear();
    for (const auto& p : o.perturb) cfg.provider.oracle.perturbations.push_back(Perturbation::parse(p));
  }
  if (!o.score.empty()) {
    if (o.score == "true_iou") {
      cfg.provider.oracle.score_mode = OracleConfig::ScoreMode::true_iou;
    } else if (o.score.rfind("fixed:", 0) == 0) {
      cfg.provider.oracle.score_mode = OracleConfig::ScoreMode::fixed;
      cfg.provider.oracle.fixed_score = std::stod(o.score.substr(6));
    } else {
      throw InvalidArgument("--oracle-score must be true_iou or fixed:<v>");
    }
  }
  if (o.tau_conf >= 0) cfg.pipeline.gate.tau_conf = o.tau_conf;
  cfg.pipeline.validate();
  cfg.provider.oracle.validate();

  const Corpus corpus = load_corpus(o.corpus);
  const auto provider = make_provider(cfg.provider, corpus);
  const BatchSummary s = run_batch(corpus, cfg.pipeline, *provider, !o.no_gt, o.out);
  os << "images=" << s.images << " processed=" << s.processed << " failed=" << s.failed
     << " fallback=" << s.fallback_count;
  if (s.processed) {
    os << " (" << detail::fmt("%.1f", 100.0 * static_cast<double>(s.fallback_count) /
                                          static_cast<double>(s.processed))
       << "%)";
  }
  if (s.mean_iou) os << " mean_iou=" << detail::fmt("%.4f", *s.mean_iou);
  os << "\n";
  return kExitOk;
}

inline fs::path results_dir(const fs::path& p) { return fs::is_directory(p) ? p : p.parent_path(); }

inline int cmd_report(const ReportOpts& o, std::ostream& os) {
  const auto results = read_results(o.results);
  const auto cases = aggregate(results);
  const fs::path out = o.out.empty() ? results_dir(o.results) : fs::path(o.out);
  ensure_directory(out);
  const std::string table = render_report(cases);
  write_text_file(out / "report.txt", table);
  write_text_file(out / "report.json", report_json(cases).dump(2) + "\n");
  os << table;
  return kExitOk;
}

inline int cmd_compare(const CompareOpts& o, std::ostream& os) {
  const auto cmp = compare(aggregate(read_results(o.baseline)), aggregate(read_results(o.hybrid)));
  ensure_directory(o.out);
  const std::string table = render_comparison(cmp);
  write_text_file(fs::path(o.out) / "comparison.txt", table);
  write_text_file(fs::path(o.out) / "comparison.json", comparison_json(cmp).dump(2) + "\n");
  os << table;
  return kExitOk;
}

inline int cmd_gate_debug(const GateDebugOpts& o, std::ostream& os) {
  RunConfig cfg;
  if (!o.config.empty()) load_config_file(o.config, cfg);
  if (o.tau_conf >= 0) cfg.pipeline.gate.tau_conf = o.tau_conf;
  cfg.pipeline.gate.validate();
  const GrayImage img = pgm::read_image(o.image);
  if (!fs::is_directory(o.candidates)) throw IoError(o.candidates, "candidate directory not found");
  const std::string id = o.image_id.empty() ? fs::path(o.image).stem().string() : o.image_id;
  const auto manifest = candidates_manifest_path(o.candidates, id);
  if (!fs::exists(manifest)) throw IoError(manifest.string(), "no candidate manifest");
  const auto cands = read_candidates(o.candidates, id, img.width(), img.height());
  GateConfig gate = cfg.pipeline.gate;
  if (!o.gt.empty()) gate = gate.with_geometry_from(pgm::read_mask(o.gt));

  os << "image " << id << ": " << cands.size() << " candidate(s), tau_conf "
     << detail::fmt("%.4f", gate.tau_conf) << ", area [" << detail::fmt("%.1f", gate.min_area) << ", "
     << detail::fmt("%.6g", gate.max_area) << "], aspect [" << detail::fmt("%.4f", gate.min_aspect)
     << ", " << detail::fmt("%.6g", gate.max_aspect) << "]\n";
  const Selection sel = select_candidate(cands, gate);
  for (const auto& r : sel.reports) {
    os << "  " << r.candidate_id << "  predicted_iou=" << detail::fmt("%.4f", r.predicted_iou)
       << "  confidence=" << (r.confidence_pass ? "pass" : "FAIL")
       << "  topology=" << (r.topology_pass ? "pass" : "FAIL") << " (" << r.component_count
       << " comp)  geometry=" << (r.geometry_pass ? "pass" : "FAIL") << " (area " << r.area
       << ", aspect " << detail::fmt("%.3f", r.aspect) << ")  => "
       << (r.overall_pass ? "PASS" : "FAIL: " + r.failure_reason) << "\n";
  }
  if (sel.index) {
    os << "selected: " << cands[*sel.index].candidate_id << "\n";
  } else {
    os << "selected: none (fallback)\n";
  }
  return kExitOk;
}

/// Parses and dispatches. Output goes to `os`, diagnostics to `es`.
inline int run(int argc, const char* const* argv, std::ostream& os = std::cout,
               std::ostream& es = std::cerr) {
  CLI::App app{"segsem: hybrid SEM contour extraction"};
  app.require_subcommand(1);

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "generate a synthetic SEM corpus");
  synth->add_option("--out", so.out, "output directory")->required();
  synth->add_option("--cases", so.cases, "number of exposure cases");
  synth->add_option("--samples", so.samples, "samples per case");
  synth->add_option("--layouts", so.layouts, "number of distinct layouts");
  synth->add_option("--width", so.width, "canvas width")->check(CLI::PositiveNumber);
  synth->add_option("--height", so.height, "canvas height")->check(CLI::PositiveNumber);
  synth->add_option("--seed", so.seed, "master seed");
  synth->add_option("--cases-file", so.cases_file, "JSON list of render parameter sets");
  synth->add_option("--jitter", so.jitter, "per-sample relative jitter of noise, blur and bloom");

  RunOpts ro;
  auto* runc = app.add_subcommand("run", "run the pipeline over a corpus");
  runc->add_option("--corpus", ro.corpus, "corpus directory or manifest")->required();
  runc->add_option("--out", ro.out, "output directory")->required();
  runc->add_option("--provider", ro.provider, "null | oracle | dir:PATH");
  runc->add_option("--config", ro.config, "JSON config file");
  runc->add_option("--seed", ro.seed, "oracle seed")->each([&](const std::string&) { ro.seed_set = true; });
  runc->add_option("--workers", ro.workers, "parallel workers")->check(CLI::PositiveNumber);
  runc->add_flag("--no-gt", ro.no_gt, "production mode: skip accuracy metrics");
  runc->add_option("--oracle-fail-prob", ro.fail_prob, "oracle per-image failure probability")
      ->check(CLI::Range(0.0, 1.0));
  runc->add_option("--oracle-perturb", ro.perturb, "oracle perturbation (repeatable)");
  runc->add_option("--oracle-score", ro.score, "true_iou | fixed:<v>");
  runc->add_option("--tau-conf", ro.tau_conf, "gate confidence threshold")->check(CLI::Range(0.0, 1.0));

  ReportOpts rp;
  auto* report = app.add_subcommand("report", "aggregate results per exposure case");
  report->add_option("--results", rp.results, "results.jsonl or run directory")->required();
  report->add_option("--out", rp.out, "output directory (default: next to results)");

  CompareOpts co;
  auto* cmpc = app.add_subcommand("compare", "compare a baseline run against a hybrid run");
  cmpc->add_option("--baseline", co.baseline, "baseline run directory or results file")->required();
  cmpc->add_option("--hybrid", co.hybrid, "hybrid run directory or results file")->required();
  cmpc->add_option("--out", co.out, "output directory");

  GateDebugOpts go;
  auto* gd = app.add_subcommand("gate-debug", "explain gate decisions for one image");
  gd->add_option("--image", go.image, "image PGM")->required();
  gd->add_option("--candidates", go.candidates, "candidate directory")->required();
  gd->add_option("--image-id", go.image_id, "image id (default: image file stem)");
  gd->add_option("--gt", go.gt, "ground-truth mask to derive geometry ranges");
  gd->add_option("--config", go.config, "JSON config file");
  gd->add_option("--tau-conf", go.tau_conf, "gate confidence threshold")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    os << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    os << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    es << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  // input paths are checked before any work starts
  auto require_path = [](const std::string& p) {
    if (!fs::exists(p)) throw IoError(p, "not found");
  };
  try {
    if (*synth) return cmd_synth(so, os);
    if (*runc) {
      require_path(ro.corpus);
      if (!ro.config.empty()) require_path(ro.config);
      return cmd_run(ro, os);
    }
    if (*report) {
      require_path(rp.results);
      return cmd_report(rp, os);
    }
    if (*cmpc) {
      require_path(co.baseline);
      require_path(co.hybrid);
      return cmd_compare(co, os);
    }
    if (*gd) {
      require_path(go.image);
      require_path(go.candidates);
      return cmd_gate_debug(go, os);
    }
  } catch (const IoError& e) {
    es << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    es << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    es << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace segsem::cli
