#ifndef MCORR_HARNESS_COMMANDS_HPP
#define MCORR_HARNESS_COMMANDS_HPP

// `mcorr` subcommands. Every command is a pure function of its config, flags
// and seed: outputs are written in a fixed order and manifests carry no
// timestamps or thread counts.
//
// Exit codes: 0 success, 1 runtime or tolerance failure, 2 usage or config error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcorr/correction/ablation.hpp"
#include "mcorr/correction/optimizer.hpp"
#include "mcorr/error.hpp"
#include "mcorr/harness/config.hpp"
#include "mcorr/harness/hash.hpp"
#include "mcorr/io.hpp"
#include "mcorr/loss/gradcheck.hpp"
#include "mcorr/loss/tv.hpp"
#include "mcorr/loss/vs_ssim_loss.hpp"
#include "mcorr/mask/segmenter.hpp"
#include "mcorr/metrics/metrics.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/random.hpp"
#include "mcorr/tomo/simulate.hpp"

namespace mcorr::harness {

namespace fs = std::filesystem;

/// Flags shared by every subcommand. Flags win over config values.
struct CommonOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<double> dice_threshold;
  std::optional<double> rho;
  std::optional<std::size_t> patch_size;
};

struct EvaluateOptions {
  std::string gt;
  std::string test;
  std::optional<std::string> mask;
  std::optional<std::string> report;
  std::optional<std::string> case_id;
};

struct CorrectOptions {
  std::string corrupted;
  std::string gt;
  std::optional<std::string> mask;
};

struct SegmentOptions {
  std::optional<std::string> image;
};

inline constexpr double kGradcheckEpsilon = 1e-4;
inline constexpr double kVsSsimGradTolerance = 1e-3;
inline constexpr double kTvGradTolerance = 1e-4;
inline constexpr std::size_t kGradcheckTopK = 50;

/// Writes artifacts into one directory and records their SHA-256 in order.
class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, std::string command, std::uint64_t seed) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    manifest_["command"] = std::move(command);
    manifest_["seed"] = seed;
    manifest_["artifacts"] = nlohmann::ordered_json::array();
  }

  const fs::path& dir() const noexcept { return dir_; }

  fs::path write(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    const fs::path path = dir_ / name;
    io::detail::write_file(path, bytes);
    nlohmann::ordered_json entry;
    entry["name"] = name;
    entry["bytes"] = bytes.size();
    entry["sha256"] = sha256_hex(bytes);
    manifest_["artifacts"].push_back(std::move(entry));
    return path;
  }

  fs::path write_text(const std::string& name, const std::string& text) {
    return write(name, std::vector<std::uint8_t>(text.begin(), text.end()));
  }

  fs::path write_json(const std::string& name, const nlohmann::ordered_json& j) { return write_text(name, j.dump(2) + "\n"); }

  std::string hash_of(const std::string& name) const {
    for (const auto& a : manifest_["artifacts"]) {
      if (a["name"] == name) return a["sha256"].get<std::string>();
    }
    throw Error("no artifact named " + name);
  }

  fs::path finish() {
    const std::string text = manifest_.dump(2) + "\n";
    const fs::path path = dir_ / "manifest.json";
    io::detail::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
    return path;
  }

 private:
  fs::path dir_;
  nlohmann::ordered_json manifest_;
};

namespace detail {

inline nlohmann::json read_config_document(const CommonOptions& o) {
  if (!o.config) return nlohmann::json::object();
  std::ifstream in(*o.config);
  if (!in) throw ConfigError("cannot read config file " + *o.config);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + *o.config + " is not valid JSON: " + e.what());
  }
}

inline RunConfig resolve_config(const CommonOptions& o) {
  nlohmann::json doc = read_config_document(o);
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  if (o.seed) doc["seed"] = *o.seed;
  if (o.out) doc["output_dir"] = *o.out;
  if (o.rho) doc["loss"]["rho"] = *o.rho;
  if (o.patch_size) doc["loss"]["patch_size"] = *o.patch_size;
  if (o.dice_threshold) doc["loss"]["dice_threshold"] = *o.dice_threshold;
  return parse_config(doc);
}

inline std::size_t resolve_threads(const CommonOptions& o) {
  if (o.threads) return *o.threads;
  if (const char* env = std::getenv("MCORR_THREADS"); env && *env) {
    try {
      return static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      throw ConfigError(std::string("MCORR_THREADS is not a count: ") + env);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline fs::path output_dir(const RunConfig& cfg) { return cfg.output_dir.empty() ? fs::path(".") : fs::path(cfg.output_dir); }

inline metrics::EvaluationSettings evaluation_settings(const loss::LossConfig& l) {
  metrics::EvaluationSettings s;
  s.patch_size = l.patch_size;
  s.rho = l.rho;
  s.coverage_min = l.coverage_min;
  s.dice_threshold = l.dice_threshold;
  s.consts = l.consts;
  s.mask = l.mask;
  return s;
}

/// (a - b) / 2, which lies in [-1, 1] for signed_unit inputs.
inline Image2D difference_image(const Image2D& a, const Image2D& b) {
  require_same_shape(a, b, "difference");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::clamp(0.5 * (a.data()[i] - b.data()[i]), -1.0, 1.0);
  return Image2D(a.width(), a.height(), a.channels(), a.spacing_mm(), Domain::signed_unit, std::move(d));
}

inline nlohmann::ordered_json sinogram_sidecar(const tomo::Sinogram& s) {
  nlohmann::ordered_json j;
  j["n_views"] = s.n_views;
  j["n_detectors"] = s.n_detectors;
  j["detector_spacing_mm"] = s.detector_spacing_mm;
  j["angular_range_rad"] = s.angular_range;
  j["angles_rad"] = s.angles;
  return j;
}

inline mask::PromptSet prompts_or_center(const RunConfig& cfg, const Image2D& img) {
  if (!cfg.prompts.points.empty()) return cfg.prompts;
  return mask::PromptSet{{{img.width() / 2, img.height() / 2}}};
}

}  // namespace detail

inline int cmd_simulate(const CommonOptions& o, std::ostream& out, std::ostream&) {
  const RunConfig cfg = detail::resolve_config(o);
  const auto window = cfg.require_window();
  const auto pair = tomo::simulate_motion_scan(cfg.phantom, cfg.geometry, cfg.trajectory, window, cfg.filter);

  ArtifactWriter writer(detail::output_dir(cfg), "simulate", cfg.seed);
  writer.write("phantom.i2d", io::encode_image(pair.phantom));
  writer.write("reference.i2d", io::encode_image(pair.reference));
  writer.write("corrupted.i2d", io::encode_image(pair.corrupted));
  writer.write("sinogram_reference.i2d", io::encode_image(pair.reference_sinogram.as_image()));
  writer.write_json("sinogram_reference.json", detail::sinogram_sidecar(pair.reference_sinogram));
  writer.write("sinogram_corrupted.i2d", io::encode_image(pair.corrupted_sinogram.as_image()));
  writer.write_json("sinogram_corrupted.json", detail::sinogram_sidecar(pair.corrupted_sinogram));
  writer.write("reference.pgm", io::encode_preview(pair.reference));
  writer.write("corrupted.pgm", io::encode_preview(pair.corrupted));
  writer.write("difference.pgm", io::encode_preview(detail::difference_image(pair.corrupted, pair.reference)));
  writer.finish();
  out << "psnr_db(corrupted, reference) = " << metrics::format_fixed(metrics::psnr(pair.corrupted, pair.reference)) << "\n";
  return 0;
}

inline int cmd_segment(const CommonOptions& o, const SegmentOptions& s, std::ostream& out, std::ostream&) {
  const RunConfig cfg = detail::resolve_config(o);
  Image2D img;
  if (s.image) {
    img = io::read_image(*s.image);
  } else {
    img = tomo::simulate_motion_scan(cfg.phantom, cfg.geometry, cfg.trajectory, cfg.require_window(), cfg.filter).corrupted;
  }
  const auto m = mask::segment_from_prompts(img, detail::prompts_or_center(cfg, img), cfg.segmenter);
  ArtifactWriter writer(detail::output_dir(cfg), "segment", cfg.seed);
  writer.write("mask.pgm", io::encode_mask(m));
  writer.finish();
  out << "foreground_pixels = " << m.foreground_count() << "\n";
  return 0;
}

inline int cmd_evaluate(const CommonOptions& o, const EvaluateOptions& e, std::ostream& out, std::ostream& err) {
  RunConfig cfg = detail::resolve_config(o);
  const Image2D gt = io::read_image(e.gt);
  const Image2D test = io::read_image(e.test);
  if (e.mask) {
    auto loaded = mask::load_external_mask(*e.mask);
    if (loaded.empty) err << "warning: mask " << *e.mask << " has no foreground pixels\n";
    cfg.loss.mask = std::move(loaded.mask);
  }
  const std::string case_id = e.case_id.value_or(fs::path(e.test).stem().string());
  const auto report = metrics::evaluate(case_id, gt, test, detail::evaluation_settings(cfg.loss));
  const std::string row = metrics::to_csv_row(report);
  if (e.report) {
    const fs::path json_path(*e.report);
    if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());
    const std::string j = metrics::to_json(report).dump(2) + "\n";
    io::detail::write_file(json_path, std::vector<std::uint8_t>(j.begin(), j.end()));
    fs::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    const std::string csv = std::string(metrics::kReportCsvHeader) + "\n" + row + "\n";
    io::detail::write_file(csv_path, std::vector<std::uint8_t>(csv.begin(), csv.end()));
  }
  out << row << "\n";
  return 0;
}

inline int cmd_correct(const CommonOptions& o, const CorrectOptions& c, std::ostream& out, std::ostream& err) {
  RunConfig cfg = detail::resolve_config(o);
  const Image2D corrupted = io::read_image(c.corrupted);
  const Image2D gt = io::read_image(c.gt);
  if (c.mask) {
    auto loaded = mask::load_external_mask(*c.mask);
    if (loaded.empty) err << "warning: mask " << *c.mask << " has no foreground pixels\n";
    cfg.loss.mask = std::move(loaded.mask);
  }
  const auto result = correction::optimize_correction(corrupted, gt, cfg.loss, cfg.optimizer);
  const auto settings = detail::evaluation_settings(cfg.loss);
  const auto before = metrics::evaluate("corrupted", gt, corrupted, settings);
  const auto after = metrics::evaluate("corrected", gt, result.corrected, settings);

  ArtifactWriter writer(detail::output_dir(cfg), "correct", cfg.seed);
  writer.write("corrected.i2d", io::encode_image(result.corrected));
  writer.write("corrected.pgm", io::encode_preview(result.corrected));
  writer.write("difference.pgm", io::encode_preview(detail::difference_image(result.corrected, gt)));
  writer.write_text("trace.csv", result.trace.to_csv());
  nlohmann::ordered_json report;
  report["case_id"] = fs::path(c.corrupted).stem().string();
  report["stop_reason"] = correction::to_string(result.stop);
  report["accepted_steps"] = result.trace.records.size() - 1;
  report["corrupted_vs_gt"] = metrics::to_json(before);
  report["corrected_vs_gt"] = metrics::to_json(after);
  report["files"] = {"corrected.i2d", "corrected.pgm", "difference.pgm", "trace.csv"};
  writer.write_json("report.json", report);
  writer.write_text("report.csv", std::string(metrics::kReportCsvHeader) + "\n" + metrics::to_csv_row(before) + "\n" +
                                      metrics::to_csv_row(after) + "\n");
  writer.finish();
  out << metrics::to_csv_row(before) << "\n" << metrics::to_csv_row(after) << "\n";
  return 0;
}

inline int cmd_ablate(const CommonOptions& o, std::ostream& out, std::ostream&) {
  RunConfig cfg = detail::resolve_config(o);
  const auto pair = tomo::simulate_motion_scan(cfg.phantom, cfg.geometry, cfg.trajectory, cfg.require_window(), cfg.filter);
  const auto m = mask::segment_from_prompts(pair.corrupted, detail::prompts_or_center(cfg, pair.corrupted), cfg.segmenter);
  cfg.loss.mask = m;
  const auto record = correction::ablate_objectives(pair.corrupted, pair.reference, cfg.loss, cfg.optimizer);

  ArtifactWriter writer(detail::output_dir(cfg), "ablate", cfg.seed);
  const std::string csv = record.to_csv();
  writer.write_text("ablation.csv", csv);
  writer.write("mask.pgm", io::encode_mask(m));
  writer.write("difference_corrupted.pgm", io::encode_preview(detail::difference_image(pair.corrupted, pair.reference)));
  for (const auto& arm : record.arms) {
    writer.write("corrected_" + arm.name + ".i2d", io::encode_image(arm.run.corrected));
    writer.write("difference_" + arm.name + ".pgm", io::encode_preview(detail::difference_image(arm.run.corrected, pair.reference)));
    writer.write_text("trace_" + arm.name + ".csv", arm.run.trace.to_csv());
  }
  writer.finish();
  out << csv;
  return 0;
}

struct GradcheckOutcome {
  double vs_ssim_error = 0.0;
  double tv_error = 0.0;
  bool passed = false;
};

/// Seeded gradient verification of the VS-SSIM loss (32x32, patch 8,
/// rho 0.5 unless overridden) and of the TV regularizer (16x16).
inline GradcheckOutcome run_gradcheck(std::uint64_t seed, std::size_t patch_size = 8, double rho = 0.5) {
  Rng rng(seed);
  auto random_image = [&](std::size_t n) {
    std::vector<double> v(n * n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return Image2D(n, n, 1, 1.0, Domain::signed_unit, std::move(v));
  };
  const Image2D gt = random_image(32);
  const Image2D gen = random_image(32);
  loss::LossConfig lc;
  lc.patch_size = patch_size;
  lc.rho = rho;
  const loss::VsSsimLoss vs(gt, lc);
  const auto vs_result = loss::finite_diff_check([&](const Image2D& y) { return vs(y); }, gen, kGradcheckEpsilon,
                                                 gen.size(), rng.next(), kGradcheckTopK);
  // Alternating signs keep every forward difference at least 0.4 away from the
  // sqrt kink, where a 1e-4 central difference stops resolving the gradient.
  std::vector<double> tv_values(16 * 16);
  for (std::size_t i = 0; i < tv_values.size(); ++i) {
    const double sign = ((i % 16) + (i / 16)) % 2 == 0 ? 1.0 : -1.0;
    tv_values[i] = sign * rng.uniform(0.2, 0.9);
  }
  const Image2D tv_point(16, 16, 1, 1.0, Domain::signed_unit, std::move(tv_values));
  const auto tv_result = loss::finite_diff_check([](const Image2D& y) { return loss::tv_regularizer(y); }, tv_point,
                                                 kGradcheckEpsilon, tv_point.size(), rng.next());
  GradcheckOutcome g;
  g.vs_ssim_error = vs_result.max_relative_error;
  g.tv_error = tv_result.max_relative_error;
  g.passed = g.vs_ssim_error < kVsSsimGradTolerance && g.tv_error < kTvGradTolerance;
  return g;
}

inline int cmd_gradcheck(const CommonOptions& o, std::ostream& out, std::ostream&) {
  const RunConfig cfg = detail::resolve_config(o);
  const std::size_t patch = o.patch_size.value_or(8);
  const double rho = o.rho.value_or(0.5);
  const auto g = run_gradcheck(cfg.seed, patch, rho);
  auto sci = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  std::ostringstream lines;
  lines << "vs_ssim_loss max_rel_error=" << sci(g.vs_ssim_error) << " tol=" << sci(kVsSsimGradTolerance) << " "
        << (g.vs_ssim_error < kVsSsimGradTolerance ? "PASS" : "FAIL") << "\n";
  lines << "tv_regularizer max_rel_error=" << sci(g.tv_error) << " tol=" << sci(kTvGradTolerance) << " "
        << (g.tv_error < kTvGradTolerance ? "PASS" : "FAIL") << "\n";
  out << lines.str();
  if (o.out || !cfg.output_dir.empty()) {
    ArtifactWriter writer(detail::output_dir(cfg), "gradcheck", cfg.seed);
    nlohmann::ordered_json j;
    j["epsilon"] = kGradcheckEpsilon;
    j["vs_ssim_loss"] = {{"max_rel_error", g.vs_ssim_error}, {"tolerance", kVsSsimGradTolerance}, {"top_k", kGradcheckTopK}};
    j["tv_regularizer"] = {{"max_rel_error", g.tv_error}, {"tolerance", kTvGradTolerance}};
    j["passed"] = g.passed;
    writer.write_json("gradcheck.json", j);
    writer.finish();
  }
  return g.passed ? 0 : 1;
}

/// Entry point shared by the mcorr binary and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"mcorr: CT motion-artifact simulation, VS-SSIM evaluation and correction"};
  app.require_subcommand(1);
  CommonOptions common;
  EvaluateOptions eval;
  CorrectOptions corr;
  SegmentOptions seg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--seed", common.seed, "64-bit seed");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--threads", common.threads, "worker threads (default: MCORR_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--dice-threshold", common.dice_threshold, "Dice threshold on signed_unit values");
    sub->add_option("--rho", common.rho, "selected patch fraction in (0, 1]");
    sub->add_option("--patch-size", common.patch_size, "patch edge in pixels");
  };
  auto* simulate = app.add_subcommand("simulate", "simulate motion-corrupted and reference reconstructions");
  auto* segment = app.add_subcommand("segment", "prompted mask extraction");
  auto* correct = app.add_subcommand("correct", "gradient-descent correction against a reference");
  auto* evaluate = app.add_subcommand("evaluate", "PSNR / SSIM / VS-SSIM / Dice of a test image");
  auto* ablate = app.add_subcommand("ablate", "objective ablation: SSIM vs VS-SSIM vs VS-SSIM + mask");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  for (auto* sub : {simulate, segment, correct, evaluate, ablate, gradcheck}) add_common(sub);
  segment->add_option("--image", seg.image, "IMG2D input (default: simulate from config)");
  correct->add_option("--corrupted", corr.corrupted, "corrupted IMG2D")->required();
  correct->add_option("--gt", corr.gt, "reference IMG2D")->required();
  correct->add_option("--mask", corr.mask, "PGM mask restricting patch selection");
  evaluate->add_option("--gt", eval.gt, "reference IMG2D")->required();
  evaluate->add_option("--test", eval.test, "test IMG2D")->required();
  evaluate->add_option("--mask", eval.mask, "PGM mask restricting patch selection");
  evaluate->add_option("--report", eval.report, "JSON report path; a CSV is written beside it");
  evaluate->add_option("--case-id", eval.case_id, "case identifier (default: test file stem)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    parallel::set_threads(detail::resolve_threads(common));
    if (*simulate) return cmd_simulate(common, out, err);
    if (*segment) return cmd_segment(common, seg, out, err);
    if (*correct) return cmd_correct(common, corr, out, err);
    if (*evaluate) return cmd_evaluate(common, eval, out, err);
    if (*ablate) return cmd_ablate(common, out, err);
    if (*gradcheck) return cmd_gradcheck(common, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mcorr::harness

#endif  // MCORR_HARNESS_COMMANDS_HPP
