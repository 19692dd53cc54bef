// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <thread>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcorr/correction/ablation.hpp"
#include "mcorr/correction/attention.hpp"
#include "mcorr/harness/commands.hpp"
#include "mcorr/harness/config.hpp"
#include "mcorr/mask/segmenter.hpp"
#include "mcorr/metrics/metrics.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/random.hpp"
#include "mcorr/tomo/simulate.hpp"
#include "oracles.hpp"

#ifndef MCORR_SOURCE_DIR
#define MCORR_SOURCE_DIR "."
#endif

using namespace mcorr;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "mcorr_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "mcorr");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = harness::run_cli(int(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

constexpr double kC1 = 0.0004, kC2 = 0.0036;  // (0.01 * 2)^2, (0.03 * 2)^2

// ---------------------------------------------------------------------------

Outcome ac1_gradcheck() {
  const auto t0 = Clock::now();
  std::string text;
  const int code = cli({"gradcheck", "--threads", "1"}, &text);
  const double secs = seconds_since(t0);
  for (auto& ch : text)
    if (ch == '\n') ch = ';';
  return {code == 0 && secs < 30.0, text + fmt(" %.2fs", secs)};
}

Outcome ac2_fbp() {
  parallel::set_threads(1);
  const auto t0 = Clock::now();
  const double r = 40.0;
  const std::size_t n = 128;
  auto disk = tomo::make_phantom(tomo::disk_phantom(n, 1.0, r));
  auto geom = tomo::ScanGeometry::covering(disk, 360);
  auto sino = tomo::forward_project(disk, geom);
  auto rec = tomo::filtered_backprojection(sino, n, n, 1.0);

  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double px = tomo::pixel_center_mm(x, n, 1.0), py = tomo::pixel_center_mm(y, n, 1.0);
      if (std::hypot(px, py) > 0.9 * r) continue;
      se += std::pow(rec.at(x, y) - disk.at(x, y), 2);
      ++count;
    }
  }
  const double rmse = std::sqrt(se / double(count));  // dynamic range of the disk is 1

  double worst = 0.0, worst_s = 0.0;
  for (std::size_t v = 0; v < sino.n_views; ++v) {
    for (std::size_t d = 0; d < sino.n_detectors; ++d) {
      const double s = sino.detector_offset(d);
      if (std::abs(s) >= 0.9 * r) continue;
      const double expect = oracle::chord(r, s);
      const double rel = std::abs(sino.at(v, d) - expect) / expect;
      if (rel > worst) {
        worst = rel;
        worst_s = s;
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = rmse < 0.05 && worst < 0.02 && secs < 10.0;
  return {pass, fmt("interior_rmse=%.5f", rmse) + fmt(" max_chord_rel_err=%.5f", worst) + fmt(" at s=%.1fmm", worst_s) +
                    fmt(" %.2fs", secs)};
}

Outcome ac3_ladder() {
  parallel::set_threads(1);
  auto spec = tomo::chest_phantom(128, 128, 1.0);
  auto geom = tomo::ScanGeometry::covering(Image2D(128, 128), 360);
  // fixed seeded shape of the rotation, scaled to each amplitude
  Rng rng(20240611);
  std::vector<double> shape(6);
  for (auto& s : shape) s = rng.uniform(-1.0, 1.0);
  double peak = 0.0;
  for (double s : shape) peak = std::max(peak, std::abs(s));
  for (auto& s : shape) s /= peak;

  std::vector<double> psnrs;
  bool identity = false;
  for (double amp : {0.0, 2.0, 5.0, 10.0}) {
    tomo::MotionTrajectory t;
    t.n_shots = 12;
    for (double s : shape) t.control_poses.push_back({0.0, 0.0, amp * s * std::numbers::pi / 180.0, 1.0});
    auto pair = tomo::simulate_motion_scan(spec, geom, t, {0.0, 2.0});
    if (amp == 0.0) identity = pair.corrupted == pair.reference;
    psnrs.push_back(metrics::psnr(pair.corrupted, pair.reference));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < psnrs.size(); ++i) decreasing = decreasing && psnrs[i] < psnrs[i - 1];
  std::string d = std::string("bitwise_at_0=") + (identity ? "yes" : "no") + " psnr_db=";
  for (double p : psnrs) d += metrics::format_fixed(p) + " ";
  return {identity && decreasing, d};
}

Outcome ac4_degeneracy() {
  double worst = 0.0, worst_self = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t p = seed % 2 ? 8 : 16;
    const std::size_t w = p * (2 + seed % 3), h = p * (2 + (seed / 3) % 3);
    auto gt = oracle::random_signed(w, h, 2 * seed);
    auto gen = oracle::random_signed(w, h, 2 * seed + 1);
    auto sel = metrics::select_patches(gt, p, 1.0);
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t r = 0; r < h / p; ++r) {
      for (std::size_t c = 0; c < w / p; ++c) {
        sum += oracle::ssim_patch(oracle::patch_values(gt, p, r, c), oracle::patch_values(gen, p, r, c), kC1, kC2);
        ++cells;
      }
    }
    worst = std::max(worst, std::abs(metrics::vs_ssim(gt, gen, sel) - sum / double(cells)));
    worst_self = std::max(worst_self, std::abs(metrics::vs_ssim(gt, gt, metrics::select_patches(gt, p, 0.25)) - 1.0));
  }
  return {worst < 1e-12 && worst_self < 1e-12,
          fmt("max|vs_ssim-mean_patch_ssim|=%.3g", worst) + fmt(" max|vs_ssim(gt,gt)-1|=%.3g", worst_self)};
}

Outcome ac5_ablation() {
  const auto t0 = Clock::now();
  auto cfg = harness::load_config(fs::path(MCORR_SOURCE_DIR) / "configs" / "standard.json");
  parallel::set_threads(std::max(1u, std::thread::hardware_concurrency()));
  auto pair = tomo::simulate_motion_scan(cfg.phantom, cfg.geometry, cfg.trajectory, cfg.require_window(), cfg.filter);
  cfg.loss.mask = mask::segment_from_prompts(pair.corrupted, cfg.prompts, cfg.segmenter);
  auto rec = correction::ablate_objectives(pair.corrupted, pair.reference, cfg.loss, cfg.optimizer);
  const double secs = seconds_since(t0);

  const double psnr0 = metrics::psnr(pair.corrupted, pair.reference);
  const double ssim0 = metrics::ssim_global(pair.corrupted, pair.reference);
  bool improved = true;
  std::string d = "iters=" + std::to_string(cfg.optimizer.max_iters) + " corrupted(" + metrics::format_fixed(psnr0) + "dB," +
                  metrics::format_fixed(ssim0) + ")";
  for (const auto& arm : rec.arms) {
    improved = improved && arm.metrics.psnr_db > psnr0 && arm.metrics.ssim > ssim0;
    d += " " + arm.name + "(" + metrics::format_fixed(arm.metrics.psnr_db) + "dB," + metrics::format_fixed(arm.metrics.ssim) +
         ",omega=" + metrics::format_fixed(arm.omega_ssim) + ")";
  }
  const bool trend = rec.arm("vs_ssim").omega_ssim >= rec.arm("ssim").omega_ssim;
  d += fmt(" %.1fs", secs);
  return {improved && trend && secs < 120.0, d};
}

// exhaustive small corpus
std::vector<Image2D> corpus(std::size_t n, bool all_impulses) {
  std::vector<Image2D> out;
  auto make = [&](auto f) {
    std::vector<double> v(n * n);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) v[y * n + x] = f(x, y);
    out.emplace_back(n, n, 1, 1.0, Domain::signed_unit, std::move(v));
  };
  const double span = double(n - 1);
  for (double c : {-1.0, -0.5, 0.0, 0.25, 1.0}) make([=](std::size_t, std::size_t) { return c; });
  make([=](std::size_t x, std::size_t) { return -1.0 + 2.0 * double(x) / span; });
  make([=](std::size_t, std::size_t y) { return 1.0 - 2.0 * double(y) / span; });
  make([=](std::size_t x, std::size_t y) { return -1.0 + double(x + y) / span; });
  make([](std::size_t x, std::size_t y) { return (x + y) % 2 ? 1.0 : -1.0; });
  make([](std::size_t x, std::size_t y) { return (x / 2 + y / 2) % 2 ? 0.8 : -0.3; });
  make([=](std::size_t x, std::size_t) { return x < n / 2 ? 1.0 : -1.0; });
  make([=](std::size_t, std::size_t y) { return y < n / 2 ? -1.0 : 1.0; });
  make([](std::size_t x, std::size_t y) { return x > y ? 1.0 : -1.0; });
  make([=](std::size_t x, std::size_t y) { return x + y < n ? 0.5 : -0.5; });
  const std::size_t step = all_impulses ? 1 : 7;
  for (std::size_t i = 0; i < n * n; i += step)
    make([=](std::size_t x, std::size_t y) { return y * n + x == i ? 1.0 : -1.0; });
  for (std::uint64_t s = 0; s < 12; ++s) out.push_back(oracle::random_signed(n, n, 1000 + s));
  return out;
}

Outcome ac6_oracles() {
  double worst_psnr = 0.0, worst_dice = 0.0, worst_patch = 0.0, worst_global = 0.0;
  bool inf_agree = true, sets_equal = true, small_rejected = true;
  std::size_t pairs = 0, selections = 0;

  const auto small = corpus(8, true);
  for (const auto& a : small) {
    for (const auto& b : small) {
      ++pairs;
      const double p = metrics::psnr(a, b), q = oracle::psnr(a, b);
      if (std::isinf(p) || std::isinf(q)) {
        inf_agree = inf_agree && p == q;
      } else {
        worst_psnr = std::max(worst_psnr, std::abs(p - q));
      }
      for (double thr : {-0.5, 0.0, 0.5})
        worst_dice = std::max(worst_dice, std::abs(metrics::dice(a, b, thr) - oracle::dice(a, b, thr)));
      for (std::size_t ps : {2, 4, 8}) {
        auto grid = decompose_patches(a, ps);
        for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
          const double lib = metrics::ssim_patch(extract_patch(a, grid, cell), extract_patch(b, grid, cell));
          const double ref = oracle::ssim_patch(oracle::patch_values(a, ps, grid.row_of(cell), grid.col_of(cell)),
                                                oracle::patch_values(b, ps, grid.row_of(cell), grid.col_of(cell)), kC1, kC2);
          worst_patch = std::max(worst_patch, std::abs(lib - ref));
        }
      }
    }
    try {
      metrics::ssim_global(a, a);
      small_rejected = false;
    } catch (const ShapeError&) {
    }
    MaskFeatureMap lower(8, 8);
    for (std::size_t y = 4; y < 8; ++y)
      for (std::size_t x = 0; x < 8; ++x) lower.set(x, y, true);
    for (std::size_t ps : {2, 4}) {
      for (double rho : {0.1, 0.25, 0.5, 0.75, 1.0}) {
        auto sel = metrics::select_patches(a, ps, rho);
        auto got = sel.selected;
        std::sort(got.begin(), got.end());
        sets_equal = sets_equal && got == oracle::select_cells(a, ps, rho);
        auto msel = metrics::select_patches(a, ps, rho, lower, 0.5);
        got = msel.selected;
        std::sort(got.begin(), got.end());
        sets_equal = sets_equal && got == oracle::select_cells(a, ps, rho, lower, 0.5);
        selections += 2;
      }
    }
  }

  // the 11x11 window needs at least 11 pixels a side
  for (std::size_t n : {11, 16}) {
    const auto imgs = corpus(n, false);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      for (std::size_t j = i; j < imgs.size(); j += 3) {
        worst_global = std::max(worst_global, std::abs(metrics::ssim_global(imgs[i], imgs[j]) -
                                                       oracle::ssim_global(imgs[i], imgs[j], kC1, kC2)));
      }
    }
  }

  const bool pass = inf_agree && sets_equal && small_rejected && worst_psnr < 1e-9 && worst_dice < 1e-9 &&
                    worst_patch < 1e-9 && worst_global < 1e-9;
  return {pass, "pairs=" + std::to_string(pairs) + " selections=" + std::to_string(selections) +
                    fmt(" psnr=%.2g", worst_psnr) + fmt(" dice=%.2g", worst_dice) + fmt(" patch_ssim=%.2g", worst_patch) +
                    fmt(" global_ssim(11,16)=%.2g", worst_global) + " sets_equal=" + (sets_equal ? "yes" : "no") +
                    " global_8x8_rejected=" + (small_rejected ? "yes" : "no")};
}

Outcome ac7_mask() {
  bool clean = true, sets_equal = true;
  std::size_t checks = 0;
  const std::size_t n = 64;
  // half planes: vertical and horizontal cuts on and off the patch grid, plus diagonals
  std::vector<std::function<bool(std::size_t, std::size_t)>> planes = {
      [](std::size_t x, std::size_t) { return x < 32; },     [](std::size_t x, std::size_t) { return x < 36; },
      [](std::size_t x, std::size_t) { return x >= 29; },    [](std::size_t, std::size_t y) { return y < 20; },
      [](std::size_t, std::size_t y) { return y >= 44; },    [](std::size_t x, std::size_t y) { return x > y; },
      [](std::size_t x, std::size_t y) { return x + y < 70; }, [](std::size_t x, std::size_t y) { return 2 * x + y < 80; }};
  for (std::size_t k = 0; k < planes.size(); ++k) {
    MaskFeatureMap m(n, n);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) m.set(x, y, planes[k](x, y));
    // variance is largest outside the mask, so an unrestricted selection would go there
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto gt = oracle::random_signed(n, n, 77 * k + seed);
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x)
          if (m.at(x, y)) gt.at(x, y) *= 0.05;
      for (std::size_t p : {8, 16}) {
        for (double rho : {0.1, 0.25, 0.5, 1.0}) {
          auto sel = metrics::select_patches(gt, p, rho, m, 0.5);
          const std::size_t cols = n / p;
          for (auto cell : sel.selected) {
            const std::size_t r = cell / cols, c = cell % cols;
            std::size_t fg = 0;
            for (std::size_t y = r * p; y < (r + 1) * p; ++y)
              for (std::size_t x = c * p; x < (c + 1) * p; ++x) fg += m.at(x, y);
            clean = clean && 2 * fg >= p * p;
          }
          auto got = sel.selected;
          std::sort(got.begin(), got.end());
          sets_equal = sets_equal && got == oracle::select_cells(gt, p, rho, m, 0.5);
          ++checks;
        }
      }
    }
  }
  return {clean && sets_equal, "selections=" + std::to_string(checks) + " outside_patches=" + (clean ? "none" : "FOUND") +
                                   " oracle_sets_equal=" + (sets_equal ? "yes" : "no")};
}

Outcome ac8_determinism() {
  const fs::path root = scratch() / "determinism";
  fs::create_directories(root);
  auto j = nlohmann::json::parse(slurp(fs::path(MCORR_SOURCE_DIR) / "configs" / "standard.json"));
  // smaller grid and budget so 24 runs stay quick; the code paths are the same
  j["phantom"]["width"] = 64;
  j["phantom"]["height"] = 64;
  j["geometry"]["n_views"] = 120;
  j["geometry"]["n_detectors"] = 93;
  j["loss"]["patch_size"] = 8;
  j["prompts"] = {{{"x", 32}, {"y", 32}}};
  j["optimizer"]["max_iters"] = 25;
  const auto cfg = (root / "config.json").string();
  std::ofstream(cfg) << j.dump(2);
  const auto inputs = root / "inputs";
  if (cli({"simulate", "--config", cfg, "--out", inputs.string(), "--threads", "1"}) != 0) return {false, "setup failed"};
  const auto gt = (inputs / "reference.i2d").string(), cor = (inputs / "corrupted.i2d").string();

  struct Command {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Command> commands = {
      {"simulate", {"simulate", "--config", cfg}},
      {"segment", {"segment", "--config", cfg}},
      {"correct", {"correct", "--config", cfg, "--corrupted", cor, "--gt", gt}},
      {"evaluate", {"evaluate", "--config", cfg, "--gt", gt, "--test", cor}},
      {"ablate", {"ablate", "--config", cfg}},
      {"gradcheck", {"gradcheck", "--config", cfg}},
  };

  bool all_same = true;
  std::string d;
  for (const auto& c : commands) {
    std::vector<std::map<std::string, std::string>> runs;
    bool ok = true;
    for (const char* threads : {"1", "8"}) {
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = root / (c.name + "_t" + threads + "_" + std::to_string(rep));
        auto args = c.args;
        args.insert(args.end(), {"--seed", "20240611", "--threads", threads});
        if (c.name == "evaluate") {
          args.insert(args.end(), {"--report", (out / "report.json").string(), "--case-id", "case"});
        } else {
          args.insert(args.end(), {"--out", out.string()});
        }
        std::string text;
        ok = ok && cli(args, &text) == 0;
        std::map<std::string, std::string> files{{"<stdout>", text}};
        for (const auto& e : fs::directory_iterator(out)) files[e.path().filename().string()] = slurp(e.path());
        runs.push_back(std::move(files));
      }
    }
    bool same = ok;
    for (const auto& r : runs) same = same && r == runs.front();
    all_same = all_same && same;
    d += c.name + "(" + std::to_string(runs.front().size() - 1) + " files)=" + (same ? "same " : "DIFFERENT ");
  }
  return {all_same, d};
}

Outcome ac9_composition() {
  bool endpoints = true, envelope = true;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const std::size_t w = 4 + s % 13, h = 3 + (s / 13) % 11;
    auto content = oracle::random_signed(w, h, 3 * s);
    auto attention = oracle::random_signed(w, h, 3 * s + 1, 0.0, 1.0);
    auto base = oracle::random_signed(w, h, 3 * s + 2);
    auto out = correction::attention_compose(content, attention, base);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double lo = std::min(content.data()[i], base.data()[i]), hi = std::max(content.data()[i], base.data()[i]);
      envelope = envelope && out.data()[i] >= lo && out.data()[i] <= hi;
    }
    if (s % 10 == 0) {
      Image2D zeros(w, h, 1, 1.0, Domain::raw, std::vector<double>(w * h, 0.0));
      Image2D ones(w, h, 1, 1.0, Domain::raw, std::vector<double>(w * h, 1.0));
      endpoints = endpoints && correction::attention_compose(content, zeros, base) == base &&
                  correction::attention_compose(content, ones, base) == content;
    }
  }
  return {endpoints && envelope, std::string("endpoints_exact=") + (endpoints ? "yes" : "no") +
                                     " envelope_1000=" + (envelope ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 gradient fidelity", ac1_gradcheck},   {"AC2 FBP fidelity", ac2_fbp},
      {"AC3 motion severity ladder", ac3_ladder}, {"AC4 rho=1 degeneracy", ac4_degeneracy},
      {"AC5 ablation trend", ac5_ablation},       {"AC6 oracle equivalence", ac6_oracles},
      {"AC7 mask restriction", ac7_mask},         {"AC8 determinism", ac8_determinism},
      {"AC9 composition law", ac9_composition},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << name << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
