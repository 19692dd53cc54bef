#ifndef MCORR_HARNESS_CONFIG_HPP
#define MCORR_HARNESS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

#include "json.hpp"
#include "mcorr/correction/optimizer.hpp"
#include "mcorr/error.hpp"
#include "mcorr/loss/vs_ssim_loss.hpp"
#include "mcorr/mask/segmenter.hpp"
#include "mcorr/random.hpp"
#include "mcorr/tomo/phantom.hpp"
#include "mcorr/tomo/projector.hpp"
#include "mcorr/tomo/simulate.hpp"
#include "mcorr/tomo/trajectory.hpp"

namespace mcorr::harness {

using nlohmann::json;

/// Everything one run needs, parsed from a single JSON document.
struct RunConfig {
  tomo::PhantomSpec phantom = tomo::chest_phantom(128, 128, 1.0);
  tomo::ScanGeometry geometry;
  tomo::RampWindow filter = tomo::RampWindow::none;
  tomo::MotionTrajectory trajectory = tomo::MotionTrajectory::stationary(12);
  std::optional<tomo::IntensityWindow> window;
  loss::LossConfig loss;
  mask::SegmenterConfig segmenter;
  mask::PromptSet prompts;
  correction::OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::string output_dir;

  const tomo::IntensityWindow& require_window() const {
    if (!window) throw ConfigError("config needs a \"window\" object {lo, hi}; there is no default intensity window");
    return *window;
  }
};

namespace detail {

inline constexpr double kDeg = std::numbers::pi / 180.0;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

inline const json& require_object(const json& parent, const char* key) {
  const auto& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(std::string("config key \"") + key + "\" must be an object");
  return v;
}

inline tomo::PhantomSpec parse_phantom(const json& j) {
  const auto width = get_or<std::size_t>(j, "width", 128);
  const auto height = get_or<std::size_t>(j, "height", width);
  const auto spacing = get_or<double>(j, "spacing_mm", 1.0);
  tomo::PhantomSpec spec;
  if (j.contains("ellipses")) {
    spec.width = width;
    spec.height = height;
    spec.spacing_mm = spacing;
    for (const auto& e : j.at("ellipses")) {
      tomo::Ellipse el;
      el.center_x_mm = get_or<double>(e, "center_x_mm", 0.0);
      el.center_y_mm = get_or<double>(e, "center_y_mm", 0.0);
      el.semi_axis_a_mm = get_or<double>(e, "semi_axis_a_mm", 0.0);
      el.semi_axis_b_mm = get_or<double>(e, "semi_axis_b_mm", el.semi_axis_a_mm);
      el.rotation_rad = get_or<double>(e, "rotation_deg", 0.0) * kDeg;
      el.additive_intensity = get_or<double>(e, "additive_intensity", 1.0);
      spec.ellipses.push_back(el);
    }
  } else {
    const auto preset = get_or<std::string>(j, "preset", "chest");
    if (preset == "chest") {
      spec = tomo::chest_phantom(width, height, spacing);
    } else if (preset == "disk") {
      spec = tomo::disk_phantom(width, spacing, get_or<double>(j, "radius_mm", 0.3125 * width * spacing));
      spec.height = height;
    } else {
      throw ConfigError("unknown phantom preset \"" + preset + "\"");
    }
  }
  spec.validate();
  return spec;
}

inline tomo::ScanGeometry parse_geometry(const json& j, const tomo::PhantomSpec& phantom) {
  const auto covering = tomo::ScanGeometry::covering(Image2D(phantom.width, phantom.height, 1, phantom.spacing_mm), 360);
  tomo::ScanGeometry g;
  g.n_views = get_or<std::size_t>(j, "n_views", covering.n_views);
  g.angular_range = get_or<double>(j, "angular_range_deg", 180.0) * kDeg;
  g.n_detectors = get_or<std::size_t>(j, "n_detectors", covering.n_detectors);
  g.detector_spacing_mm = get_or<double>(j, "detector_spacing_mm", covering.detector_spacing_mm);
  g.ray_step_mm = get_or<double>(j, "ray_step_mm", 0.5 * g.detector_spacing_mm);
  g.validate();
  return g;
}

/// Explicit control poses, or a seeded random draw when "random" is given:
/// {"random": {"n_controls", "max_rotation_deg", "max_translation_mm", "max_breath_deviation"}}.
inline tomo::MotionTrajectory parse_trajectory(const json& j, std::uint64_t seed) {
  tomo::MotionTrajectory t;
  t.n_shots = get_or<std::size_t>(j, "n_shots", 12);
  if (j.contains("control_poses")) {
    for (const auto& p : j.at("control_poses")) {
      t.control_poses.push_back({get_or<double>(p, "tx_mm", 0.0), get_or<double>(p, "ty_mm", 0.0),
                                 get_or<double>(p, "theta_deg", 0.0) * kDeg, get_or<double>(p, "breath_scale", 1.0)});
    }
  } else if (j.contains("random")) {
    const auto& r = require_object(j, "random");
    const auto n = get_or<std::size_t>(r, "n_controls", 6);
    const double rot = get_or<double>(r, "max_rotation_deg", 0.0) * kDeg;
    const double shift = get_or<double>(r, "max_translation_mm", 0.0);
    const double breath = get_or<double>(r, "max_breath_deviation", 0.0);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      tomo::RigidPose p;
      p.tx_mm = rng.uniform(-shift, shift);
      p.ty_mm = rng.uniform(-shift, shift);
      p.theta_rad = rng.uniform(-rot, rot);
      p.breath_scale = 1.0 + rng.uniform(-breath, breath);
      t.control_poses.push_back(p);
    }
  } else {
    t.control_poses.assign(4, tomo::RigidPose{});
  }
  t.validate();
  return t;
}

inline loss::LossConfig parse_loss(const json& j) {
  loss::LossConfig c;
  c.lambda_a = get_or<double>(j, "lambda_a", c.lambda_a);
  c.lambda_b = get_or<double>(j, "lambda_b", c.lambda_b);
  c.patch_size = get_or<std::size_t>(j, "patch_size", c.patch_size);
  c.rho = get_or<double>(j, "rho", c.rho);
  c.consts.k1 = get_or<double>(j, "k1", c.consts.k1);
  c.consts.k2 = get_or<double>(j, "k2", c.consts.k2);
  c.dice_threshold = get_or<double>(j, "dice_threshold", c.dice_threshold);
  c.tv_weight = get_or<double>(j, "tv_weight", c.tv_weight);
  c.coverage_min = get_or<double>(j, "coverage_min", c.coverage_min);
  return c;
}

inline mask::SegmenterConfig parse_segmenter(const json& j) {
  mask::SegmenterConfig c;
  c.intensity_threshold = get_or<double>(j, "intensity_threshold", c.intensity_threshold);
  c.morphology_radius = get_or<std::size_t>(j, "morphology_radius", c.morphology_radius);
  const auto conn = get_or<int>(j, "connectivity", 4);
  if (conn != 4 && conn != 8) throw ConfigError("segmenter connectivity must be 4 or 8");
  c.connectivity = conn == 8 ? mask::Connectivity::eight : mask::Connectivity::four;
  c.validate();
  return c;
}

inline correction::OptimizerConfig parse_optimizer(const json& j) {
  correction::OptimizerConfig c;
  c.max_iters = get_or<std::size_t>(j, "max_iters", c.max_iters);
  c.initial_step = get_or<double>(j, "initial_step", c.initial_step);
  c.convergence_tol = get_or<double>(j, "convergence_tol", c.convergence_tol);
  c.clamp_domain = get_or<bool>(j, "clamp_domain", c.clamp_domain);
  c.validate();
  return c;
}

}  // namespace detail

/// Parses a RunConfig document. Missing sections fall back to defaults,
/// except "window", which commands that reconstruct must find.
inline RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  RunConfig cfg;
  try {
    cfg.seed = detail::get_or<std::uint64_t>(doc, "seed", 0);
    cfg.output_dir = detail::get_or<std::string>(doc, "output_dir", "");
    if (doc.contains("phantom")) cfg.phantom = detail::parse_phantom(detail::require_object(doc, "phantom"));
    const json no_fields = json::object();
    const auto& geom = doc.contains("geometry") ? detail::require_object(doc, "geometry") : no_fields;
    cfg.geometry = detail::parse_geometry(geom, cfg.phantom);
    const auto filter = detail::get_or<std::string>(geom, "filter", "ramlak");
    if (filter != "ramlak" && filter != "hann") throw ConfigError("geometry.filter must be \"ramlak\" or \"hann\"");
    cfg.filter = filter == "hann" ? tomo::RampWindow::hann : tomo::RampWindow::none;
    if (doc.contains("trajectory")) cfg.trajectory = detail::parse_trajectory(detail::require_object(doc, "trajectory"), cfg.seed);
    if (doc.contains("window")) {
      const auto& w = detail::require_object(doc, "window");
      cfg.window = tomo::IntensityWindow{w.at("lo").get<double>(), w.at("hi").get<double>()};
      if (!(cfg.window->hi > cfg.window->lo)) throw ConfigError("window.hi must exceed window.lo");
    }
    if (doc.contains("loss")) cfg.loss = detail::parse_loss(detail::require_object(doc, "loss"));
    if (doc.contains("segmenter")) cfg.segmenter = detail::parse_segmenter(detail::require_object(doc, "segmenter"));
    if (doc.contains("prompts")) {
      for (const auto& p : doc.at("prompts")) cfg.prompts.points.push_back({p.at("x").get<std::size_t>(), p.at("y").get<std::size_t>()});
    }
    if (doc.contains("optimizer")) cfg.optimizer = detail::parse_optimizer(detail::require_object(doc, "optimizer"));
    cfg.loss.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace mcorr::harness

#endif  // MCORR_HARNESS_CONFIG_HPP
