#include <fstream>
#include <sstream>

#include <json.hpp>

#include "onav/mission.hpp"

namespace onav {

using nlohmann::json;

namespace {

Vec3 vec3FromJson(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::ConfigError, "expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec6 vec6FromJson(const json& j) {
  if (!j.is_array() || j.size() != 6)
    throw Error(ErrorCode::ConfigError, "expected a 6-element array");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json toJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json toJson(const Vec6& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v(i));
  return a;
}

} // namespace

ScenarioConfig scenarioFromJsonString(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  if (j.contains("name")) cfg.name = j["name"].get<std::string>();
  if (j.contains("body")) {
    const auto& b = j["body"];
    if (b.contains("mu")) cfg.body.mu = b["mu"].get<double>();
    if (b.contains("mu_sun")) cfg.body.mu_sun = b["mu_sun"].get<double>();
    if (b.contains("G1")) cfg.body.G1 = b["G1"].get<double>();
    if (b.contains("m_over_A")) cfg.body.m_over_A = b["m_over_A"].get<double>();
    if (b.contains("R_km")) cfg.body.R = b["R_km"].get<double>();
    if (b.contains("radius_km")) cfg.body.radius = b["radius_km"].get<double>();
    if (b.contains("shape_ratios")) cfg.body.shape_ratios = vec3FromJson(b["shape_ratios"]);
    if (b.contains("rotation_axis"))
      cfg.body.rotation_axis = vec3FromJson(b["rotation_axis"]).normalized();
    if (b.contains("rotation_period_hr"))
      cfg.body.rotation_period = b["rotation_period_hr"].get<double>() * 3600.0;
  }
  if (j.contains("initial_truth")) {
    const auto& s = j["initial_truth"];
    cfg.r0_km = vec3FromJson(s.at("r_km"));
    cfg.v0_mmps = vec3FromJson(s.at("v_mmps"));
  }
  if (j.contains("initial_estimate_sigma_m"))
    cfg.initial_estimate_sigma_m = j["initial_estimate_sigma_m"].get<double>();
  if (j.contains("P0_diag")) cfg.P0_diag = vec6FromJson(j["P0_diag"]);
  if (j.contains("process_noise_diag")) cfg.Q_diag = vec6FromJson(j["process_noise_diag"]);
  if (j.contains("target")) {
    const auto& t = j["target"];
    if (t.contains("radius_km")) cfg.target.radius_km = t["radius_km"].get<double>();
    if (t.contains("plane_angle_deg"))
      cfg.target.plane_angle_deg = t["plane_angle_deg"].get<double>();
  }
  if (j.contains("gains")) cfg.gains = vec6FromJson(j["gains"]);
  if (j.contains("cone_weight")) cfg.cone_weight = j["cone_weight"].get<double>();
  if (j.contains("penalty_sharpness"))
    cfg.penalty_sharpness = vec3FromJson(j["penalty_sharpness"]);
  if (j.contains("u_max_mps2")) cfg.u_max_mps2 = j["u_max_mps2"].get<double>();
  if (j.contains("measurement_interval_hr"))
    cfg.measurement_interval_hr = j["measurement_interval_hr"].get<double>();
  if (j.contains("duration_days")) cfg.duration_days = j["duration_days"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("controller_mode")) {
    const std::string m = j["controller_mode"].get<std::string>();
    if (m == "constrained") cfg.mode = ControllerMode::Constrained;
    else if (m == "unconstrained") cfg.mode = ControllerMode::Unconstrained;
    else throw Error(ErrorCode::ConfigError, "controller_mode must be (un)constrained");
  }
  if (j.contains("camera")) {
    const auto& c = j["camera"];
    if (c.contains("fov_deg")) cfg.camera.fov_deg = c["fov_deg"].get<double>();
    if (c.contains("S")) cfg.camera.S = c["S"].get<int>();
    if (c.contains("alpha_skew")) cfg.camera.alpha_skew = c["alpha_skew"].get<double>();
    if (c.contains("dx")) cfg.camera.dx = c["dx"].get<double>();
    if (c.contains("dy")) cfg.camera.dy = c["dy"].get<double>();
  }
  if (j.contains("opnav")) {
    const auto& o = j["opnav"];
    if (o.contains("rel_threshold")) cfg.opnav.rel_threshold = o["rel_threshold"].get<double>();
    if (o.contains("abs_min_gradient"))
      cfg.opnav.abs_min_gradient = o["abs_min_gradient"].get<double>();
    if (o.contains("noise_sigma")) cfg.opnav.noise_sigma = o["noise_sigma"].get<double>();
    if (o.contains("psf_sigma_px")) cfg.opnav.psf_sigma_px = o["psf_sigma_px"].get<double>();
    if (o.contains("min_limb_points"))
      cfg.opnav.min_limb_points = o["min_limb_points"].get<int>();
    if (o.contains("sigma_pix_floor"))
      cfg.opnav.sigma_pix_floor = o["sigma_pix_floor"].get<double>();
  }
  if (j.contains("success")) {
    const auto& s = j["success"];
    if (s.contains("fraction")) cfg.success.fraction = s["fraction"].get<double>();
    if (s.contains("v_floor")) cfg.success.v_floor = s["v_floor"].get<double>();
  }
  if (j.contains("isp_s")) cfg.isp_s = j["isp_s"].get<double>();
  if (j.contains("spacecraft_mass_kg"))
    cfg.spacecraft_mass_kg = j["spacecraft_mass_kg"].get<double>();
  if (j.contains("control_substeps")) cfg.control_substeps = j["control_substeps"].get<int>();
  if (j.contains("divergence_samples"))
    cfg.divergence_samples = j["divergence_samples"].get<int>();

  cfg.validate();
  return cfg;
}

ScenarioConfig scenarioFromJsonFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return scenarioFromJsonString(ss.str());
}

std::string scenarioToJson(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["body"] = {
      {"mu", cfg.body.mu},
      {"mu_sun", cfg.body.mu_sun},
      {"G1", cfg.body.G1},
      {"m_over_A", cfg.body.m_over_A},
      {"R_km", cfg.body.R},
      {"radius_km", cfg.body.radius},
      {"shape_ratios", toJson(cfg.body.shape_ratios)},
      {"rotation_axis", toJson(cfg.body.rotation_axis)},
      {"rotation_period_hr", cfg.body.rotation_period / 3600.0},
  };
  j["initial_truth"] = {{"r_km", toJson(cfg.r0_km)}, {"v_mmps", toJson(cfg.v0_mmps)}};
  j["initial_estimate_sigma_m"] = cfg.initial_estimate_sigma_m;
  j["P0_diag"] = toJson(cfg.P0_diag);
  j["process_noise_diag"] = toJson(cfg.Q_diag);
  j["target"] = {{"radius_km", cfg.target.radius_km},
                 {"plane_angle_deg", cfg.target.plane_angle_deg}};
  j["gains"] = toJson(cfg.gains);
  j["cone_weight"] = cfg.cone_weight;
  j["penalty_sharpness"] = toJson(cfg.penalty_sharpness);
  j["u_max_mps2"] = cfg.u_max_mps2;
  j["measurement_interval_hr"] = cfg.measurement_interval_hr;
  j["duration_days"] = cfg.duration_days;
  j["seed"] = cfg.seed;
  j["controller_mode"] =
      cfg.mode == ControllerMode::Constrained ? "constrained" : "unconstrained";
  j["camera"] = {{"fov_deg", cfg.camera.fov_deg},
                 {"S", cfg.camera.S},
                 {"alpha_skew", cfg.camera.alpha_skew},
                 {"dx", cfg.camera.dx},
                 {"dy", cfg.camera.dy}};
  j["opnav"] = {{"rel_threshold", cfg.opnav.rel_threshold},
                {"abs_min_gradient", cfg.opnav.abs_min_gradient},
                {"noise_sigma", cfg.opnav.noise_sigma},
                {"psf_sigma_px", cfg.opnav.psf_sigma_px},
                {"min_limb_points", cfg.opnav.min_limb_points},
                {"sigma_pix_floor", cfg.opnav.sigma_pix_floor}};
  j["success"] = {{"fraction", cfg.success.fraction}, {"v_floor", cfg.success.v_floor}};
  j["isp_s"] = cfg.isp_s;
  j["spacecraft_mass_kg"] = cfg.spacecraft_mass_kg;
  j["control_substeps"] = cfg.control_substeps;
  j["divergence_samples"] = cfg.divergence_samples;
  return j.dump(2);
}

} // namespace onav
