#include "onav/onav_c.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "onav/mission.hpp"

using namespace onav;

struct onav_scenario {
  ScenarioConfig cfg;
};

namespace {

thread_local std::string g_last_error;

onav_status mapCode(ErrorCode c) {
  switch (c) {
    case ErrorCode::DomainError: return ONAV_ERR_DOMAIN;
    case ErrorCode::SingularGeometry: return ONAV_ERR_SINGULAR;
    case ErrorCode::DegenerateOrbit:
    case ErrorCode::DegenerateLimb: return ONAV_ERR_DEGENERATE;
    case ErrorCode::InfeasibleGeometry: return ONAV_ERR_INFEASIBLE;
    case ErrorCode::PropagationFailure: return ONAV_ERR_PROPAGATION;
    case ErrorCode::FilterFailure: return ONAV_ERR_FILTER;
    case ErrorCode::IoError: return ONAV_ERR_IO;
    case ErrorCode::ConfigError: return ONAV_ERR_CONFIG;
  }
  return ONAV_ERR_INTERNAL;
}

template <typename F>
onav_status guard(F&& fn) {
  try {
    fn();
    return ONAV_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return mapCode(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ONAV_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ONAV_ERR_INTERNAL;
  }
}

void ensureDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);
}

int verdictCode(Verdict v) {
  switch (v) {
    case Verdict::Success: return 0;
    case Verdict::Diverged: return 1;
    default: return 2;
  }
}

} // namespace

extern "C" {

const char* onav_version(void) { return "0.1.0"; }

const char* onav_last_error(void) { return g_last_error.c_str(); }

onav_status onav_scenario_builtin(const char* name, onav_scenario** out) {
  return guard([&] {
    if (!name || !out) throw Error(ErrorCode::ConfigError, "null argument");
    ScenarioConfig cfg;
    if (std::strcmp(name, "stationkeeping") == 0) cfg = stationkeepingScenario();
    else if (std::strcmp(name, "approach") == 0) cfg = approachScenario();
    else throw Error(ErrorCode::ConfigError, std::string("unknown scenario ") + name);
    *out = new onav_scenario{cfg};
  });
}

onav_status onav_scenario_load(const char* json_path, onav_scenario** out) {
  return guard([&] {
    if (!json_path || !out) throw Error(ErrorCode::ConfigError, "null argument");
    *out = new onav_scenario{scenarioFromJsonFile(json_path)};
  });
}

onav_status onav_scenario_save(const onav_scenario* s, const char* json_path) {
  return guard([&] {
    if (!s || !json_path) throw Error(ErrorCode::ConfigError, "null argument");
    std::ofstream f(json_path);
    if (!f) throw Error(ErrorCode::IoError, std::string("cannot open ") + json_path);
    f << scenarioToJson(s->cfg) << '\n';
  });
}

void onav_scenario_destroy(onav_scenario* s) { delete s; }

onav_status onav_scenario_set_mode(onav_scenario* s, const char* mode) {
  return guard([&] {
    if (!s || !mode) throw Error(ErrorCode::ConfigError, "null argument");
    if (std::strcmp(mode, "constrained") == 0) s->cfg.mode = ControllerMode::Constrained;
    else if (std::strcmp(mode, "unconstrained") == 0)
      s->cfg.mode = ControllerMode::Unconstrained;
    else throw Error(ErrorCode::ConfigError, "mode must be (un)constrained");
  });
}

onav_status onav_scenario_set_seed(onav_scenario* s, uint64_t seed) {
  return guard([&] {
    if (!s) throw Error(ErrorCode::ConfigError, "null argument");
    s->cfg.seed = seed;
  });
}

onav_status onav_scenario_set_shape(onav_scenario* s, double a, double b, double c) {
  return guard([&] {
    if (!s) throw Error(ErrorCode::ConfigError, "null argument");
    s->cfg.body.shape_ratios = Vec3(a, b, c);
    s->cfg.body.validate();
  });
}

onav_status onav_scenario_set_duration_days(onav_scenario* s, double days) {
  return guard([&] {
    if (!s || !(days > 0.0)) throw Error(ErrorCode::ConfigError, "bad duration");
    s->cfg.duration_days = days;
  });
}

onav_status onav_run_trial(const onav_scenario* s, const char* out_dir,
                           onav_trial_summary* summary) {
  return guard([&] {
    if (!s || !out_dir) throw Error(ErrorCode::ConfigError, "null argument");
    ensureDir(out_dir);
    const std::filesystem::path dir(out_dir);
    const TrialResult r = runClosedLoop(s->cfg, s->cfg.seed);
    writeTrialCsv(r, (dir / "trial.csv").string());
    writeControllerCsv(r, (dir / "controller.csv").string());
    writeFilterCsv(r, (dir / "filter.csv").string());
    writeTrialSummaryJson(r, s->cfg, (dir / "summary.json").string());
    writeManifest(out_dir, "run", scenarioToJson(s->cfg), s->cfg.seed,
                  {"trial.csv", "controller.csv", "filter.csv", "summary.json"});
    if (summary) {
      summary->verdict = verdictCode(r.verdict);
      summary->delta_v_mps = r.delta_v_mps;
      summary->fuel_kg = r.fuel_kg;
      summary->max_accel_mps2 = r.max_accel_mps2;
      summary->inside_bound_fraction = r.inside_bound_fraction;
    }
  });
}

onav_status onav_monte_carlo(const onav_scenario* s, int n_trials, int parallelism,
                             const char* out_dir, onav_campaign_stats* stats) {
  return guard([&] {
    if (!s || !out_dir) throw Error(ErrorCode::ConfigError, "null argument");
    ensureDir(out_dir);
    const std::filesystem::path dir(out_dir);
    const CampaignStats cs = runMonteCarlo(s->cfg, n_trials, s->cfg.seed, parallelism);
    writeCampaignCsv(cs, (dir / "campaign_summary.csv").string());
    writeCampaignStatsJson(cs, (dir / "campaign_stats.json").string());
    writeQuantilesCsv(cs, (dir / "quantiles.csv").string());
    writeDvHistogramCsv(cs, (dir / "dv_histogram.csv").string());
    writeManifest(out_dir, "monte-carlo", scenarioToJson(s->cfg), s->cfg.seed,
                  {"campaign_summary.csv", "campaign_stats.json", "quantiles.csv",
                   "dv_histogram.csv"});
    if (stats) {
      stats->n_trials = cs.n_trials;
      stats->n_success = cs.n_success;
      stats->success_rate = cs.success_rate;
      stats->inside_bound_fraction = cs.inside_bound_fraction;
    }
  });
}

onav_status onav_sweep_distance(const onav_scenario* s, int n_cases,
                                double range_min_km, double range_max_km,
                                const char* out_dir, double* crossing_km) {
  return guard([&] {
    if (!s || !out_dir) throw Error(ErrorCode::ConfigError, "null argument");
    ensureDir(out_dir);
    const std::filesystem::path dir(out_dir);
    const SweepResult sw =
        sweepDistance(s->cfg, n_cases, range_min_km, range_max_km, s->cfg.seed);
    writeSweepCsv(sw, "range_km", (dir / "sweep.csv").string());
    {
      std::ofstream f((dir / "sweep_stats.json").string());
      f << "{\n  \"crossing_range_km\": " << sw.crossing_range_km << "\n}\n";
    }
    writeManifest(out_dir, "sweep-distance", scenarioToJson(s->cfg), s->cfg.seed,
                  {"sweep.csv", "sweep_stats.json"});
    if (crossing_km) *crossing_km = sw.crossing_range_km;
  });
}

onav_status onav_sweep_angle(const onav_scenario* s, int n_cases, double range_km,
                             const char* out_dir) {
  return guard([&] {
    if (!s || !out_dir) throw Error(ErrorCode::ConfigError, "null argument");
    ensureDir(out_dir);
    const std::filesystem::path dir(out_dir);
    const SweepResult sw = sweepAngle(s->cfg, n_cases, range_km, s->cfg.seed);
    writeSweepCsv(sw, "angle_deg", (dir / "sweep.csv").string());
    writeManifest(out_dir, "sweep-angle", scenarioToJson(s->cfg), s->cfg.seed,
                  {"sweep.csv"});
  });
}

onav_status onav_render(const onav_scenario* s, double pos_x_km, double pos_y_km,
                        double pos_z_km, double t_s, const char* pgm_path,
                        const char* limb_csv_path, int* n_limb) {
  return guard([&] {
    if (!s || !pgm_path || !limb_csv_path)
      throw Error(ErrorCode::ConfigError, "null argument");
    const Vec3 pos(pos_x_km, pos_y_km, pos_z_km);
    RenderOptions ropts;
    ropts.noise_sigma = s->cfg.opnav.noise_sigma;
    ropts.seed = s->cfg.seed;
    ropts.psf_sigma_px = s->cfg.opnav.psf_sigma_px;
    const GrayImage img =
        render(s->cfg.body, nadirPose(pos), s->cfg.camera, t_s, ropts);
    writePgm(img, pgm_path);
    const LimbPointSet limb = detectEdges(img, s->cfg.opnav.rel_threshold,
                                          s->cfg.opnav.abs_min_gradient);
    std::ofstream f(limb_csv_path);
    if (!f) throw Error(ErrorCode::IoError, std::string("cannot open ") + limb_csv_path);
    f << "u,v\n";
    for (const auto& p : limb.points) f << p.x() << ',' << p.y() << '\n';
    if (n_limb) *n_limb = static_cast<int>(limb.count());
  });
}

onav_status onav_report(const char* run_dir) {
  return guard([&] {
    if (!run_dir) throw Error(ErrorCode::ConfigError, "null argument");
    writeReportSvgs(run_dir);
  });
}

} // extern "C"
