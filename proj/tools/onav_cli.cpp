// Command-line front end; talks to the simulator only through the C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "onav/onav_c.h"

namespace {

struct ScenarioArgs {
  std::string scenario = "stationkeeping"; // builtin name or JSON path
  std::string mode;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double duration_days = 0.0;
  std::vector<double> shape;
};

void addScenarioOptions(CLI::App* cmd, ScenarioArgs& a) {
  cmd->add_option("--scenario", a.scenario,
                  "builtin scenario name or path to a scenario JSON file");
  cmd->add_option("--mode", a.mode, "controller mode: constrained|unconstrained");
  cmd->add_option("--seed", a.seed, "base RNG seed")->each([&a](const std::string&) {
    a.seed_set = true;
  });
  cmd->add_option("--duration-days", a.duration_days, "override scenario duration");
  cmd->add_option("--shape", a.shape, "body shape ratios a b c")->expected(3);
}

int fail(onav_status st) {
  std::fprintf(stderr, "error: %s\n", onav_last_error());
  return st == ONAV_ERR_CONFIG || st == ONAV_ERR_IO ? 2 : 1;
}

onav_scenario* makeScenario(const ScenarioArgs& a, int& rc) {
  onav_scenario* s = nullptr;
  onav_status st;
  if (a.scenario.find(".json") != std::string::npos)
    st = onav_scenario_load(a.scenario.c_str(), &s);
  else
    st = onav_scenario_builtin(a.scenario.c_str(), &s);
  if (st != ONAV_OK) {
    rc = fail(st);
    return nullptr;
  }
  if (!a.mode.empty() && (st = onav_scenario_set_mode(s, a.mode.c_str())) != ONAV_OK) {
    rc = fail(st);
    onav_scenario_destroy(s);
    return nullptr;
  }
  if (a.seed_set && (st = onav_scenario_set_seed(s, a.seed)) != ONAV_OK) {
    rc = fail(st);
    onav_scenario_destroy(s);
    return nullptr;
  }
  if (a.duration_days > 0.0 &&
      (st = onav_scenario_set_duration_days(s, a.duration_days)) != ONAV_OK) {
    rc = fail(st);
    onav_scenario_destroy(s);
    return nullptr;
  }
  if (a.shape.size() == 3 &&
      (st = onav_scenario_set_shape(s, a.shape[0], a.shape[1], a.shape[2])) != ONAV_OK) {
    rc = fail(st);
    onav_scenario_destroy(s);
    return nullptr;
  }
  rc = 0;
  return s;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"small-body horizon-navigation closed-loop simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(onav_version()));

  ScenarioArgs run_args, mc_args, sd_args, sa_args, render_args;
  std::string run_out = "out/run", mc_out = "out/mc", sd_out = "out/sweep_distance",
              sa_out = "out/sweep_angle";

  auto* run = app.add_subcommand("run", "run one closed-loop trial");
  addScenarioOptions(run, run_args);
  run->add_option("--out", run_out, "output directory");
  bool run_constrained = false, run_unconstrained = false;
  run->add_flag("--constrained", run_constrained, "shorthand for --mode constrained");
  run->add_flag("--unconstrained", run_unconstrained, "shorthand for --mode unconstrained");

  auto* mc = app.add_subcommand("monte-carlo", "run a Monte Carlo campaign");
  addScenarioOptions(mc, mc_args);
  int trials = 50, jobs = 0;
  mc->add_option("--trials", trials, "number of trials");
  mc->add_option("--jobs", jobs, "worker threads (0 = hardware)");
  mc->add_option("--out", mc_out, "output directory");

  auto* sd = app.add_subcommand("sweep-distance", "measurement accuracy over range");
  addScenarioOptions(sd, sd_args);
  int sd_cases = 100;
  double sd_min = 1.0, sd_max = 30.0;
  sd->add_option("--cases", sd_cases, "number of cases");
  sd->add_option("--min-km", sd_min, "minimum range");
  sd->add_option("--max-km", sd_max, "maximum range");
  sd->add_option("--out", sd_out, "output directory");

  auto* sa = app.add_subcommand("sweep-angle", "measurement accuracy over sun angle");
  addScenarioOptions(sa, sa_args);
  int sa_cases = 100;
  double sa_range = 5.0;
  sa->add_option("--cases", sa_cases, "number of cases");
  sa->add_option("--range-km", sa_range, "fixed range");
  sa->add_option("--out", sa_out, "output directory");

  auto* rd = app.add_subcommand("render", "render one nadir-pointed frame");
  addScenarioOptions(rd, render_args);
  std::vector<double> rd_pos{0.0, -5.0, 0.0};
  double rd_t = 0.0;
  std::string rd_pgm = "frame.pgm", rd_csv = "limb.csv";
  rd->add_option("--pos-km", rd_pos, "spacecraft position x y z [km]")->expected(3);
  rd->add_option("--time-s", rd_t, "simulation time (body rotation phase)");
  rd->add_option("--pgm", rd_pgm, "output PGM path");
  rd->add_option("--limb-csv", rd_csv, "output limb CSV path");

  auto* rp = app.add_subcommand("report", "build SVG plots from a run directory");
  std::string rp_dir = "out/run";
  rp->add_option("--dir", rp_dir, "run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  int rc = 0;
  if (run->parsed()) {
    if (run_constrained) run_args.mode = "constrained";
    if (run_unconstrained) run_args.mode = "unconstrained";
    onav_scenario* s = makeScenario(run_args, rc);
    if (!s) return rc;
    onav_trial_summary sum{};
    const onav_status st = onav_run_trial(s, run_out.c_str(), &sum);
    onav_scenario_destroy(s);
    if (st != ONAV_OK) return fail(st);
    std::printf("verdict=%s delta_v=%.6g m/s fuel=%.6g kg max_accel=%.6g m/s^2\n",
                sum.verdict == 0 ? "success" : (sum.verdict == 1 ? "diverged" : "error"),
                sum.delta_v_mps, sum.fuel_kg, sum.max_accel_mps2);
    return 0;
  }
  if (mc->parsed()) {
    onav_scenario* s = makeScenario(mc_args, rc);
    if (!s) return rc;
    onav_campaign_stats stats{};
    const onav_status st = onav_monte_carlo(s, trials, jobs, mc_out.c_str(), &stats);
    onav_scenario_destroy(s);
    if (st != ONAV_OK) return fail(st);
    std::printf("trials=%d success=%d rate=%.4f inside_bound=%.4f\n", stats.n_trials,
                stats.n_success, stats.success_rate, stats.inside_bound_fraction);
    return 0;
  }
  if (sd->parsed()) {
    onav_scenario* s = makeScenario(sd_args, rc);
    if (!s) return rc;
    double crossing = -1.0;
    const onav_status st =
        onav_sweep_distance(s, sd_cases, sd_min, sd_max, sd_out.c_str(), &crossing);
    onav_scenario_destroy(s);
    if (st != ONAV_OK) return fail(st);
    std::printf("crossing_range_km=%.4f\n", crossing);
    return 0;
  }
  if (sa->parsed()) {
    onav_scenario* s = makeScenario(sa_args, rc);
    if (!s) return rc;
    const onav_status st = onav_sweep_angle(s, sa_cases, sa_range, sa_out.c_str());
    onav_scenario_destroy(s);
    if (st != ONAV_OK) return fail(st);
    std::printf("wrote %s/sweep.csv\n", sa_out.c_str());
    return 0;
  }
  if (rd->parsed()) {
    onav_scenario* s = makeScenario(render_args, rc);
    if (!s) return rc;
    int n_limb = 0;
    const onav_status st = onav_render(s, rd_pos[0], rd_pos[1], rd_pos[2], rd_t,
                                       rd_pgm.c_str(), rd_csv.c_str(), &n_limb);
    onav_scenario_destroy(s);
    if (st != ONAV_OK) return fail(st);
    std::printf("limb_points=%d\n", n_limb);
    return 0;
  }
  if (rp->parsed()) {
    const onav_status st = onav_report(rp_dir.c_str());
    if (st != ONAV_OK) return fail(st);
    std::printf("report written to %s\n", rp_dir.c_str());
    return 0;
  }
  return 2;
}
