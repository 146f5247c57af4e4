#include "onav/mission.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace onav {

void ScenarioConfig::validate() const {
  body.validate();
  camera.validate();
  if (!(duration_days > 0.0) || !(measurement_interval_hr > 0.0))
    throw Error(ErrorCode::ConfigError, "duration and interval must be positive");
  if (control_substeps < 1 || divergence_samples < 2)
    throw Error(ErrorCode::ConfigError, "bad substep configuration");
  if (!(target.radius_km > 0.0))
    throw Error(ErrorCode::ConfigError, "target radius must be positive");
}

ScenarioConfig stationkeepingScenario() {
  ScenarioConfig cfg;
  cfg.name = "stationkeeping";
  cfg.body = bennuLikeBody();
  cfg.r0_km = Vec3(1.0214, 0.0, -2.0429);
  cfg.v0_mmps = Vec3(40.493, 40.493, 40.493);
  cfg.gains << 1e-2, 1e-3, 1e-3, 1e-4, 1e-3, 1e-4;
  cfg.cone_weight = 10.0;
  cfg.duration_days = 3.0;
  cfg.success.v_floor = 2e-4;
  return cfg;
}

ScenarioConfig approachScenario() {
  ScenarioConfig cfg;
  cfg.name = "approach";
  cfg.body = bennuLikeBody();
  cfg.r0_km = Vec3(0.0, 0.0, -4.5964);
  cfg.v0_mmps = Vec3(-4.8927, 0.0, 2.4464);
  cfg.gains << 1e-3, 1e-3, 1e-3, 1e-3, 1e-7, 1e-7;
  cfg.cone_weight = 100.0;
  cfg.duration_days = 5.0;
  cfg.success.v_floor = 2e-4;
  return cfg;
}

Vec6 targetSlowElements(const ScenarioConfig& cfg) {
  const Normalization n(cfg.body);
  const Vec3 r0 = n.lengthToNorm(cfg.r0_km);
  const Vec3 v0 = n.velocityToNorm(cfg.v0_mmps * 1e-6);
  const Vec3 h0 = r0.cross(v0);
  if (!(h0.norm() > 0.0))
    throw Error(ErrorCode::ConfigError, "initial state has no angular momentum");

  // Tilt the target orbit normal toward +x until the orbit plane keeps the
  // configured clearance angle from the keep-out axis.
  const double gamma = kPi / 2.0 - deg2rad(cfg.target.plane_angle_deg);
  Vec3 perp = h0 - h0.dot(Vec3::UnitX()) * Vec3::UnitX();
  if (perp.norm() < 1e-12) perp = Vec3::UnitY();
  perp.normalize();
  const Vec3 hhat = std::cos(gamma) * Vec3::UnitX() + std::sin(gamma) * perp;

  const double a_n = n.lengthToNorm(cfg.target.radius_km);
  Vec6 target;
  target.head<3>() = std::sqrt(a_n) * hhat; // circular: h = sqrt(mu a), mu = 1
  target.tail<3>() = Vec3::Zero();
  return target;
}

DivergenceCheck detectDivergence(const Vec3& r, const ConstraintParams& cp) {
  DivergenceCheck out;
  const double rn = r.norm();
  if (rn < cp.r_min) {
    out.violated = true;
    out.reason = "r_min";
    return out;
  }
  if (rn > cp.r_max) {
    out.violated = true;
    out.reason = "r_max";
    return out;
  }
  const double cosang = r.x() / rn;
  if (std::acos(std::clamp(cosang, -1.0, 1.0)) < cp.cone_alpha) {
    out.violated = true;
    out.reason = "cone";
  }
  return out;
}

bool successCriterion(double V_terminal, double V_initial, const SuccessSpec& spec) {
  return V_terminal <= std::max(spec.fraction * V_initial, spec.v_floor);
}

FuelUse fuelMass(const std::vector<double>& u_norms_mps2, double dt_s, double isp_s,
                 double m_sc_kg) {
  if (!(isp_s > 0.0) || !(m_sc_kg > 0.0))
    throw Error(ErrorCode::DomainError, "Isp and mass must be positive");
  double dv = 0.0;
  for (double u : u_norms_mps2) dv += u * dt_s;
  FuelUse f;
  f.delta_v_mps = dv;
  f.delta_m_kg = m_sc_kg * dv / (isp_s * 9.80665);
  return f;
}

TrialResult runClosedLoop(const ScenarioConfig& cfg, std::uint64_t trial_seed) {
  cfg.validate();
  const Normalization norm(cfg.body);
  const double beta = srpBeta(cfg.body).nondim;

  ConstraintParams cp = ConstraintParams::forBody(cfg.body, cfg.cone_weight);
  cp.sharpness = cfg.penalty_sharpness;
  if (cfg.mode == ControllerMode::Unconstrained) cp.weights(2) = 0.0;

  ControllerConfig ctrl;
  ctrl.gains = cfg.gains;
  ctrl.target = targetSlowElements(cfg);
  ctrl.u_max = norm.accelToNorm(cfg.u_max_mps2 * 1e-3);
  ctrl.mu = 1.0;

  const double interval_s = cfg.measurement_interval_hr * 3600.0;
  const double interval_n = norm.timeToNorm(interval_s);
  const int n_epochs =
      static_cast<int>(std::round(cfg.duration_days * 86400.0 / interval_s));

  IntegratorOptions iopts; // default fixed-step RK4, <= period/1000

  // truth and filter initialization (normalized)
  HillState truth{norm.lengthToNorm(cfg.r0_km),
                  norm.velocityToNorm(cfg.v0_mmps * 1e-6)};
  Rng init_rng(deriveSeed(trial_seed, 0xE0));
  Vec3 init_err_km;
  for (int i = 0; i < 3; ++i)
    init_err_km(i) = cfg.initial_estimate_sigma_m * 1e-3 * init_rng.gaussian();

  FilterState fs;
  fs.x_hat.head<3>() = truth.r + norm.lengthToNorm(init_err_km);
  fs.x_hat.tail<3>() = truth.v;
  Vec6 P0 = cfg.P0_diag;
  P0.head<3>() /= norm.unitLength() * norm.unitLength();
  P0.tail<3>() /= norm.unitVelocity() * norm.unitVelocity();
  fs.P = P0.asDiagonal();

  EkfNoiseConfig noise;
  Vec6 Qn = cfg.Q_diag;
  Qn.head<3>() /= norm.unitLength() * norm.unitLength();
  Qn.tail<3>() /= norm.unitVelocity() * norm.unitVelocity();
  noise.Q = Qn.asDiagonal();
  noise.cov_substep = norm.timeToNorm(60.0);

  TrialResult res;
  res.V0 = (cartToMilankovitch(truth, 1.0).slow() - ctrl.target)
               .dot(ctrl.gains.asDiagonal() *
                    (cartToMilankovitch(truth, 1.0).slow() - ctrl.target));

  std::vector<double> u_hist_mps2;
  u_hist_mps2.reserve(static_cast<std::size_t>(n_epochs));
  int inside = 0, measured_epochs = 0;

  auto makeRecord = [&](double t_hr, const HillState& tr, const FilterState& f,
                        const ControlOutput& co,
                        const std::optional<OpNavMeasurement>& meas) {
    EpochRecord rec;
    rec.t_hr = t_hr;
    rec.truth_r_km = norm.lengthFromNorm(tr.r);
    rec.truth_v_mmps = norm.velocityFromNorm(tr.v) * 1e6;
    rec.est_r_km = norm.lengthFromNorm(Vec3(f.x_hat.head<3>()));
    rec.est_v_mmps = norm.velocityFromNorm(Vec3(f.x_hat.tail<3>())) * 1e6;
    if (meas) {
      rec.meas_km = meas->z_hill;
      rec.meas_valid = true;
      rec.sigma_pix = meas->sigma_pix;
      rec.n_points = meas->n_points;
    }
    rec.err_norm_km = (rec.truth_r_km - rec.est_r_km).norm();
    FilterState fkm = f;
    fkm.P.topLeftCorner<3, 3>() *= norm.unitLength() * norm.unitLength();
    rec.bound_km = errorBound3Sigma(fkm);
    rec.u_mps2 = norm.accelFromNorm(co.u) * 1e3;
    rec.u_norm_mps2 = rec.u_mps2.norm();
    rec.V = co.V;
    rec.V_hat = co.V_hat;
    rec.g = co.g;
    rec.P = co.P;
    rec.saturated = co.saturated;
    rec.angle_deg =
        rad2deg(std::acos(std::clamp(tr.r.x() / tr.r.norm(), -1.0, 1.0)));
    return rec;
  };

  try {
    bool diverged = false;
    for (int k = 0; k < n_epochs && !diverged; ++k) {
      const double sub_n = interval_n / cfg.control_substeps;
      ControlOutput co_first;
      for (int s = 0; s < cfg.control_substeps; ++s) {
        // controller acts on the filter's current state estimate
        const HillState est = fs.asHillState();
        const MilankovitchState mest = cartToMilankovitch(est, 1.0);
        const ControlOutput co = control(mest.slow(), ctrl, cp, est.r, est.v);
        if (s == 0) co_first = co;

        // truth propagation with the held control, divergence checked along the way
        auto traj = propagate(
            truth, 0.0, sub_n, beta,
            [&co](double, const HillState&) { return co.u; }, iopts,
            std::max(2, cfg.divergence_samples / cfg.control_substeps + 1));
        for (const auto& pt : traj) {
          const auto div = detectDivergence(pt.x.r, cp);
          if (div.violated) {
            diverged = true;
            res.verdict_reason = div.reason;
            res.diverged_at_hr =
                (k + (s + pt.t / sub_n) / cfg.control_substeps) *
                cfg.measurement_interval_hr;
            break;
          }
        }
        truth = traj.back().x;

        // filter prediction with the same control feed-through
        EkfNoiseConfig sub_noise = noise;
        sub_noise.Q = noise.Q * (1.0 / cfg.control_substeps);
        fs = ekfPredict(fs, sub_n, beta, co.u, sub_noise, iopts);

        u_hist_mps2.push_back((norm.accelFromNorm(co.u) * 1e3).norm());
        if (diverged) break;
      }

      // measurement at the end of the interval, from the true pose
      const double t_s = (k + 1) * interval_s;
      const Vec3 truth_pos_km = norm.lengthFromNorm(truth.r);
      std::optional<OpNavMeasurement> meas;
      if (!diverged) {
        meas = measure(truth_pos_km, cfg.body, cfg.camera, t_s,
                       deriveSeed(trial_seed, 1000 + static_cast<std::uint64_t>(k)),
                       cfg.opnav);
        if (meas) {
          const Vec3 z_n = norm.lengthToNorm(meas->z_hill);
          const Mat3 R_n =
              meas->R_hill / (norm.unitLength() * norm.unitLength());
          fs = ekfUpdate(fs, z_n, R_n);
        }
      }

      EpochRecord rec = makeRecord((k + 1) * cfg.measurement_interval_hr, truth,
                                   fs, co_first, meas);
      res.history.push_back(rec);
      ++measured_epochs;
      if (rec.err_norm_km <= rec.bound_km) ++inside;
    }

    const FuelUse fuel =
        fuelMass(u_hist_mps2, interval_s / cfg.control_substeps, cfg.isp_s,
                 cfg.spacecraft_mass_kg);
    res.delta_v_mps = fuel.delta_v_mps;
    res.fuel_kg = fuel.delta_m_kg;
    res.max_accel_mps2 =
        u_hist_mps2.empty() ? 0.0
                            : *std::max_element(u_hist_mps2.begin(), u_hist_mps2.end());
    res.inside_bound_fraction =
        measured_epochs > 0 ? static_cast<double>(inside) / measured_epochs : 0.0;

    const Vec6 slowT = cartToMilankovitch(truth, 1.0).slow();
    res.VT = (slowT - ctrl.target)
                 .dot(ctrl.gains.asDiagonal() * (slowT - ctrl.target));

    if (diverged) {
      res.verdict = Verdict::Diverged;
    } else if (successCriterion(res.VT, res.V0, cfg.success)) {
      res.verdict = Verdict::Success;
    } else {
      res.verdict = Verdict::Diverged;
      res.verdict_reason = "target_not_reached";
    }
  } catch (const Error& e) {
    res.verdict = Verdict::Error;
    res.verdict_reason = e.what();
  }
  return res;
}

CampaignStats runMonteCarlo(const ScenarioConfig& cfg, int n_trials,
                            std::uint64_t base_seed, int parallelism) {
  if (n_trials < 1) throw Error(ErrorCode::ConfigError, "need at least one trial");
  CampaignStats stats;
  stats.n_trials = n_trials;
  stats.trials.resize(static_cast<std::size_t>(n_trials));

  const int workers = std::max(1, parallelism);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_trials) return;
      stats.trials[static_cast<std::size_t>(i)] =
          runClosedLoop(cfg, deriveSeed(base_seed, static_cast<std::uint64_t>(i)));
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // aggregate
  int inside_num = 0, inside_den = 0;
  std::size_t max_epochs = 0;
  for (const auto& tr : stats.trials) {
    if (tr.verdict == Verdict::Success) ++stats.n_success;
    max_epochs = std::max(max_epochs, tr.history.size());
  }
  stats.success_rate = static_cast<double>(stats.n_success) / n_trials;

  stats.t_hr.resize(max_epochs);
  stats.err_med.resize(max_epochs);
  stats.err_q10.resize(max_epochs);
  stats.err_q90.resize(max_epochs);
  stats.bound_med.resize(max_epochs);
  auto quantile = [](std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double idx = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (idx - lo);
  };
  for (std::size_t e = 0; e < max_epochs; ++e) {
    std::vector<double> errs, bounds;
    for (const auto& tr : stats.trials) {
      if (e < tr.history.size()) {
        errs.push_back(tr.history[e].err_norm_km);
        bounds.push_back(tr.history[e].bound_km);
        stats.t_hr[e] = tr.history[e].t_hr;
        ++inside_den;
        if (tr.history[e].err_norm_km <= tr.history[e].bound_km) ++inside_num;
      }
    }
    std::vector<double> tmp = errs;
    stats.err_med[e] = quantile(tmp, 0.5);
    tmp = errs;
    stats.err_q10[e] = quantile(tmp, 0.1);
    tmp = errs;
    stats.err_q90[e] = quantile(tmp, 0.9);
    stats.bound_med[e] = quantile(bounds, 0.5);
  }
  stats.inside_bound_fraction =
      inside_den > 0 ? static_cast<double>(inside_num) / inside_den : 0.0;

  // delta-v histogram over 10 uniform bins
  double dv_max = 0.0;
  for (const auto& tr : stats.trials) dv_max = std::max(dv_max, tr.delta_v_mps);
  const int nbins = 10;
  const double width = dv_max > 0.0 ? dv_max / nbins : 1.0;
  stats.dv_bin_edges_mps.resize(nbins + 1);
  stats.dv_bin_counts.assign(nbins, 0);
  for (int b = 0; b <= nbins; ++b) stats.dv_bin_edges_mps[b] = b * width;
  for (const auto& tr : stats.trials) {
    int b = std::min(nbins - 1, static_cast<int>(tr.delta_v_mps / width));
    if (b < 0) b = 0;
    ++stats.dv_bin_counts[static_cast<std::size_t>(b)];
  }

  // keep summaries, drop bulky histories except quantile inputs already used
  for (auto& tr : stats.trials) tr.history.clear();
  return stats;
}

namespace {

SweepRow sweepCase(const ScenarioConfig& cfg, const Vec3& pos_km, double indep,
                   std::uint64_t seed) {
  SweepRow row;
  row.independent = indep;
  const auto meas = measure(pos_km, cfg.body, cfg.camera, 0.0, seed, cfg.opnav);
  if (!meas) {
    row.error_norm_km = pos_km.norm(); // unusable: error equals true distance
    row.bound_3sigma_km = 0.0;
    row.n_points = 0;
    row.valid = false;
    return row;
  }
  row.error_norm_km = (meas->z_hill - pos_km).norm();
  Eigen::SelfAdjointEigenSolver<Mat3> es(meas->R_hill);
  row.bound_3sigma_km = 3.0 * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  row.n_points = meas->n_points;
  row.valid = true;
  return row;
}

} // namespace

SweepResult sweepDistance(const ScenarioConfig& cfg, int n_cases, double range_min_km,
                          double range_max_km, std::uint64_t seed) {
  if (n_cases < 2) throw Error(ErrorCode::ConfigError, "need at least 2 cases");
  SweepResult out;
  out.rows.reserve(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i) {
    const double d = range_min_km +
                     (range_max_km - range_min_km) * i / (n_cases - 1);
    // side-on: spacecraft on the -y axis, half the body lit
    const Vec3 pos(0.0, -d, 0.0);
    out.rows.push_back(
        sweepCase(cfg, pos, d, deriveSeed(seed, static_cast<std::uint64_t>(i))));
  }
  for (const auto& row : out.rows) {
    if (row.valid && row.bound_3sigma_km >= 0.10 * row.independent) {
      out.crossing_range_km = row.independent;
      break;
    }
  }
  return out;
}

SweepResult sweepAngle(const ScenarioConfig& cfg, int n_cases, double range_km,
                       std::uint64_t seed) {
  if (n_cases < 2) throw Error(ErrorCode::ConfigError, "need at least 2 cases");
  SweepResult out;
  out.rows.reserve(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i) {
    const double ang_deg = -90.0 + 180.0 * i / (n_cases - 1);
    const double a = deg2rad(ang_deg);
    // 0 deg side-on (-y), +90 dark side (+x), -90 full moon (-x)
    const Vec3 pos = range_km * Vec3(std::sin(a), -std::cos(a), 0.0);
    out.rows.push_back(
        sweepCase(cfg, pos, ang_deg, deriveSeed(seed, static_cast<std::uint64_t>(i))));
  }
  return out;
}

} // namespace onav
