#ifndef ONAV_MISSION_HPP
#define ONAV_MISSION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "onav/control.hpp"
#include "onav/ekf.hpp"
#include "onav/opnav.hpp"

namespace onav {

enum class ControllerMode { Constrained, Unconstrained };

struct TargetSpec {
  double radius_km = 2.0429;     // circular target orbit radius
  double plane_angle_deg = 31.0; // angle between orbit plane and +x axis
};

struct SuccessSpec {
  double fraction = 0.1; // terminal V must fall below fraction * V(0) ...
  double v_floor = 0.0;  // ... or below this absolute floor
};

struct ScenarioConfig {
  std::string name = "scenario";
  BodyParams body = bennuLikeBody();
  Vec3 r0_km = Vec3::Zero();
  Vec3 v0_mmps = Vec3::Zero();
  double initial_estimate_sigma_m = 30.0;
  Vec6 P0_diag{(Vec6() << 3.2761, 3.2761, 3.2761, 8.544e-17, 8.544e-17, 8.544e-17)
                   .finished()}; // km^2, (km/s)^2
  Vec6 Q_diag{(Vec6() << 1e-3, 1e-3, 1e-3, 1e-6, 1e-6, 1e-6).finished()}; // km^2, (km/s)^2
  TargetSpec target;
  Vec6 gains = Vec6::Ones();
  double cone_weight = 10.0;  // omega_3 when constrained
  Vec3 penalty_sharpness{1.0, 1.0, 1.0};
  double u_max_mps2 = 1e-5;
  double measurement_interval_hr = 1.5;
  double duration_days = 3.0;
  std::uint64_t seed = 1;
  ControllerMode mode = ControllerMode::Constrained;
  CameraIntrinsics camera;
  MeasureOptions opnav;
  SuccessSpec success;
  double isp_s = 3000.0;
  double spacecraft_mass_kg = 600.0;
  int control_substeps = 1;
  int divergence_samples = 16; // truth samples per interval for verdict checks

  void validate() const;
};

ScenarioConfig stationkeepingScenario();
ScenarioConfig approachScenario();

/// JSON round trip for scenario configs (schema documented in the README).
ScenarioConfig scenarioFromJsonFile(const std::string& path);
ScenarioConfig scenarioFromJsonString(const std::string& text);
std::string scenarioToJson(const ScenarioConfig& cfg);

/// Circular target orbit as slow Milankovitch elements: plane tilted from the
/// initial orbit normal toward +x until the orbit plane clears the keep-out
/// cone by the configured margin.
Vec6 targetSlowElements(const ScenarioConfig& cfg);

enum class Verdict { Success, Diverged, Error };

struct DivergenceCheck {
  bool violated = false;
  std::string reason; // "cone", "r_min", "r_max"
};

/// Position-space divergence test: inside the keep-out cone about +x or
/// outside the [r_min, r_max] shell.
DivergenceCheck detectDivergence(const Vec3& r, const ConstraintParams& cp);

/// Non-diverged trials succeed when the terminal Lyapunov value has fallen
/// below a fraction of the initial value or an absolute floor.
bool successCriterion(double V_terminal, double V_initial, const SuccessSpec& spec);

struct EpochRecord {
  double t_hr = 0.0;
  Vec3 truth_r_km = Vec3::Zero();
  Vec3 truth_v_mmps = Vec3::Zero();
  Vec3 est_r_km = Vec3::Zero();
  Vec3 est_v_mmps = Vec3::Zero();
  Vec3 meas_km = Vec3::Zero();
  bool meas_valid = false;
  double err_norm_km = 0.0;     // |truth - estimate| position
  double bound_km = 0.0;        // 3 sqrt(lambda_max(P_r))
  Vec3 u_mps2 = Vec3::Zero();
  double u_norm_mps2 = 0.0;
  double V = 0.0;
  double V_hat = 0.0;
  Vec3 g = Vec3::Zero();
  Vec3 P = Vec3::Zero();
  bool saturated = false;
  double angle_deg = 0.0;       // truth angle to +x
  double sigma_pix = 0.0;
  int n_points = 0;
};

struct TrialResult {
  Verdict verdict = Verdict::Error;
  std::string verdict_reason;
  double diverged_at_hr = -1.0;
  std::vector<EpochRecord> history;
  double delta_v_mps = 0.0;
  double fuel_kg = 0.0;
  double max_accel_mps2 = 0.0;
  double V0 = 0.0;
  double VT = 0.0;
  double inside_bound_fraction = 0.0; // epochs with err <= bound
};

TrialResult runClosedLoop(const ScenarioConfig& cfg, std::uint64_t trial_seed);

/// Delta-v and propellant from a zero-order-hold control history.
struct FuelUse {
  double delta_v_mps;
  double delta_m_kg;
};
FuelUse fuelMass(const std::vector<double>& u_norms_mps2, double dt_s, double isp_s,
                 double m_sc_kg);

struct CampaignStats {
  int n_trials = 0;
  int n_success = 0;
  double success_rate = 0.0;
  std::vector<TrialResult> trials; // histories cleared, summaries kept
  // per-epoch quantiles across trials
  std::vector<double> t_hr;
  std::vector<double> err_med, err_q10, err_q90, bound_med;
  double inside_bound_fraction = 0.0;
  std::vector<double> dv_bin_edges_mps;
  std::vector<int> dv_bin_counts;
};

CampaignStats runMonteCarlo(const ScenarioConfig& cfg, int n_trials,
                            std::uint64_t base_seed, int parallelism);

struct SweepRow {
  double independent; // range [km] or angle [deg]
  double error_norm_km;
  double bound_3sigma_km;
  int n_points;
  bool valid;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double crossing_range_km = -1.0; // first range where bound >= 10% of range
};

/// OpNav accuracy over range at fixed side-on geometry.
SweepResult sweepDistance(const ScenarioConfig& cfg, int n_cases, double range_min_km,
                          double range_max_km, std::uint64_t seed);

/// OpNav accuracy over sun angle at fixed range; -90 deg is the full-moon
/// view, +90 deg the dark side.
SweepResult sweepAngle(const ScenarioConfig& cfg, int n_cases, double range_km,
                       std::uint64_t seed);

// --------------------------------------------------------------------------
// Run-directory outputs
// --------------------------------------------------------------------------

void writeTrialCsv(const TrialResult& r, const std::string& path);
void writeControllerCsv(const TrialResult& r, const std::string& path);
void writeFilterCsv(const TrialResult& r, const std::string& path);
void writeTrialSummaryJson(const TrialResult& r, const ScenarioConfig& cfg,
                           const std::string& path);
void writeCampaignCsv(const CampaignStats& s, const std::string& path);
void writeCampaignStatsJson(const CampaignStats& s, const std::string& path);
void writeQuantilesCsv(const CampaignStats& s, const std::string& path);
void writeDvHistogramCsv(const CampaignStats& s, const std::string& path);
void writeSweepCsv(const SweepResult& s, const std::string& label,
                   const std::string& path);
void writeManifest(const std::string& run_dir, const std::string& subcommand,
                   const std::string& config_json, std::uint64_t seed,
                   const std::vector<std::string>& outputs);

/// Minimal SVG plot generation from the CSVs in a run directory.
void writeReportSvgs(const std::string& run_dir);

} // namespace onav

#endif // ONAV_MISSION_HPP
