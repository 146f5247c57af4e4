#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "onav/mission.hpp"

namespace onav {

namespace {

std::ofstream openOut(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << std::setprecision(12);
  return f;
}

const char* verdictName(Verdict v) {
  switch (v) {
    case Verdict::Success: return "success";
    case Verdict::Diverged: return "diverged";
    default: return "error";
  }
}

} // namespace

void writeTrialCsv(const TrialResult& r, const std::string& path) {
  auto f = openOut(path);
  f << "t_hr,truth_rx_km,truth_ry_km,truth_rz_km,truth_vx_mmps,truth_vy_mmps,"
       "truth_vz_mmps,est_rx_km,est_ry_km,est_rz_km,est_vx_mmps,est_vy_mmps,"
       "est_vz_mmps,meas_x_km,meas_y_km,meas_z_km,err_norm_km,bound_km,u_mps2,"
       "V,Vhat,g1,g2,g3,angle_deg,valid\n";
  for (const auto& e : r.history) {
    f << e.t_hr;
    for (int i = 0; i < 3; ++i) f << ',' << e.truth_r_km(i);
    for (int i = 0; i < 3; ++i) f << ',' << e.truth_v_mmps(i);
    for (int i = 0; i < 3; ++i) f << ',' << e.est_r_km(i);
    for (int i = 0; i < 3; ++i) f << ',' << e.est_v_mmps(i);
    if (e.meas_valid)
      for (int i = 0; i < 3; ++i) f << ',' << e.meas_km(i);
    else
      f << ",nan,nan,nan";
    f << ',' << e.err_norm_km << ',' << e.bound_km << ',' << e.u_norm_mps2 << ','
      << e.V << ',' << e.V_hat << ',' << e.g(0) << ',' << e.g(1) << ',' << e.g(2)
      << ',' << e.angle_deg << ',' << (e.meas_valid ? 1 : 0) << '\n';
  }
}

void writeControllerCsv(const TrialResult& r, const std::string& path) {
  auto f = openOut(path);
  f << "t_hr,ux_mps2,uy_mps2,uz_mps2,u_norm_mps2,V,Vhat,g1,g2,g3,P1,P2,P3,saturated\n";
  for (const auto& e : r.history) {
    f << e.t_hr;
    for (int i = 0; i < 3; ++i) f << ',' << e.u_mps2(i);
    f << ',' << e.u_norm_mps2 << ',' << e.V << ',' << e.V_hat;
    for (int i = 0; i < 3; ++i) f << ',' << e.g(i);
    for (int i = 0; i < 3; ++i) f << ',' << e.P(i);
    f << ',' << (e.saturated ? 1 : 0) << '\n';
  }
}

void writeFilterCsv(const TrialResult& r, const std::string& path) {
  auto f = openOut(path);
  f << "t_hr,est_rx_km,est_ry_km,est_rz_km,est_vx_mmps,est_vy_mmps,est_vz_mmps,"
       "bound_3sigma_km,valid_measurement\n";
  for (const auto& e : r.history) {
    f << e.t_hr;
    for (int i = 0; i < 3; ++i) f << ',' << e.est_r_km(i);
    for (int i = 0; i < 3; ++i) f << ',' << e.est_v_mmps(i);
    f << ',' << e.bound_km << ',' << (e.meas_valid ? 1 : 0) << '\n';
  }
}

void writeTrialSummaryJson(const TrialResult& r, const ScenarioConfig& cfg,
                           const std::string& path) {
  nlohmann::json j;
  j["scenario"] = cfg.name;
  j["verdict"] = verdictName(r.verdict);
  j["verdict_reason"] = r.verdict_reason;
  j["diverged_at_hr"] = r.diverged_at_hr;
  j["delta_v_mps"] = r.delta_v_mps;
  j["fuel_kg"] = r.fuel_kg;
  j["max_accel_mps2"] = r.max_accel_mps2;
  j["V0"] = r.V0;
  j["VT"] = r.VT;
  j["inside_bound_fraction"] = r.inside_bound_fraction;
  j["epochs"] = r.history.size();
  auto f = openOut(path);
  f << j.dump(2) << '\n';
}

void writeCampaignCsv(const CampaignStats& s, const std::string& path) {
  auto f = openOut(path);
  f << "trial_id,verdict,delta_v_mps,fuel_kg,max_accel_mps2\n";
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    f << i << ',' << verdictName(t.verdict) << ',' << t.delta_v_mps << ','
      << t.fuel_kg << ',' << t.max_accel_mps2 << '\n';
  }
}

void writeCampaignStatsJson(const CampaignStats& s, const std::string& path) {
  nlohmann::json j;
  j["n_trials"] = s.n_trials;
  j["n_success"] = s.n_success;
  j["success_rate"] = s.success_rate;
  j["inside_bound_fraction"] = s.inside_bound_fraction;
  auto f = openOut(path);
  f << j.dump(2) << '\n';
}

void writeQuantilesCsv(const CampaignStats& s, const std::string& path) {
  auto f = openOut(path);
  f << "t_hr,err_med_km,err_q10_km,err_q90_km,bound_med_km\n";
  for (std::size_t i = 0; i < s.t_hr.size(); ++i)
    f << s.t_hr[i] << ',' << s.err_med[i] << ',' << s.err_q10[i] << ','
      << s.err_q90[i] << ',' << s.bound_med[i] << '\n';
}

void writeDvHistogramCsv(const CampaignStats& s, const std::string& path) {
  auto f = openOut(path);
  f << "bin_lo_mps,bin_hi_mps,count\n";
  for (std::size_t b = 0; b + 1 < s.dv_bin_edges_mps.size(); ++b)
    f << s.dv_bin_edges_mps[b] << ',' << s.dv_bin_edges_mps[b + 1] << ','
      << s.dv_bin_counts[b] << '\n';
}

void writeSweepCsv(const SweepResult& s, const std::string& label,
                   const std::string& path) {
  auto f = openOut(path);
  f << label << ",error_norm_km,bound_3sigma_km,n_points,valid_flag\n";
  for (const auto& row : s.rows)
    f << row.independent << ',' << row.error_norm_km << ',' << row.bound_3sigma_km
      << ',' << row.n_points << ',' << (row.valid ? 1 : 0) << '\n';
}

void writeManifest(const std::string& run_dir, const std::string& subcommand,
                   const std::string& config_json, std::uint64_t seed,
                   const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["tool"] = "onav";
  j["version"] = "0.1.0";
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config_json);
  j["config_hash_fnv1a64"] = hash.str();
  j["config"] = nlohmann::json::parse(config_json);
  j["outputs"] = outputs;
  auto f = openOut((std::filesystem::path(run_dir) / "manifest.json").string());
  f << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Minimal SVG plotting
// ---------------------------------------------------------------------------

namespace {

struct Series {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
};

void writeSvgPlot(const std::string& path, const std::string& title,
                  const std::string& xlabel, const std::string& ylabel,
                  const std::vector<Series>& series) {
  const int W = 720, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmax > xmin)) { xmin = 0; xmax = 1; }
  if (!(ymax > ymin)) { ymin = 0; ymax = 1; }
  const double yr = ymax - ymin;
  ymin -= 0.05 * yr;
  ymax += 0.05 * yr;

  auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

  auto f = openOut(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
    << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
    << title << "</text>\n";
  // axes
  f << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
    << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\""
    << H - MB << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    f << "<text x=\"" << px(xv) << "\" y=\"" << H - MB + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << std::setprecision(4) << xv
      << "</text>\n";
    f << "<text x=\"" << ML - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << std::setprecision(4) << yv
      << "</text>\n";
  }
  f << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  f << "<text x=\"16\" y=\"" << (MT + H - MB) / 2
    << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
    << (MT + H - MB) / 2 << ")\">" << ylabel << "</text>\n";

  for (const auto& s : series) {
    f << "<polyline fill=\"none\" stroke=\"" << s.color
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      f << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    f << "\"/>\n";
  }
  f << "</svg>\n";
}

std::vector<std::vector<double>> readCsvColumns(const std::string& path,
                                                std::vector<std::string>& header) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) return {};
  header.clear();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) header.push_back(cell);
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(f, line)) {
    std::stringstream ls(line);
    std::size_t c = 0;
    while (std::getline(ls, cell, ',') && c < cols.size()) {
      try {
        cols[c].push_back(std::stod(cell));
      } catch (...) {
        cols[c].push_back(std::nan(""));
      }
      ++c;
    }
  }
  return cols;
}

int findCol(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

} // namespace

void writeReportSvgs(const std::string& run_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(run_dir);
  bool made_any = false;

  if (fs::exists(dir / "trial.csv")) {
    std::vector<std::string> h;
    auto cols = readCsvColumns((dir / "trial.csv").string(), h);
    const int t = findCol(h, "t_hr");
    if (t >= 0 && !cols.empty()) {
      auto col = [&](const std::string& n) { return cols[static_cast<std::size_t>(findCol(h, n))]; };
      writeSvgPlot((dir / "error_vs_time.svg").string(), "estimate error and 3-sigma bound",
                   "time [hr]", "error [km]",
                   {{col("t_hr"), col("err_norm_km"), "#1f77b4"},
                    {col("t_hr"), col("bound_km"), "#d62728"}});
      writeSvgPlot((dir / "angle_vs_time.svg").string(), "angle to +x axis",
                   "time [hr]", "angle [deg]",
                   {{col("t_hr"), col("angle_deg"), "#1f77b4"}});
      writeSvgPlot((dir / "traj_xy.svg").string(), "trajectory (x-y)", "x [km]", "y [km]",
                   {{col("truth_rx_km"), col("truth_ry_km"), "#1f77b4"},
                    {col("est_rx_km"), col("est_ry_km"), "#d62728"}});
      writeSvgPlot((dir / "traj_xz.svg").string(), "trajectory (x-z)", "x [km]", "z [km]",
                   {{col("truth_rx_km"), col("truth_rz_km"), "#1f77b4"},
                    {col("est_rx_km"), col("est_rz_km"), "#d62728"}});
      writeSvgPlot((dir / "traj_yz.svg").string(), "trajectory (y-z)", "y [km]", "z [km]",
                   {{col("truth_ry_km"), col("truth_rz_km"), "#1f77b4"},
                    {col("est_ry_km"), col("est_rz_km"), "#d62728"}});
      writeSvgPlot((dir / "control_vs_time.svg").string(), "control magnitude",
                   "time [hr]", "|u| [m/s^2]",
                   {{col("t_hr"), col("u_mps2"), "#1f77b4"}});
      made_any = true;
    }
  }
  if (fs::exists(dir / "quantiles.csv")) {
    std::vector<std::string> h;
    auto cols = readCsvColumns((dir / "quantiles.csv").string(), h);
    if (!cols.empty()) {
      auto col = [&](const std::string& n) { return cols[static_cast<std::size_t>(findCol(h, n))]; };
      writeSvgPlot((dir / "campaign_error.svg").string(),
                   "campaign error quantiles and median bound", "time [hr]", "error [km]",
                   {{col("t_hr"), col("err_med_km"), "#1f77b4"},
                    {col("t_hr"), col("err_q90_km"), "#9edae5"},
                    {col("t_hr"), col("bound_med_km"), "#d62728"}});
      made_any = true;
    }
  }
  if (fs::exists(dir / "dv_histogram.csv")) {
    std::vector<std::string> h;
    auto cols = readCsvColumns((dir / "dv_histogram.csv").string(), h);
    if (cols.size() == 3 && !cols[0].empty()) {
      Series s;
      for (std::size_t i = 0; i < cols[0].size(); ++i) {
        // step outline of the histogram
        s.x.push_back(cols[0][i]);
        s.y.push_back(cols[2][i]);
        s.x.push_back(cols[1][i]);
        s.y.push_back(cols[2][i]);
      }
      writeSvgPlot((dir / "dv_histogram.svg").string(), "delta-v distribution",
                   "delta-v [m/s]", "trials", {s});
      made_any = true;
    }
  }
  if (fs::exists(dir / "sweep.csv")) {
    std::vector<std::string> h;
    auto cols = readCsvColumns((dir / "sweep.csv").string(), h);
    if (cols.size() >= 3 && !cols[0].empty()) {
      writeSvgPlot((dir / "sweep_error.svg").string(), "measurement error and 3-sigma bound",
                   h[0], "error [km]",
                   {{cols[0], cols[1], "#1f77b4"}, {cols[0], cols[2], "#d62728"}});
      made_any = true;
    }
  }
  if (!made_any)
    throw Error(ErrorCode::IoError, "no plottable CSVs found in " + run_dir);
}

} // namespace onav
