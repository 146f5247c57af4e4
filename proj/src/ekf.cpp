#include "onav/ekf.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace onav {

Mat6 ekfTransition(const Vec3& r_norm, double dt_norm, bool use_expm) {
  const Mat6 A = anh3bpJacobian(r_norm);
  if (use_expm) return (A * dt_norm).exp();
  return Mat6::Identity() + A * dt_norm;
}

FilterState ekfPredict(const FilterState& fs, double dt_norm, double beta,
                       const Vec3& u_norm, const EkfNoiseConfig& noise,
                       const IntegratorOptions& opts) {
  if (!(dt_norm > 0.0))
    throw Error(ErrorCode::FilterFailure, "prediction interval must be positive");

  const double sub = noise.cov_substep > 0.0 ? noise.cov_substep : dt_norm;
  const int n_sub = std::max(1, static_cast<int>(std::ceil(dt_norm / sub)));
  const double h = dt_norm / n_sub;

  FilterState out = fs;
  HillState x = fs.asHillState();
  for (int i = 0; i < n_sub; ++i) {
    const Mat6 F = ekfTransition(x.r, h);
    x = propagateZoh(x, h, beta, u_norm, opts);
    out.P = F * out.P * F.transpose() + noise.Q * (h / dt_norm);
  }
  if (!x.asVec().allFinite())
    throw Error(ErrorCode::FilterFailure, "filter state became non-finite");
  out.x_hat = x.asVec();
  out.P = 0.5 * (out.P + out.P.transpose());
  out.t = fs.t + dt_norm;
  return out;
}

FilterState ekfUpdate(const FilterState& fs, const Vec3& z_norm, const Mat3& R_norm) {
  // H = [I3 03]
  const Mat3 Pzz = fs.P.topLeftCorner<3, 3>();
  const Mat3 S = Pzz + R_norm;
  Eigen::FullPivLU<Mat3> lu(S);
  if (!lu.isInvertible()) return fs; // skip update, treat as Invalid

  const Eigen::Matrix<double, 6, 3> PHt = fs.P.leftCols<3>();
  const Eigen::Matrix<double, 6, 3> K = PHt * lu.inverse();
  const Vec3 innovation = z_norm - fs.x_hat.head<3>();

  FilterState out = fs;
  out.x_hat = fs.x_hat + K * innovation;

  // Joseph form: (I - K H) P (I - K H)^T + K R K^T
  Mat6 IKH = Mat6::Identity();
  IKH.leftCols<3>() -= K;
  out.P = IKH * fs.P * IKH.transpose() + K * R_norm * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

double errorBound3Sigma(const FilterState& fs) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(fs.P.topLeftCorner<3, 3>());
  const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
  return 3.0 * std::sqrt(lmax);
}

} // namespace onav
