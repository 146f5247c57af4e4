#ifndef ONAV_EKF_HPP
#define ONAV_EKF_HPP

#include "onav/dynamics.hpp"

namespace onav {

/// Filter state: 6-vector [r; v] with covariance, normalized units.
struct FilterState {
  Vec6 x_hat = Vec6::Zero();
  Mat6 P = Mat6::Zero();
  double t = 0.0; // normalized epoch

  HillState asHillState() const { return HillState::fromVec(x_hat); }
};

struct EkfNoiseConfig {
  Mat6 Q = Mat6::Zero();       // process noise per measurement interval (normalized)
  double cov_substep = 0.0;    // normalized; 0 -> single step per interval
};

/// Discrete transition matrix F = I + A dt from the analytic Jacobian of the
/// Cartesian dynamics (matrix exponential behind the flag).
Mat6 ekfTransition(const Vec3& r_norm, double dt_norm, bool use_expm = false);

/// Prediction: nonlinear state propagation with zero-order-hold control plus
/// linearized covariance propagation, Q spread over the substeps.
FilterState ekfPredict(const FilterState& fs, double dt_norm, double beta,
                       const Vec3& u_norm, const EkfNoiseConfig& noise,
                       const IntegratorOptions& opts);

/// Measurement update with H = [I 0], Joseph-form covariance update.
/// Returns the prior unchanged when the innovation covariance is singular.
FilterState ekfUpdate(const FilterState& fs, const Vec3& z_norm, const Mat3& R_norm);

/// 3 sqrt(lambda_max) of the position covariance block.
double errorBound3Sigma(const FilterState& fs);

} // namespace onav

#endif // ONAV_EKF_HPP
