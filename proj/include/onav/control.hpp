#ifndef ONAV_CONTROL_HPP
#define ONAV_CONTROL_HPP

#include "onav/dynamics.hpp"

namespace onav {

/// Path-constraint parameters, normalized length units.
struct ConstraintParams {
  double r_min = 0.0;      // minimum radius (normalized)
  double r_max = 0.0;      // maximum radius (normalized)
  double cone_alpha = deg2rad(30.0); // keep-out half angle about +x [rad]
  Vec3 weights{1.0, 1.0, 10.0};      // omega_1..3
  Vec3 sharpness{1.0, 1.0, 1.0};     // k_1..3
  double activation_offset = 0.0;    // epsilon shift applied as g -> g + eps

  void validate() const;
  static ConstraintParams forBody(const BodyParams& p, double cone_weight);
};

struct ControllerConfig {
  Vec6 gains = Vec6::Ones();   // diagonal of K
  Vec6 target = Vec6::Zero();  // [h*; e*] slow target, normalized
  double u_max = 0.0;          // saturation, normalized acceleration
  double mu = 1.0;
};

struct ControlOutput {
  Vec3 u = Vec3::Zero();   // normalized Hill acceleration
  double V = 0.0;          // base Lyapunov value
  double V_hat = 0.0;      // penalty-augmented value
  Vec3 g = Vec3::Zero();   // constraint values
  Vec3 P = Vec3::Zero();   // penalty values
  bool saturated = false;
  bool damped = false;     // pseudo-inverse fell back to Tikhonov damping
};

/// Constraint values (negative = satisfied): min radius, max radius
/// (apoapsis form) and the orbit-normal keep-out cone.
Vec3 constraintsG(const MilankovitchState& m, const ConstraintParams& cp, double mu);

enum class GradientMode { FiniteDifference, AnalyticPrinted };

/// 3x6 gradient of the constraints with respect to the slow elements [h; e].
/// FiniteDifference (central, relative step 1e-7) is the reference mode;
/// AnalyticPrinted evaluates the published closed forms for comparison.
Eigen::Matrix<double, 3, 6> constraintGradients(const MilankovitchState& m,
                                                const ConstraintParams& cp, double mu,
                                                GradientMode mode,
                                                double fd_rel_step = 1e-7);

/// Exponential penalty e^(k g); exponent clamped to avoid overflow.
double penalty(double g, double k);

/// Base and augmented Lyapunov values: V_hat = V (1 + sum w_i P_i).
struct LyapunovValues {
  double V;
  double V_hat;
  Vec3 V_Pi;
  Vec3 g;
  Vec3 P;
};
LyapunovValues lyapunovValues(const Vec6& x_slow, const ControllerConfig& cfg,
                              const ConstraintParams& cp);

/// Feedback acceleration from the penalty-augmented Lyapunov rate:
/// u = -(L^T L)^-1 L^T dx, then norm-saturated.  (r, v) supply the
/// control-influence rows for the slow elements.
ControlOutput control(const Vec6& x_slow, const ControllerConfig& cfg,
                      const ConstraintParams& cp, const Vec3& r, const Vec3& v);

/// Slow-element control-influence matrix (6x3): rows of B for h and e.
Eigen::Matrix<double, 6, 3> bSlow(const Vec3& r, const Vec3& v, double mu);

} // namespace onav

#endif // ONAV_CONTROL_HPP
