#include "onav/control.hpp"

#include <cmath>

namespace onav {

void ConstraintParams::validate() const {
  if (!(r_min > 0.0) || !(r_max > r_min))
    throw Error(ErrorCode::DomainError, "need 0 < r_min < r_max");
  if (!(cone_alpha > 0.0) || !(cone_alpha < kPi / 2.0))
    throw Error(ErrorCode::DomainError, "cone half-angle must lie in (0, pi/2)");
  if (!(weights.minCoeff() >= 0.0) || !(sharpness.minCoeff() > 0.0))
    throw Error(ErrorCode::DomainError, "weights must be >= 0, sharpness > 0");
}

ConstraintParams ConstraintParams::forBody(const BodyParams& p, double cone_weight) {
  const Normalization n(p);
  ConstraintParams cp;
  cp.r_min = n.lengthToNorm(2.0 * p.radius);
  cp.r_max = n.lengthToNorm(25.0 * p.radius);
  cp.cone_alpha = deg2rad(30.0);
  cp.weights = Vec3(1.0, 1.0, cone_weight);
  cp.sharpness = Vec3(1.0, 1.0, 1.0);
  return cp;
}

Vec3 constraintsG(const MilankovitchState& m, const ConstraintParams& cp, double mu) {
  const double h = m.h.norm();
  const double e = m.e.norm();
  if (!(h > 0.0))
    throw Error(ErrorCode::DegenerateOrbit, "constraints undefined for ||h|| = 0");
  if (e >= 1.0 - 1e-12 && cp.r_max > 0.0) {
    // the apoapsis form of g2 diverges at e = 1
    if (1.0 - e <= 0.0)
      throw Error(ErrorCode::DomainError, "max-radius constraint singular at e >= 1");
  }
  const double p_sl = h * h / mu; // semi-latus rectum
  Vec3 g;
  g(0) = cp.r_min * cp.r_min - p_sl / (1.0 + e);
  g(1) = p_sl / (1.0 - e) - cp.r_max * cp.r_max;
  g(2) = std::cos(kPi / 2.0 + cp.cone_alpha) - m.h.x() / h;
  return g + Vec3::Constant(cp.activation_offset);
}

Eigen::Matrix<double, 3, 6> constraintGradients(const MilankovitchState& m,
                                                const ConstraintParams& cp, double mu,
                                                GradientMode mode, double fd_rel_step) {
  if (mode == GradientMode::FiniteDifference) {
    Eigen::Matrix<double, 3, 6> J;
    Vec6 x = m.slow();
    const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-6);
    for (int j = 0; j < 6; ++j) {
      const double step = fd_rel_step * std::max(std::abs(x(j)), scale);
      Vec6 xp = x, xm = x;
      xp(j) += step;
      xm(j) -= step;
      MilankovitchState mp{xp.head<3>(), xp.tail<3>(), m.L};
      MilankovitchState mm{xm.head<3>(), xm.tail<3>(), m.L};
      J.col(j) = (constraintsG(mp, cp, mu) - constraintsG(mm, cp, mu)) / (2.0 * step);
    }
    return J;
  }

  // Closed forms as published; kept verbatim for the comparison report.
  const double h = m.h.norm();
  const double e = m.e.norm();
  if (!(h > 0.0) || !(e > 0.0) || e >= 1.0)
    throw Error(ErrorCode::DegenerateOrbit, "printed gradients need 0 < e < 1, h > 0");
  const double h1 = m.h.x(), h2 = m.h.y(), h3 = m.h.z();
  const double e1 = m.e.x(), e2 = m.e.y(), e3 = m.e.z();
  Eigen::Matrix<double, 3, 6> J = Eigen::Matrix<double, 3, 6>::Zero();
  const double inv1me = 1.0 / (1.0 - e);
  J(0, 0) = -(2.0 * h1 + h2 * h2 + h3 * h3) / mu * inv1me;
  J(0, 1) = -(2.0 * h2 + h1 * h1 + h3 * h3) / mu * inv1me;
  J(0, 2) = -(2.0 * h3 + h2 * h2 + h1 * h1) / mu * inv1me;
  const double em1sq = (e - 1.0) * (e - 1.0);
  J(0, 3) = -e1 * h * h / (mu * e * em1sq);
  J(0, 4) = -e2 * h * h / (mu * e * em1sq);
  J(0, 5) = -e3 * h * h / (mu * e * em1sq);
  J.row(1) = J.row(0);
  const double h15 = std::pow(h, 1.5);
  J(2, 0) = (h2 * h2 + h3 * h3) / h15;
  J(2, 1) = -(h1 * h2) / h15;
  J(2, 2) = -(h1 * h3) / h15;
  return J;
}

double penalty(double g, double k) {
  const double expo = std::min(k * g, 50.0);
  return std::exp(expo);
}

LyapunovValues lyapunovValues(const Vec6& x_slow, const ControllerConfig& cfg,
                              const ConstraintParams& cp) {
  LyapunovValues out;
  const Vec6 dx = x_slow - cfg.target;
  out.V = dx.dot(cfg.gains.asDiagonal() * dx);
  MilankovitchState m{x_slow.head<3>(), x_slow.tail<3>(), 0.0};
  out.g = constraintsG(m, cp, cfg.mu);
  for (int i = 0; i < 3; ++i) out.P(i) = penalty(out.g(i), cp.sharpness(i));
  out.V_Pi = cp.weights.cwiseProduct(out.P) * out.V;
  out.V_hat = out.V + out.V_Pi.sum();
  return out;
}

Eigen::Matrix<double, 6, 3> bSlow(const Vec3& r, const Vec3& v, double mu) {
  const Vec3 h = r.cross(v);
  Eigen::Matrix<double, 6, 3> B;
  B.block<3, 3>(0, 0) = crossMatrix(r);
  B.block<3, 3>(3, 0) = (crossMatrix(v) * crossMatrix(r) - crossMatrix(h)) / mu;
  return B;
}

ControlOutput control(const Vec6& x_slow, const ControllerConfig& cfg,
                      const ConstraintParams& cp, const Vec3& r, const Vec3& v) {
  ControlOutput out;
  const Vec6 dx = x_slow - cfg.target;
  const LyapunovValues lv = lyapunovValues(x_slow, cfg, cp);
  out.V = lv.V;
  out.V_hat = lv.V_hat;
  out.g = lv.g;
  out.P = lv.P;

  const Mat6 K = cfg.gains.asDiagonal();
  MilankovitchState m{x_slow.head<3>(), x_slow.tail<3>(), 0.0};
  const Eigen::Matrix<double, 3, 6> dg =
      constraintGradients(m, cp, cfg.mu, GradientMode::FiniteDifference);

  // L = [2 (1 + sum w_i P_i) K + (K dx) sum w_i k_i P_i dg_i/dx] B_slow
  const double infl = 1.0 + cp.weights.dot(lv.P);
  Eigen::Matrix<double, 1, 6> pen_row = Eigen::Matrix<double, 1, 6>::Zero();
  for (int i = 0; i < 3; ++i)
    pen_row += cp.weights(i) * cp.sharpness(i) * lv.P(i) * dg.row(i);
  const Mat6 M = 2.0 * infl * K + (K * dx) * pen_row;
  const Eigen::Matrix<double, 6, 3> L = M * bSlow(r, v, cfg.mu);

  const Mat3 LtL = L.transpose() * L;
  Eigen::SelfAdjointEigenSolver<Mat3> es(LtL);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  Mat3 LtL_solve = LtL;
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    LtL_solve += (1e-9 * LtL.trace()) * Mat3::Identity();
    out.damped = true;
  }
  out.u = -LtL_solve.ldlt().solve(L.transpose() * dx);

  if (cfg.u_max > 0.0) {
    const double un = out.u.norm();
    if (un > cfg.u_max) {
      out.u *= cfg.u_max / un;
      out.saturated = true;
    }
  }
  return out;
}

} // namespace onav
