#include "onav/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace onav {

void BodyParams::validate() const {
  if (!(mu > 0.0) || !(mu_sun > 0.0) || !(G1 >= 0.0) || !(m_over_A > 0.0) ||
      !(R > 0.0) || !(radius > 0.0) || !(rotation_period > 0.0))
    throw Error(ErrorCode::DomainError, "body parameters must be positive");
  const Vec3& s = shape_ratios;
  if (!(s.x() >= s.y() && s.y() >= s.z() && s.z() > 0.0))
    throw Error(ErrorCode::DomainError, "shape ratios must satisfy a >= b >= c > 0");
  if (std::abs(rotation_axis.norm() - 1.0) > 1e-12)
    throw Error(ErrorCode::DomainError, "rotation axis must be unit norm");
}

BodyParams bennuLikeBody() {
  BodyParams p;
  p.mu = 4.8904e-9;
  p.mu_sun = 1.327e11;
  p.G1 = 1.0e8;
  p.m_over_A = 33.0;
  p.R = 1.720e8;
  p.radius = 0.241;
  p.shape_ratios = Vec3(1.0, 1.0, 1.0);
  // Pole roughly opposite the Hill z-axis, synodic period 4.296057 h.
  p.rotation_axis = Vec3(0.0, 0.0, -1.0);
  p.rotation_period = 4.296057 * 3600.0;
  return p;
}

SrpBeta srpBeta(const BodyParams& p) {
  p.validate();
  if (p.G1 == 0.0) return {0.0, 0.0};
  SrpBeta b;
  b.dim = p.G1 / (p.m_over_A * p.R * p.R);
  b.nondim = p.G1 / (p.m_over_A * std::pow(p.mu_sun, 2.0 / 3.0) *
                     std::cbrt(p.mu));
  return b;
}

double aMax(const BodyParams& p) {
  p.validate();
  if (!(p.G1 > 0.0))
    throw Error(ErrorCode::DomainError, "escape bound needs positive solar flux");
  return std::sqrt(3.0) / 4.0 * std::sqrt(p.mu * p.m_over_A / p.G1) * p.R;
}

Vec3 anh3bpAccel(const HillState& x, double beta, const Vec3& u) {
  const double rn = x.r.norm();
  if (!(rn > 0.0))
    throw Error(ErrorCode::SingularGeometry, "anh3bp acceleration at r = 0");
  const double r3 = rn * rn * rn;
  Vec3 a;
  a.x() = 2.0 * x.v.y() + 3.0 * x.r.x() - x.r.x() / r3 + beta + u.x();
  a.y() = -2.0 * x.v.x() - x.r.y() / r3 + u.y();
  a.z() = -x.r.z() - x.r.z() / r3 + u.z();
  return a;
}

Mat6 anh3bpJacobian(const Vec3& r) {
  const double rn = r.norm();
  if (!(rn > 0.0))
    throw Error(ErrorCode::SingularGeometry, "jacobian at r = 0");
  const double r3 = rn * rn * rn;
  const double r5 = r3 * rn * rn;

  Mat3 G = -Mat3::Identity() / r3 + 3.0 * (r * r.transpose()) / r5;
  G(0, 0) += 3.0;
  G(2, 2) += -1.0;

  Mat3 C = Mat3::Zero();
  C(0, 1) = 2.0;
  C(1, 0) = -2.0;

  Mat6 A = Mat6::Zero();
  A.block<3, 3>(0, 3) = Mat3::Identity();
  A.block<3, 3>(3, 0) = G;
  A.block<3, 3>(3, 3) = C;
  return A;
}

Vec3 solarGravityAccel(const Vec3& r, const BodyParams& p, SolarGravityModel model) {
  if (model == SolarGravityModel::Linearized) {
    // Tidal expansion consistent with the Cartesian equations (the
    // centrifugal part lives in the frame terms, not here).
    return Vec3(2.0 * r.x(), -r.y(), -r.z());
  }
  // Full third-body difference in normalized units: mu_sun_n = mu_sun/mu,
  // body at R_n along +x from the Sun.
  const double mu_sun_n = p.mu_sun / p.mu;
  const double R_n = std::cbrt(p.mu_sun / p.mu);
  const Vec3 r_sb(R_n, 0.0, 0.0);
  const Vec3 d = r + r_sb;
  return -mu_sun_n * (d / std::pow(d.norm(), 3) - r_sb / (R_n * R_n * R_n));
}

// ---------------------------------------------------------------------------
// Milankovitch elements
// ---------------------------------------------------------------------------

namespace {

// Equinoctial in-plane basis (f, g) for orbit normal w = h/||h||.  Singular
// only at w_z = -1 (retrograde equatorial), which also makes the true
// longitude rate singular.
void equinoctialBasis(const Vec3& w, Vec3& f, Vec3& g) {
  const double denom = 1.0 + w.z();
  if (std::abs(denom) < 1e-12)
    throw Error(ErrorCode::SingularGeometry,
                "equinoctial basis undefined for retrograde equatorial normal");
  f = Vec3(1.0 - w.x() * w.x() / denom, -w.x() * w.y() / denom, -w.x());
  g = w.cross(f);
  f.normalize();
  g.normalize();
}

} // namespace

MilankovitchState cartToMilankovitch(const HillState& x, double mu) {
  MilankovitchState m;
  m.h = x.r.cross(x.v);
  const double hn = m.h.norm();
  if (!(hn > 1e-300))
    throw Error(ErrorCode::DegenerateOrbit, "rectilinear orbit: ||h|| = 0");
  m.e = x.v.cross(m.h) / mu - x.r.normalized();
  Vec3 f, g;
  equinoctialBasis(m.h / hn, f, g);
  m.L = std::atan2(x.r.dot(g), x.r.dot(f));
  return m;
}

HillState milankovitchToCart(const MilankovitchState& m, double mu) {
  const double hn = m.h.norm();
  if (!(hn > 1e-300))
    throw Error(ErrorCode::DegenerateOrbit, "rectilinear orbit: ||h|| = 0");
  Vec3 f, g;
  equinoctialBasis(m.h / hn, f, g);
  const double ef = m.e.dot(f);
  const double eg = m.e.dot(g);
  const double p = hn * hn / mu;
  const double cl = std::cos(m.L);
  const double sl = std::sin(m.L);
  const double denom = 1.0 + ef * cl + eg * sl;
  if (!(std::abs(denom) > 1e-14))
    throw Error(ErrorCode::DegenerateOrbit, "radius unbounded at this longitude");
  const double rmag = p / denom;
  HillState x;
  x.r = rmag * (cl * f + sl * g);
  x.v = (mu / hn) * (-(sl + eg) * f + (cl + ef) * g);
  return x;
}

Eigen::Matrix<double, 7, 3> milankovitchB(const Vec3& r, const Vec3& v, double mu) {
  const Vec3 h = r.cross(v);
  const double hn = h.norm();
  if (!(hn > 1e-300))
    throw Error(ErrorCode::DegenerateOrbit, "B matrix undefined for ||h|| = 0");
  const double denom = hn * (hn + h.z());
  if (std::abs(denom) < 1e-300)
    throw Error(ErrorCode::SingularGeometry, "longitude row singular: h + z.h = 0");
  Eigen::Matrix<double, 7, 3> B;
  B.block<3, 3>(0, 0) = crossMatrix(r);
  B.block<3, 3>(3, 0) = (crossMatrix(v) * crossMatrix(r) - crossMatrix(h)) / mu;
  B.block<1, 3>(6, 0) = (r.z() / denom) * h.transpose();
  return B;
}

Vec7 milankovitchRates(const MilankovitchState& m, const Vec3& r, const Vec3& v,
                       const Vec3& a_d, double Omega, double mu,
                       RotationTerms rot) {
  const double hn = m.h.norm();
  if (!(hn > 1e-300))
    throw Error(ErrorCode::DegenerateOrbit, "rates undefined for ||h|| = 0");
  Vec7 f0 = Vec7::Zero();
  if (rot == RotationTerms::PaperForm) {
    f0(0) = -Omega * m.h.x();
    f0(1) = Omega * m.h.y();
    f0(3) = -Omega * m.e.x();
    f0(4) = Omega * m.e.y();
  } else {
    const Vec3 Om(0.0, 0.0, Omega);
    f0.segment<3>(0) = -Om.cross(m.h);
    f0.segment<3>(3) = -Om.cross(m.e);
  }
  const double rn = r.norm();
  f0(6) = hn / (rn * rn);
  // The equinoctial longitude shifts uniformly at -Omega under a frame
  // rotation about z, independent of the orbit geometry.
  if (rot == RotationTerms::CrossProduct) f0(6) -= Omega;
  return f0 + milankovitchB(r, v, mu) * a_d;
}

// ---------------------------------------------------------------------------
// Frozen terminator orbits
// ---------------------------------------------------------------------------

double ftoLambdaForRadius(const BodyParams& p, double a_km) {
  const Normalization n(p);
  const double beta = srpBeta(p).nondim;
  const double a_n = n.lengthToNorm(a_km);
  if (!(a_n > 0.0))
    throw Error(ErrorCode::DomainError, "FTO radius must be positive");
  return std::atan(1.5 * beta * std::sqrt(a_n));
}

HillState ftoState(const BodyParams& p, double lambda, int sign,
                   std::optional<double> radius_km) {
  if (!(lambda > 0.0) || lambda > kPi / 2.0 + 1e-12)
    throw Error(ErrorCode::DomainError, "FTO strength angle must lie in (0, pi/2]");
  if (sign != 1 && sign != -1)
    throw Error(ErrorCode::DomainError, "FTO sign must be +1 or -1");

  const Normalization n(p);
  const double e = std::cos(lambda);
  double a_n;
  if (std::abs(lambda - kPi / 2.0) < 1e-9) {
    // Circular polar limit: the secular balance no longer fixes the size.
    if (!radius_km)
      throw Error(ErrorCode::DomainError,
                  "circular polar orbit needs an explicit radius");
    a_n = n.lengthToNorm(*radius_km);
  } else {
    const double beta = srpBeta(p).nondim;
    const double s = std::tan(lambda) / (1.5 * beta);
    a_n = s * s;
  }

  const Vec3 hhat = sign * Vec3::UnitX();
  const Vec3 ehat = Vec3::UnitY().cross(hhat);
  MilankovitchState m;
  m.h = std::sqrt(a_n * (1.0 - e * e)) * hhat; // mu = 1 normalized
  m.e = e * ehat;
  // Periapsis: with h along +/-x the equinoctial reference direction equals
  // the eccentricity direction, so L = 0 starts the orbit at periapsis.
  m.L = 0.0;
  return milankovitchToCart(m, 1.0);
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

namespace {

Vec6 cartRates(double t, const Vec6& x, double beta, const ControlFn& control) {
  HillState s = HillState::fromVec(x);
  const Vec3 u = control ? control(t, s) : Vec3::Zero();
  Vec6 dx;
  dx.head<3>() = s.v;
  dx.tail<3>() = anh3bpAccel(s, beta, u);
  return dx;
}

Vec6 cartRk4(double t, const Vec6& x, double dt, double beta, const ControlFn& c) {
  return rk4Step(
      [&](double tt, const Vec6& xx) { return cartRates(tt, xx, beta, c); }, t, x,
      dt);
}

// Dormand-Prince 5(4) single step; returns 5th-order solution and error norm.
Vec6 dopriStep(double t, const Vec6& x, double dt, double beta, const ControlFn& c,
               double& err) {
  static const double a21 = 1.0 / 5.0;
  static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static const double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static const double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                      a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static const double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                      a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                      a65 = -5103.0 / 18656.0;
  static const double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                      b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static const double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                      e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  const Vec6 k1 = cartRates(t, x, beta, c);
  const Vec6 k2 = cartRates(t + a21 * dt, x + dt * (a21 * k1), beta, c);
  const Vec6 k3 = cartRates(t + 0.3 * dt, x + dt * (a31 * k1 + a32 * k2), beta, c);
  const Vec6 k4 = cartRates(t + 0.8 * dt, x + dt * (a41 * k1 + a42 * k2 + a43 * k3), beta, c);
  const Vec6 k5 = cartRates(t + 8.0 / 9.0 * dt,
                            x + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), beta, c);
  const Vec6 k6 = cartRates(t + dt,
                            x + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
                            beta, c);
  const Vec6 y5 = x + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vec6 k7 = cartRates(t + dt, y5, beta, c);
  const Vec6 ev = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  err = ev.norm();
  return y5;
}

double defaultStep(const Vec6& x) {
  // <= 1/1000 of the local circular period at the current radius.
  const double rn = x.head<3>().norm();
  const double period = 2.0 * kPi * std::sqrt(rn * rn * rn);
  return std::max(period / 1000.0, 1e-9);
}

} // namespace

std::vector<TrajectoryPoint> propagate(const HillState& x0, double t0, double t1,
                                       double beta, const ControlFn& control,
                                       const IntegratorOptions& opts,
                                       int n_samples) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || n_samples < 2)
    throw Error(ErrorCode::DomainError, "bad propagation span");
  std::vector<TrajectoryPoint> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  Vec6 x = x0.asVec();
  double t = t0;
  out.push_back({t, HillState::fromVec(x)});
  const double span = t1 - t0;

  for (int i = 1; i < n_samples; ++i) {
    const double target = t0 + span * static_cast<double>(i) / (n_samples - 1);
    while (t < target) {
      double h = opts.max_step > 0.0 ? opts.max_step : defaultStep(x);
      h = std::min(h, target - t);
      if (opts.adaptive) {
        const double tol = opts.abs_tol + opts.rel_tol * x.norm();
        double err = 0.0;
        Vec6 xn = dopriStep(t, x, h, beta, control, err);
        while (err > tol && h > 1e-12) {
          h *= 0.5;
          xn = dopriStep(t, x, h, beta, control, err);
        }
        x = xn;
      } else {
        x = cartRk4(t, x, h, beta, control);
      }
      t += h;
      if (!x.allFinite())
        throw Error(ErrorCode::PropagationFailure,
                    "state became non-finite at t = " + std::to_string(t));
    }
    out.push_back({target, HillState::fromVec(x)});
    t = target;
  }
  return out;
}

HillState propagateZoh(const HillState& x0, double dt, double beta, const Vec3& u,
                       const IntegratorOptions& opts) {
  auto traj = propagate(
      x0, 0.0, dt, beta, [&u](double, const HillState&) { return u; }, opts, 2);
  return traj.back().x;
}

// ---------------------------------------------------------------------------
// J2 feasibility
// ---------------------------------------------------------------------------

J2Report j2FeasibilityReport(const BodyParams& p, double d_sat_km) {
  p.validate();
  if (!(d_sat_km > p.radius))
    throw Error(ErrorCode::DomainError, "satellite distance must exceed body radius");
  const Vec3 ax = p.semiAxes();
  // Uniform-density triaxial ellipsoid: I/M = (b^2+c^2)/5 etc.; the inertia
  // factor (Iz - (Ix+Iy)/2)/M drives both J2 and the acceleration bound.
  const double A2 = ax.x() * ax.x();
  const double B2 = ax.y() * ax.y();
  const double C2 = ax.z() * ax.z();
  const double inertia_factor = ((A2 + B2) / 2.0 - C2) / 5.0; // = J2 * R_ref^2
  J2Report rep;
  rep.J2 = inertia_factor / (p.radius * p.radius);
  const double d4 = std::pow(d_sat_km, 4);
  rep.a_J2_max = 3.0 * p.mu * inertia_factor / d4;
  rep.beta_dim = srpBeta(p).dim;
  rep.a_g = p.mu / (d_sat_km * d_sat_km);
  rep.ratio_gravity = rep.a_J2_max / rep.a_g;
  rep.ratio_srp = rep.a_J2_max / rep.beta_dim;
  return rep;
}

} // namespace onav
