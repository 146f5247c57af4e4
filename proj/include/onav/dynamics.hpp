#ifndef ONAV_DYNAMICS_HPP
#define ONAV_DYNAMICS_HPP

#include <functional>
#include <optional>
#include <vector>

#include "onav/body.hpp"

namespace onav {

// ---------------------------------------------------------------------------
// Augmented normalized Hill three-body dynamics (Cartesian form)
// ---------------------------------------------------------------------------

/// SRP acceleration: returns {beta_nondim, beta_dim [km/s^2]}.
struct SrpBeta {
  double nondim;
  double dim;
};
SrpBeta srpBeta(const BodyParams& p);

/// Escape bound: maximum semi-major axis of a bounded orbit [km].
double aMax(const BodyParams& p);

/// Right-hand side acceleration of the normalized Hill equations with SRP
/// beta and control u (all normalized).  Requires ||r|| > 0.
Vec3 anh3bpAccel(const HillState& x, double beta, const Vec3& u);

/// Jacobian of the Cartesian dynamics f(x) = [v; a(r,v)] with respect to the
/// 6-state, assembled analytically.  Normalized units.
Mat6 anh3bpJacobian(const Vec3& r);

/// Solar gravity perturbation resolved in Hill axes, normalized units.
/// Linearized form is what the Cartesian equations embed (tidal terms);
/// the full form keeps the complete third-body difference.
enum class SolarGravityModel { Linearized, Full };
Vec3 solarGravityAccel(const Vec3& r_norm, const BodyParams& p,
                       SolarGravityModel model = SolarGravityModel::Linearized);

// ---------------------------------------------------------------------------
// Milankovitch element form
// ---------------------------------------------------------------------------

/// Conversion Cartesian <-> Milankovitch.  The true longitude is measured
/// in-plane from the equinoctial reference direction of the orbit normal
/// (nonsingular except for exactly retrograde-equatorial geometry).
MilankovitchState cartToMilankovitch(const HillState& x, double mu);
HillState milankovitchToCart(const MilankovitchState& m, double mu);

/// How the Hill-frame rotation enters the element rates.  PaperForm uses the
/// component pattern [-Omega h1, +Omega h2, 0]; CrossProduct uses the
/// transport-theorem term -Omega x h.  CrossProduct is the form that is
/// exactly consistent with the Cartesian equations when the elements are
/// built from the inertial velocity.
enum class RotationTerms { PaperForm, CrossProduct };

/// Control-influence matrix B (7x3): rows for h, e and L per the Gauss
/// variational equations in Milankovitch form.
Eigen::Matrix<double, 7, 3> milankovitchB(const Vec3& r, const Vec3& v, double mu);

/// Element rates f0 + B a_d.  a_d is the perturbing acceleration (SRP, solar
/// gravity, control) resolved in Hill axes; Omega the Hill rotation rate.
Vec7 milankovitchRates(const MilankovitchState& m, const Vec3& r, const Vec3& v,
                       const Vec3& a_d, double Omega, double mu,
                       RotationTerms rot = RotationTerms::PaperForm);

// ---------------------------------------------------------------------------
// Frozen terminator orbits
// ---------------------------------------------------------------------------

/// Secular-balance relation: the Lambda angle of the frozen terminator orbit
/// with semi-major axis a_km.
double ftoLambdaForRadius(const BodyParams& p, double a_km);

/// Construct the frozen terminator orbit state for strength angle Lambda in
/// (0, pi/2].  h is aligned with sign*x, e = cos(Lambda) along y x h.  At
/// Lambda = pi/2 the orbit is circular polar and the radius must be supplied.
/// Returns the periapsis state in normalized units.
HillState ftoState(const BodyParams& p, double lambda, int sign,
                   std::optional<double> radius_km = std::nullopt);

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

struct IntegratorOptions {
  double max_step = 0.0;       // normalized; 0 -> derived from orbit period
  bool adaptive = false;       // embedded RK45 instead of fixed-step RK4
  double rel_tol = 1e-10;      // adaptive only
  double abs_tol = 1e-12;      // adaptive only
};

struct TrajectoryPoint {
  double t;       // normalized time
  HillState x;    // normalized state
};

using ControlFn = std::function<Vec3(double t, const HillState& x)>;

/// One classical RK4 step on an arbitrary 6-state derivative.
template <typename F>
Vec6 rk4Step(const F& f, double t, const Vec6& x, double dt) {
  const Vec6 k1 = f(t, x);
  const Vec6 k2 = f(t + 0.5 * dt, Vec6(x + 0.5 * dt * k1));
  const Vec6 k3 = f(t + 0.5 * dt, Vec6(x + 0.5 * dt * k2));
  const Vec6 k4 = f(t + dt, Vec6(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Propagate the Cartesian ANH3BP from t0 to t1 (normalized), sampling at
/// n_samples points including both endpoints.  Deterministic; throws
/// PropagationFailure carrying the last valid time on NaN states.
std::vector<TrajectoryPoint> propagate(const HillState& x0, double t0, double t1,
                                       double beta, const ControlFn& control,
                                       const IntegratorOptions& opts,
                                       int n_samples);

/// Single propagation step helper: advance state by dt with a zero-order-hold
/// control, fixed-step RK4 substepped at opts.max_step.
HillState propagateZoh(const HillState& x0, double dt, double beta, const Vec3& u,
                       const IntegratorOptions& opts);

// ---------------------------------------------------------------------------
// Point-mass feasibility arithmetic
// ---------------------------------------------------------------------------

struct J2Report {
  double J2;            // second zonal harmonic of the triaxial body
  double a_J2_max;      // max J2 acceleration at d_sat [km/s^2]
  double beta_dim;      // SRP acceleration [km/s^2]
  double a_g;           // point-mass gravity at d_sat [km/s^2]
  double ratio_gravity; // a_J2_max / a_g
  double ratio_srp;     // a_J2_max / beta_dim
};
J2Report j2FeasibilityReport(const BodyParams& p, double d_sat_km);

} // namespace onav

#endif // ONAV_DYNAMICS_HPP
