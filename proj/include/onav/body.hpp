#ifndef ONAV_BODY_HPP
#define ONAV_BODY_HPP

#include "onav/types.hpp"

namespace onav {

/// Physical parameters of the small body, the Sun and the spacecraft that
/// define the dynamical environment.  All values dimensional (km, s, kg).
struct BodyParams {
  double mu = 4.8904e-9;        // body gravitational parameter [km^3/s^2]
  double mu_sun = 1.327e11;     // solar gravitational parameter [km^3/s^2]
  double G1 = 1.0e8;            // solar flux constant [kg km^3 / (s^2 m^2)]
  double m_over_A = 33.0;       // spacecraft mass-to-area ratio [kg/m^2]
  double R = 1.720e8;           // Sun-body distance [km]
  double radius = 0.241;        // body volumetric mean radius [km]
  Vec3 shape_ratios{1.0, 1.0, 1.0};       // (a,b,c), a >= b >= c > 0
  Vec3 rotation_axis{0.0, 0.0, 1.0};      // unit vector, Hill frame
  double rotation_period = 4.296057 * 3600.0; // synodic rotation period [s]

  void validate() const;

  /// Dimensional principal semi-axes [km]; geometric-mean radius preserved.
  Vec3 semiAxes() const {
    const double s = radius / std::cbrt(shape_ratios.x() * shape_ratios.y() *
                                        shape_ratios.z());
    return s * shape_ratios;
  }
};

/// Bennu-class defaults used throughout the scenarios.
BodyParams bennuLikeBody();

/// ANH3BP unit system: unit length (mu/mu_sun)^(1/3) R, unit time 1/N with
/// N = sqrt(mu_sun/R^3).  In normalized units the body mu and the Hill
/// rotation rate are both 1.
class Normalization {
public:
  explicit Normalization(const BodyParams& p)
      : unit_length_(std::cbrt(p.mu / p.mu_sun) * p.R),
        unit_time_(1.0 / std::sqrt(p.mu_sun / (p.R * p.R * p.R))) {
    if (!(unit_length_ > 0.0) || !(unit_time_ > 0.0))
      throw Error(ErrorCode::DomainError, "normalization units must be positive");
  }

  double unitLength() const { return unit_length_; }   // km
  double unitTime() const { return unit_time_; }       // s
  double unitVelocity() const { return unit_length_ / unit_time_; }   // km/s
  double unitAccel() const { return unit_length_ / (unit_time_ * unit_time_); } // km/s^2

  double lengthToNorm(double km) const { return km / unit_length_; }
  double lengthFromNorm(double n) const { return n * unit_length_; }
  Vec3 lengthToNorm(const Vec3& km) const { return km / unit_length_; }
  Vec3 lengthFromNorm(const Vec3& n) const { return n * unit_length_; }
  double timeToNorm(double s) const { return s / unit_time_; }
  double timeFromNorm(double n) const { return n * unit_time_; }
  Vec3 velocityToNorm(const Vec3& kms) const { return kms / unitVelocity(); }
  Vec3 velocityFromNorm(const Vec3& n) const { return n * unitVelocity(); }
  double accelToNorm(double kms2) const { return kms2 / unitAccel(); }
  Vec3 accelToNorm(const Vec3& kms2) const { return kms2 / unitAccel(); }
  Vec3 accelFromNorm(const Vec3& n) const { return n * unitAccel(); }

private:
  double unit_length_;
  double unit_time_;
};

/// Position/velocity in the rotating Hill frame.  Unit system is tracked by
/// the caller; propagation works in normalized units, scenario I/O in km and
/// km/s.
struct HillState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  Vec6 asVec() const {
    Vec6 x;
    x << r, v;
    return x;
  }
  static HillState fromVec(const Vec6& x) {
    return HillState{x.head<3>(), x.tail<3>()};
  }
};

/// Angular momentum vector, eccentricity vector and true longitude.
struct MilankovitchState {
  Vec3 h = Vec3::Zero();
  Vec3 e = Vec3::Zero();
  double L = 0.0;

  Vec6 slow() const {
    Vec6 x;
    x << h, e;
    return x;
  }
};

} // namespace onav

#endif // ONAV_BODY_HPP
