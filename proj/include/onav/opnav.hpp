#ifndef ONAV_OPNAV_HPP
#define ONAV_OPNAV_HPP

#include <optional>

#include "onav/imaging.hpp"

namespace onav {

/// Inverse camera calibration matrix; upper triangular, carries pixel
/// densities, skew and principal point.  The focal length scales the leading
/// 2x2 block of the pixel -> line-of-sight map and is kept alongside.
struct InverseCameraMatrix {
  Mat3 Cinv = Mat3::Identity();
  double focal_px = 1.0;

  /// Unit line-of-sight in the camera frame for homogeneous pixel [u, v, 1].
  Vec3 lineOfSight(double u, double v) const {
    const Vec3 t = Cinv * Vec3(u, v, 1.0);
    return Vec3(t.x() / focal_px, t.y() / focal_px, 1.0).normalized();
  }
};

InverseCameraMatrix inverseCameraMatrix(const CameraIntrinsics& cam);

/// Shape matrix A = diag(1/a^2, 1/b^2, 1/c^2) of the target ellipsoid in the
/// body principal frame, with its principal square root D.
struct ShapeMatrix {
  Vec3 semi_axes = Vec3::Ones(); // km

  Mat3 A() const {
    return Vec3(1.0 / (semi_axes.x() * semi_axes.x()),
                1.0 / (semi_axes.y() * semi_axes.y()),
                1.0 / (semi_axes.z() * semi_axes.z()))
        .asDiagonal();
  }
  Mat3 D() const {
    return Vec3(1.0 / semi_axes.x(), 1.0 / semi_axes.y(), 1.0 / semi_axes.z())
        .asDiagonal();
  }
  static ShapeMatrix fromBody(const BodyParams& p) { return {p.semiAxes()}; }
};

/// Camera-frame relative position measurement with analytical covariance.
struct OpNavMeasurement {
  Vec3 z_hill = Vec3::Zero();   // spacecraft minus body center, Hill [km]
  Vec3 z_camera = Vec3::Zero(); // same vector in the camera frame [km]
  Mat3 R_hill = Mat3::Zero();   // covariance of z_hill [km^2]
  double sigma_pix = 0.0;       // limb localization noise scale [px]
  int n_points = 0;
};

/// Spacecraft position relative to the body center, solved from limb-point
/// lines of sight (limb-cone least squares in the sphered space).  The
/// attitude matrix maps body principal frame vectors into the camera frame;
/// the returned vector is expressed in the camera frame.
Vec3 craPosition(const LimbPointSet& limb, const InverseCameraMatrix& cinv,
                 const Mat3& att_camera_from_body, const ShapeMatrix& shape);

/// Limb localization noise estimate: residual spread of the points about a
/// fitted centered conic, normalized by the local conic radius and rescaled
/// to pixels.  Throws on degenerate fits; callers fall back to a floor.
double estimateSigmaPix(const LimbPointSet& limb);

/// First-order covariance of craPosition with respect to the stacked pixel
/// coordinates: R = sigma_pix^2 J J^T, J by central differences (0.01 px).
Mat3 measurementCovariance(const LimbPointSet& limb, const InverseCameraMatrix& cinv,
                           const Mat3& att_camera_from_body, const ShapeMatrix& shape,
                           double sigma_pix);

struct MeasureOptions {
  double rel_threshold = 0.4;
  double abs_min_gradient = 0.1;
  double noise_sigma = 0.01;
  double psf_sigma_px = 1.9;
  int min_limb_points = 10;
  double sigma_pix_floor = 0.25; // px, used when the conic fit degenerates
};

/// Full pipeline: nadir pose, render, edge detection, limb-cone solve,
/// covariance, rotation into the Hill frame.  Returns nullopt (Invalid) when
/// the limb set is too small or the geometry is unsolvable, which is the
/// dark-side regime.
std::optional<OpNavMeasurement> measure(const Vec3& spacecraft_pos_km,
                                        const BodyParams& body,
                                        const CameraIntrinsics& cam, double t_s,
                                        std::uint64_t noise_seed,
                                        const MeasureOptions& opts);

} // namespace onav

#endif // ONAV_OPNAV_HPP
