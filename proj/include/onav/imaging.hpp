#ifndef ONAV_IMAGING_HPP
#define ONAV_IMAGING_HPP

#include <string>
#include <vector>

#include "onav/body.hpp"

namespace onav {

/// Pinhole camera.  The inverse calibration matrix carries the pixel-density
/// and principal-point terms; the focal length maps gnomonic coordinates to
/// pixels separately.
struct CameraIntrinsics {
  double fov_deg = 30.0;
  int S = 1000;           // square image side [px]
  double alpha_skew = 0.0;
  double dx = 1.0;        // unit pixel densities
  double dy = 1.0;

  double focalLength() const { // [px], l = (S/2)/tan(fov/2)
    return (S / 2.0) / std::tan(deg2rad(fov_deg) / 2.0);
  }
  double up() const { return S / 2.0; }
  double vp() const { return S / 2.0; }
  void validate() const;
};

/// Camera pose in the Hill frame: +z boresight, +x along image u, +y along
/// image v (v grows downward), so `up` maps to -y.
struct CameraPose {
  Vec3 position = Vec3::Zero();  // km, Hill
  Vec3 boresight = Vec3::UnitZ();
  Vec3 up = Vec3::UnitY();

  void validate() const;
  /// Rotation camera -> Hill (columns are camera axes in Hill coordinates).
  Mat3 cameraToHill() const;
};

/// Nadir-pointing pose from a spacecraft position: boresight toward the body
/// center, up from projecting Hill z onto the image plane (Hill y fallback
/// when the boresight is near-parallel to z).
CameraPose nadirPose(const Vec3& position_km);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data; // row-major, [0,1]

  float at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
};

/// Columns of homogeneous pixel coordinates [u, v, 1] of detected limb points.
struct LimbPointSet {
  std::vector<Eigen::Vector2d> points; // (u, v)
  std::size_t count() const { return points.size(); }
};

struct RenderOptions {
  double noise_sigma = 0.0;  // additive Gaussian, post-clamp to [0,1]
  std::uint64_t seed = 0;
  double psf_sigma_px = 0.0; // optical point-spread blur before noise
};

/// Rotation of the body about its spin axis at time t (operator body
/// principal frame -> Hill).
Mat3 bodyRotation(const BodyParams& p, double t_s);

/// Ray-traced grayscale image of the sunlit ellipsoid.  Lambertian shading
/// with the sun at infinity along -x (Hill), black background, optional
/// Gaussian PSF, then additive pixel noise clamped to [0,1].
GrayImage render(const BodyParams& body, const CameraPose& pose,
                 const CameraIntrinsics& cam, double t_s,
                 const RenderOptions& opts);

/// Additive i.i.d. Gaussian noise, clamped to [0,1].
GrayImage addNoise(const GrayImage& img, double sigma, std::uint64_t seed);

/// Gradient edge detection: central-difference gradient magnitude,
/// threshold = max(rel_threshold * max_gradient, abs_min_gradient).
LimbPointSet detectEdges(const GrayImage& img, double rel_threshold,
                         double abs_min_gradient);

/// 8-bit binary PGM (P5).
void writePgm(const GrayImage& img, const std::string& path);

} // namespace onav

#endif // ONAV_IMAGING_HPP
