#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "onav/opnav.hpp"

using namespace onav;

namespace {

CameraIntrinsics tableCamera() { return CameraIntrinsics{}; } // 30 deg, 1000 px

BodyParams sphereBody() { return bennuLikeBody(); }

/// Forward pixel projection u = C [l x, l y, 1]^T used by the analytic limb
/// oracle; the exact inverse of the calibrated line-of-sight map.
Eigen::Vector2d projectPixel(const Vec3& dir_cam, const CameraIntrinsics& cam) {
  const double l = cam.focalLength();
  const double xb = l * dir_cam.x() / dir_cam.z();
  const double yb = l * dir_cam.y() / dir_cam.z();
  return {cam.dx * xb + cam.alpha_skew * yb + cam.up(), cam.dy * yb + cam.vp()};
}

/// Exact limb points of an ellipsoid seen from body-frame position P: the
/// limb is the circle P^T A X = 1 on the surface, a circle in the sphered
/// space.  Returns pixel coordinates through the given pose/camera.
LimbPointSet analyticLimb(const Vec3& axes, const Vec3& P_body, const Mat3& T_cb,
                          const CameraIntrinsics& cam, int n) {
  const Mat3 D = Vec3(1.0 / axes.x(), 1.0 / axes.y(), 1.0 / axes.z()).asDiagonal();
  const Mat3 Dinv = axes.asDiagonal();
  const Vec3 y0 = D * P_body;
  const double cg = 1.0 / y0.norm();
  REQUIRE(y0.norm() > 1.0);
  const double sg = std::sqrt(1.0 - cg * cg);
  const Vec3 w = y0.normalized();
  Vec3 e1 = w.cross(Vec3::UnitZ());
  if (e1.norm() < 1e-9) e1 = w.cross(Vec3::UnitY());
  e1.normalize();
  const Vec3 e2 = w.cross(e1);
  LimbPointSet out;
  for (int i = 0; i < n; ++i) {
    const double psi = 2.0 * kPi * i / n;
    const Vec3 Y = cg * w + sg * (std::cos(psi) * e1 + std::sin(psi) * e2);
    const Vec3 X = Dinv * Y;
    const Vec3 dir_cam = T_cb * (X - P_body);
    if (dir_cam.z() <= 0.0) continue;
    const auto uv = projectPixel(dir_cam, cam);
    out.points.emplace_back(uv.x(), uv.y());
  }
  return out;
}

double litRadiusPx(const GrayImage& img, double thresh = 1.0 / 255.0) {
  // largest distance of a lit pixel from the principal point
  double rmax = 0.0;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      if (img.at(r, c) > thresh)
        rmax = std::max(rmax, std::hypot(c - img.width / 2.0, r - img.height / 2.0));
  return rmax;
}

int litCount(const GrayImage& img, double thresh = 1.0 / 255.0) {
  int n = 0;
  for (float v : img.data)
    if (v > thresh) ++n;
  return n;
}

} // namespace

TEST_CASE("body rotation basics") {
  BodyParams p = sphereBody();
  p.rotation_axis = Vec3(0, 0, 1);
  CHECK((bodyRotation(p, 0.0) - Mat3::Identity()).norm() < 1e-15);
  CHECK((bodyRotation(p, p.rotation_period) - Mat3::Identity()).norm() < 1e-12);
  const Mat3 half = bodyRotation(p, p.rotation_period / 2.0);
  CHECK((half * Vec3::UnitX() + Vec3::UnitX()).norm() < 1e-12);
}

TEST_CASE("full-moon view: lit disk radius matches the pinhole projection") {
  const BodyParams p = sphereBody();
  const CameraIntrinsics cam = tableCamera();
  RenderOptions opts; // no noise, no blur
  const CameraPose pose = nadirPose(Vec3(-5.0, 0.0, 0.0));
  const GrayImage img = render(p, pose, cam, 0.0, opts);
  const double expect = cam.focalLength() * p.radius / 5.0; // ~89.94 px
  CHECK(litRadiusPx(img) == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("dark-side view renders black") {
  const BodyParams p = sphereBody();
  RenderOptions opts;
  const GrayImage img = render(p, nadirPose(Vec3(5.0, 0.0, 0.0)), tableCamera(), 0.0, opts);
  for (float v : img.data) CHECK(v == 0.0f);
}

TEST_CASE("side-on view lights half the full-moon pixel count") {
  const BodyParams p = sphereBody();
  RenderOptions opts;
  const GrayImage full =
      render(p, nadirPose(Vec3(-5.0, 0.0, 0.0)), tableCamera(), 0.0, opts);
  const GrayImage half =
      render(p, nadirPose(Vec3(0.0, -5.0, 0.0)), tableCamera(), 0.0, opts);
  CHECK(std::abs(litCount(half) - 0.5 * litCount(full)) < 0.02 * 0.5 * litCount(full));
}

TEST_CASE("camera inside the body is rejected") {
  const BodyParams p = sphereBody();
  RenderOptions opts;
  CHECK_THROWS_AS(
      render(p, nadirPose(Vec3(0.1, 0.0, 0.0)), tableCamera(), 0.0, opts), Error);
}

TEST_CASE("sphere renders are rotation invariant") {
  const BodyParams p = sphereBody();
  RenderOptions opts;
  const CameraPose pose = nadirPose(Vec3(0.0, -5.0, 0.0));
  const GrayImage a = render(p, pose, tableCamera(), 0.0, opts);
  const GrayImage b = render(p, pose, tableCamera(), 0.37 * p.rotation_period, opts);
  REQUIRE(a.data.size() == b.data.size());
  // pixel-identical at 8-bit depth; raw floats may differ in the last ulp
  // because the rotated intersection arithmetic rounds differently
  std::size_t diff = 0;
  float maxd = 0.0f;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (std::lround(a.data[i] * 255.0f) != std::lround(b.data[i] * 255.0f)) ++diff;
    maxd = std::max(maxd, std::abs(a.data[i] - b.data[i]));
  }
  CHECK(diff == 0);
  CHECK(maxd < 1e-5f);
}

TEST_CASE("noise: identity at zero, sample statistics, determinism") {
  GrayImage img;
  img.width = img.height = 1000;
  img.data.assign(1000 * 1000, 0.5f);

  const GrayImage same = addNoise(img, 0.0, 42);
  CHECK(same.data == img.data);

  const GrayImage noisy = addNoise(img, 0.01, 42);
  double mean = 0.0;
  for (std::size_t i = 0; i < noisy.data.size(); ++i)
    mean += noisy.data[i] - img.data[i];
  mean /= static_cast<double>(noisy.data.size());
  double var = 0.0;
  for (std::size_t i = 0; i < noisy.data.size(); ++i) {
    const double d = noisy.data[i] - img.data[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(noisy.data.size() - 1);
  CHECK(std::sqrt(var) > 0.0095);
  CHECK(std::sqrt(var) < 0.0105);

  const GrayImage again = addNoise(img, 0.01, 42);
  CHECK(again.data == noisy.data);
  const GrayImage other = addNoise(img, 0.01, 43);
  CHECK(other.data != noisy.data);
}

TEST_CASE("edge detection: noise alone stays below the absolute threshold") {
  GrayImage img;
  img.width = img.height = 1000;
  img.data.assign(1000 * 1000, 0.0f);
  const GrayImage noisy = addNoise(img, 0.01, 7);
  const LimbPointSet limb = detectEdges(noisy, 0.7, 0.1);
  CHECK(limb.count() == 0);
}

TEST_CASE("edge detection localizes a vertical step") {
  GrayImage img;
  img.width = img.height = 64;
  img.data.assign(64 * 64, 0.0f);
  for (int r = 0; r < 64; ++r)
    for (int c = 40; c < 64; ++c) img.at(r, c) = 1.0f;
  const LimbPointSet limb = detectEdges(img, 0.7, 0.1);
  REQUIRE(limb.count() > 0);
  for (const auto& uv : limb.points) CHECK(std::abs(uv.x() - 39.5) <= 1.0);
}

TEST_CASE("lower relative threshold keeps a longer limb arc") {
  const BodyParams p = sphereBody();
  RenderOptions opts;
  opts.noise_sigma = 0.01;
  opts.seed = 5;
  opts.psf_sigma_px = 1.9;
  const GrayImage img =
      render(p, nadirPose(Vec3(0.0, -5.0, 0.0)), tableCamera(), 0.0, opts);
  const LimbPointSet loose = detectEdges(img, 0.4, 0.1);
  const LimbPointSet tight = detectEdges(img, 0.7, 0.1);
  CHECK(loose.count() > tight.count());
  CHECK(tight.count() > 0);
}

TEST_CASE("noiseless side-on limb points lie on the projected circle") {
  const BodyParams p = sphereBody();
  RenderOptions opts;
  const GrayImage img =
      render(p, nadirPose(Vec3(0.0, -5.0, 0.0)), tableCamera(), 0.0, opts);
  const LimbPointSet limb = detectEdges(img, 0.4, 0.1);
  REQUIRE(limb.count() > 50);
  // radial RMS about the principal point against the pinhole radius
  const double rho = tableCamera().focalLength() * p.radius / 5.0;
  double rms = 0.0;
  for (const auto& uv : limb.points) {
    const double d = std::hypot(uv.x() - 500.0, uv.y() - 500.0) - rho;
    rms += d * d;
  }
  rms = std::sqrt(rms / limb.count());
  CHECK(rms < 1.0);
}

TEST_CASE("pgm export writes a valid P5 header") {
  GrayImage img;
  img.width = 4;
  img.height = 3;
  img.data = {0.0f, 0.5f, 1.0f, 0.25f, 0.1f, 0.9f, 0.3f, 0.7f, 0.2f, 0.6f, 0.4f, 0.8f};
  const std::string path = "/tmp/onav_test.pgm";
  writePgm(img, path);
  std::ifstream f(path, std::ios::binary);
  std::string magic;
  int w, h, maxv;
  f >> magic >> w >> h >> maxv;
  CHECK(magic == "P5");
  CHECK(w == 4);
  CHECK(h == 3);
  CHECK(maxv == 255);
  f.get();
  std::vector<char> buf(12);
  f.read(buf.data(), 12);
  CHECK(f.gcount() == 12);
  std::filesystem::remove(path);
}

// ---------------------------------------------------------------------------
// Horizon-based measurement
// ---------------------------------------------------------------------------

TEST_CASE("inverse camera matrix entries") {
  CameraIntrinsics cam = tableCamera();
  const InverseCameraMatrix m = inverseCameraMatrix(cam);
  Mat3 expect;
  expect << 1, 0, -500, 0, 1, -500, 0, 0, 1;
  CHECK((m.Cinv - expect).norm() < 1e-12);
  CHECK(m.focal_px == doctest::Approx(1866.0254).epsilon(1e-6));

  cam.alpha_skew = 0.1;
  const InverseCameraMatrix ms = inverseCameraMatrix(cam);
  CHECK(ms.Cinv(0, 1) == doctest::Approx(-0.1).epsilon(1e-12));

  cam.dx = 0.0;
  CHECK_THROWS_AS(inverseCameraMatrix(cam), Error);
}

TEST_CASE("limb-cone solve on the unit sphere at range 2") {
  CameraIntrinsics cam = tableCamera();
  cam.fov_deg = 60.0; // unit sphere at range 2 subtends 60 deg
  const Vec3 P(0.0, 0.0, 2.0);
  // camera at P looking back at the origin: boresight -z in body axes
  Mat3 T_cb;
  T_cb << 1, 0, 0, 0, -1, 0, 0, 0, -1; // body -> camera
  const Vec3 axes = Vec3::Ones();
  const LimbPointSet limb = analyticLimb(axes, P, T_cb, cam, 64);
  REQUIRE(limb.count() == 64);

  const InverseCameraMatrix cinv = inverseCameraMatrix(cam);
  // limb rays satisfy u^T p' = -sqrt(3) for the unit sphere at range 2
  for (const auto& uv : limb.points) {
    const Vec3 s_cam = cinv.lineOfSight(uv.x(), uv.y());
    const Vec3 s_body = T_cb.transpose() * s_cam;
    CHECK(s_body.dot(P) == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-9));
  }
  const Vec3 rec = craPosition(limb, cinv, T_cb, ShapeMatrix{axes});
  const Vec3 rec_body = T_cb.transpose() * rec;
  CHECK((rec_body - P).norm() < 1e-9 * P.norm());
}

TEST_CASE("limb-cone solve needs at least 3 points") {
  const InverseCameraMatrix cinv = inverseCameraMatrix(tableCamera());
  LimbPointSet limb;
  limb.points = {{10.0, 20.0}, {30.0, 40.0}};
  CHECK_THROWS_AS(craPosition(limb, cinv, Mat3::Identity(), ShapeMatrix{Vec3::Ones()}),
                  Error);
}

TEST_CASE("analytic limb oracle: exact recovery over random ellipsoid poses") {
  Rng rng(21);
  const CameraIntrinsics cam = tableCamera();
  const InverseCameraMatrix cinv = inverseCameraMatrix(cam);
  for (int trial = 0; trial < 50; ++trial) {
    // random shape ratios up to [5,1,1], random exterior pose
    const double a = 1.0 + 4.0 * rng.uniform();
    const double b = 1.0 + (a - 1.0) * rng.uniform();
    Vec3 ratios(a, b, 1.0);
    BodyParams body = sphereBody();
    body.shape_ratios = ratios;
    const Vec3 axes = body.semiAxes();

    Vec3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
    if (dir.norm() < 1e-6) { --trial; continue; }
    dir.normalize();
    const double range = 3.0 + 12.0 * rng.uniform();
    const Vec3 P = range * dir;

    const CameraPose pose = nadirPose(P);
    const Mat3 T_cb = pose.cameraToHill().transpose(); // body frame == Hill here
    const LimbPointSet limb = analyticLimb(axes, P, T_cb, cam, 96);
    REQUIRE(limb.count() > 10);
    const Vec3 rec = craPosition(limb, cinv, T_cb, ShapeMatrix{axes});
    const Vec3 rec_body = T_cb.transpose() * rec;
    CHECK((rec_body - P).norm() < 1e-6 * range);
  }
}

TEST_CASE("scale equivariance of the limb geometry") {
  const CameraIntrinsics cam = tableCamera();
  const Vec3 axes(0.3, 0.25, 0.2);
  const Vec3 P(1.0, -4.0, 2.0);
  const CameraPose pose = nadirPose(P);
  const Mat3 T_cb = pose.cameraToHill().transpose();
  const LimbPointSet l1 = analyticLimb(axes, P, T_cb, cam, 48);
  const LimbPointSet l2 = analyticLimb(3.7 * axes, 3.7 * P, T_cb, cam, 48);
  REQUIRE(l1.count() == l2.count());
  for (std::size_t i = 0; i < l1.count(); ++i)
    CHECK((l1.points[i] - l2.points[i]).norm() < 1e-9);
}

TEST_CASE("rendered noiseless sphere, side-on at 5 km: error below 1% of range") {
  const BodyParams p = sphereBody();
  MeasureOptions mo;
  mo.noise_sigma = 0.0;
  const auto meas = measure(Vec3(0.0, -5.0, 0.0), p, tableCamera(), 0.0, 1, mo);
  REQUIRE(meas.has_value());
  CHECK((meas->z_hill - Vec3(0.0, -5.0, 0.0)).norm() < 0.05);
}

TEST_CASE("sigma_pix: exact circle, jittered circle, exact ellipse") {
  Rng rng(31);
  // exact circle
  LimbPointSet circle;
  for (int i = 0; i < 200; ++i) {
    const double a = 2.0 * kPi * i / 200.0;
    circle.points.emplace_back(500.0 + 90.0 * std::cos(a), 500.0 + 90.0 * std::sin(a));
  }
  CHECK(estimateSigmaPix(circle) < 1e-9);

  // radial jitter of 0.5 px
  for (int seed = 0; seed < 100; ++seed) {
    Rng r2(static_cast<std::uint64_t>(seed) + 100);
    LimbPointSet jit;
    for (int i = 0; i < 200; ++i) {
      const double a = 2.0 * kPi * i / 200.0;
      const double rho = 90.0 + 0.5 * r2.gaussian();
      jit.points.emplace_back(500.0 + rho * std::cos(a), 500.0 + rho * std::sin(a));
    }
    const double est = estimateSigmaPix(jit);
    CHECK(est > 0.4);
    CHECK(est < 0.6);
  }

  // exact 2:1 ellipse: ellipticity scaling removes the shape bias
  LimbPointSet ell;
  for (int i = 0; i < 200; ++i) {
    const double a = 2.0 * kPi * i / 200.0;
    ell.points.emplace_back(500.0 + 120.0 * std::cos(a), 500.0 + 60.0 * std::sin(a));
  }
  CHECK(estimateSigmaPix(ell) < 0.05);

  LimbPointSet tiny;
  tiny.points = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(estimateSigmaPix(tiny), Error);
}

TEST_CASE("measurement covariance scaling in sigma_pix") {
  const CameraIntrinsics cam = tableCamera();
  const InverseCameraMatrix cinv = inverseCameraMatrix(cam);
  const BodyParams p = sphereBody();
  const Vec3 P(0.0, -5.0, 0.0);
  const CameraPose pose = nadirPose(P);
  const Mat3 T_cb = pose.cameraToHill().transpose();
  const LimbPointSet limb = analyticLimb(p.semiAxes(), P, T_cb, cam, 64);

  const Mat3 R0 = measurementCovariance(limb, cinv, T_cb, ShapeMatrix{p.semiAxes()}, 0.0);
  CHECK(R0.norm() == 0.0);
  const Mat3 R1 = measurementCovariance(limb, cinv, T_cb, ShapeMatrix{p.semiAxes()}, 0.5);
  const Mat3 R2 = measurementCovariance(limb, cinv, T_cb, ShapeMatrix{p.semiAxes()}, 1.0);
  CHECK((R2 - 4.0 * R1).norm() < 1e-12 * R2.norm());
  // PSD
  Eigen::SelfAdjointEigenSolver<Mat3> es(R2);
  CHECK(es.eigenvalues().minCoeff() >= -1e-18);
}

TEST_CASE("measure: dark side is Invalid, side-on is valid and bounded") {
  const BodyParams p = sphereBody();
  MeasureOptions mo; // defaults: noise 0.01, psf per config
  const auto dark = measure(Vec3(5.0, 0.0, 0.0), p, tableCamera(), 0.0, 3, mo);
  CHECK(!dark.has_value());
  // 20 degrees off the +x axis: still inside the keep-out regime
  const Vec3 pos20 = 5.0 * Vec3(std::cos(deg2rad(20.0)), -std::sin(deg2rad(20.0)), 0.0);
  const auto near_dark = measure(pos20, p, tableCamera(), 0.0, 4, mo);
  CHECK(!near_dark.has_value());

  const auto side = measure(Vec3(0.0, -5.0, 0.0), p, tableCamera(), 0.0, 5, mo);
  REQUIRE(side.has_value());
  const Vec3 err = side->z_hill - Vec3(0.0, -5.0, 0.0);
  Eigen::SelfAdjointEigenSolver<Mat3> es(side->R_hill);
  const double bound = 3.0 * std::sqrt(es.eigenvalues().maxCoeff());
  CHECK(err.norm() < std::max(bound, 0.05));
  CHECK(side->n_points >= 10);
  CHECK(side->sigma_pix > 0.0);
}
