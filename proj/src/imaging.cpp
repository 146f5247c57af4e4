#include "onav/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace onav {

void CameraIntrinsics::validate() const {
  if (S < 2) throw Error(ErrorCode::DomainError, "image size must be >= 2 px");
  if (!(fov_deg > 0.0) || !(fov_deg < 180.0))
    throw Error(ErrorCode::DomainError, "field of view must lie in (0, 180) deg");
  if (dx == 0.0 || dy == 0.0)
    throw Error(ErrorCode::DomainError, "pixel densities must be nonzero");
}

void CameraPose::validate() const {
  if (std::abs(boresight.norm() - 1.0) > 1e-12 || std::abs(up.norm() - 1.0) > 1e-12)
    throw Error(ErrorCode::DomainError, "pose axes must be unit norm");
  if (std::abs(boresight.dot(up)) > 1e-9)
    throw Error(ErrorCode::DomainError, "up must be orthogonal to boresight");
}

Mat3 CameraPose::cameraToHill() const {
  validate();
  const Vec3 z = boresight;
  const Vec3 y = -up;
  const Vec3 x = y.cross(z);
  Mat3 m;
  m.col(0) = x.normalized();
  m.col(1) = y.normalized();
  m.col(2) = z;
  return m;
}

CameraPose nadirPose(const Vec3& position_km) {
  const double rn = position_km.norm();
  if (!(rn > 0.0))
    throw Error(ErrorCode::DomainError, "nadir pose undefined at the origin");
  CameraPose pose;
  pose.position = position_km;
  pose.boresight = -position_km / rn;
  Vec3 up = Vec3::UnitZ() - Vec3::UnitZ().dot(pose.boresight) * pose.boresight;
  if (up.norm() < 1e-9)
    up = Vec3::UnitY() - Vec3::UnitY().dot(pose.boresight) * pose.boresight;
  pose.up = up.normalized();
  return pose;
}

Mat3 bodyRotation(const BodyParams& p, double t_s) {
  const double theta = 2.0 * kPi * t_s / p.rotation_period;
  return axisAngle(p.rotation_axis, theta);
}

namespace {

void gaussianBlurInPlace(GrayImage& img, double sigma, int r0, int r1, int c0, int c1) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i / sigma) * (i / sigma));
    kernel[i + radius] = static_cast<float>(w);
    sum += w;
  }
  for (auto& k : kernel) k = static_cast<float>(k / sum);

  r0 = std::max(0, r0 - radius);
  r1 = std::min(img.height - 1, r1 + radius);
  c0 = std::max(0, c0 - radius);
  c1 = std::min(img.width - 1, c1 + radius);

  // horizontal then vertical pass over the region of interest
  std::vector<float> tmp(static_cast<std::size_t>(r1 - r0 + 1) * (c1 - c0 + 1));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      float acc = 0.0f;
      for (int k = -radius; k <= radius; ++k) {
        const int cc = std::clamp(c + k, 0, img.width - 1);
        acc += kernel[k + radius] * img.at(r, cc);
      }
      tmp[static_cast<std::size_t>(r - r0) * (c1 - c0 + 1) + (c - c0)] = acc;
    }
  }
  for (int c = c0; c <= c1; ++c) {
    for (int r = r0; r <= r1; ++r) {
      float acc = 0.0f;
      for (int k = -radius; k <= radius; ++k) {
        const int rr = std::clamp(r + k, r0, r1);
        acc += kernel[k + radius] *
               tmp[static_cast<std::size_t>(rr - r0) * (c1 - c0 + 1) + (c - c0)];
      }
      img.at(r, c) = acc;
    }
  }
}

} // namespace

GrayImage render(const BodyParams& body, const CameraPose& pose,
                 const CameraIntrinsics& cam, double t_s,
                 const RenderOptions& opts) {
  cam.validate();
  pose.validate();
  const Vec3 axes = body.semiAxes();

  const Mat3 R_hb = bodyRotation(body, t_s);      // principal -> Hill
  const Mat3 R_hc = pose.cameraToHill();          // camera -> Hill
  const Mat3 R_bc = R_hb.transpose() * R_hc;      // camera -> principal

  const Vec3 o = R_hb.transpose() * pose.position; // camera origin, principal
  const Vec3 inv_ax2(1.0 / (axes.x() * axes.x()), 1.0 / (axes.y() * axes.y()),
                     1.0 / (axes.z() * axes.z()));
  if (o.x() * o.x() * inv_ax2.x() + o.y() * o.y() * inv_ax2.y() +
          o.z() * o.z() * inv_ax2.z() <= 1.0)
    throw Error(ErrorCode::DomainError, "camera inside the body");

  const Vec3 sun_dir_h = -Vec3::UnitX(); // direction toward the Sun, Hill
  const Vec3 sun_dir_b = R_hb.transpose() * sun_dir_h;

  GrayImage img;
  img.width = cam.S;
  img.height = cam.S;
  img.data.assign(static_cast<std::size_t>(cam.S) * cam.S, 0.0f);

  // Conservative projected bounding box around the body.
  const double l = cam.focalLength();
  const double dist = pose.position.norm();
  const double amax = axes.maxCoeff();
  int r0 = 0, r1 = cam.S - 1, c0 = 0, c1 = cam.S - 1;
  if (dist > amax) {
    const Vec3 center_c = R_hc.transpose() * (-pose.position);
    if (center_c.z() > 0.0) {
      const double uc = l * center_c.x() / center_c.z() + cam.up();
      const double vc = l * center_c.y() / center_c.z() + cam.vp();
      const double rad_px =
          l * amax / std::sqrt(std::max(dist * dist - amax * amax, 1e-12)) + 2.0;
      const double margin = rad_px + 3.0 * opts.psf_sigma_px + 2.0;
      c0 = std::clamp(static_cast<int>(std::floor(uc - margin)), 0, cam.S - 1);
      c1 = std::clamp(static_cast<int>(std::ceil(uc + margin)), 0, cam.S - 1);
      r0 = std::clamp(static_cast<int>(std::floor(vc - margin)), 0, cam.S - 1);
      r1 = std::clamp(static_cast<int>(std::ceil(vc + margin)), 0, cam.S - 1);
    }
  }

  const double inv_l = 1.0 / l;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      // pixel -> gnomonic -> camera ray; general intrinsics via C^-1 terms
      const double xg = ((c - cam.up()) / cam.dx -
                         cam.alpha_skew * (r - cam.vp()) / (cam.dx * cam.dy)) *
                        inv_l;
      const double yg = ((r - cam.vp()) / cam.dy) * inv_l;
      const Vec3 d = R_bc * Vec3(xg, yg, 1.0);

      // ray-ellipsoid intersection in the principal frame
      const Vec3 dA(d.x() * inv_ax2.x(), d.y() * inv_ax2.y(), d.z() * inv_ax2.z());
      const double a = d.dot(dA);
      const Vec3 oA(o.x() * inv_ax2.x(), o.y() * inv_ax2.y(), o.z() * inv_ax2.z());
      const double b = d.dot(oA);
      const double c2 = o.dot(oA) - 1.0;
      const double disc = b * b - a * c2;
      if (disc <= 0.0) continue;
      const double t = (-b - std::sqrt(disc)) / a;
      if (t <= 0.0) continue;
      const Vec3 X = o + t * d;
      Vec3 n(X.x() * inv_ax2.x(), X.y() * inv_ax2.y(), X.z() * inv_ax2.z());
      n.normalize();
      const double shade = n.dot(sun_dir_b);
      if (shade > 0.0) img.at(r, c) = static_cast<float>(shade);
    }
  }

  gaussianBlurInPlace(img, opts.psf_sigma_px, r0, r1, c0, c1);

  if (opts.noise_sigma > 0.0) return addNoise(img, opts.noise_sigma, opts.seed);
  return img;
}

GrayImage addNoise(const GrayImage& img, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw Error(ErrorCode::DomainError, "noise sigma must be >= 0");
  GrayImage out = img;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& px : out.data) {
    const double v = px + sigma * rng.gaussian();
    px = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

LimbPointSet detectEdges(const GrayImage& img, double rel_threshold,
                         double abs_min_gradient) {
  if (!(rel_threshold > 0.0) || rel_threshold > 1.0)
    throw Error(ErrorCode::DomainError, "relative threshold must lie in (0, 1]");
  const int H = img.height, W = img.width;
  std::vector<float> mag(static_cast<std::size_t>(H) * W, 0.0f);
  double gmax = 0.0;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      // central differences, one-sided at the borders
      const float gx = (c == 0)       ? img.at(r, 1) - img.at(r, 0)
                       : (c == W - 1) ? img.at(r, W - 1) - img.at(r, W - 2)
                                      : 0.5f * (img.at(r, c + 1) - img.at(r, c - 1));
      const float gy = (r == 0)       ? img.at(1, c) - img.at(0, c)
                       : (r == H - 1) ? img.at(H - 1, c) - img.at(H - 2, c)
                                      : 0.5f * (img.at(r + 1, c) - img.at(r - 1, c));
      const float m = std::sqrt(gx * gx + gy * gy);
      mag[static_cast<std::size_t>(r) * W + c] = m;
      if (m > gmax) gmax = m;
    }
  }
  const double thr = std::max(rel_threshold * gmax, abs_min_gradient);
  LimbPointSet out;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      if (mag[static_cast<std::size_t>(r) * W + c] > thr)
        out.points.emplace_back(static_cast<double>(c), static_cast<double>(r));
  return out;
}

void writePgm(const GrayImage& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width));
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const float v = std::clamp(img.at(r, c), 0.0f, 1.0f);
      row[static_cast<std::size_t>(c)] =
          static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    f.write(reinterpret_cast<const char*>(row.data()), img.width);
  }
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

} // namespace onav
