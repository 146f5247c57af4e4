#include "onav/opnav.hpp"

#include <cmath>

namespace onav {

InverseCameraMatrix inverseCameraMatrix(const CameraIntrinsics& cam) {
  cam.validate();
  InverseCameraMatrix m;
  m.Cinv << 1.0 / cam.dx, -cam.alpha_skew / (cam.dx * cam.dy),
      (cam.alpha_skew * cam.vp() - cam.dy * cam.up()) / (cam.dx * cam.dy),
      0.0, 1.0 / cam.dy, -cam.vp() / cam.dy,
      0.0, 0.0, 1.0;
  m.focal_px = cam.focalLength();
  return m;
}

namespace {

struct LimbCone {
  // normal-equation accumulators of the least squares s_bar^T n = 1
  Mat3 N = Mat3::Zero();
  Vec3 b = Vec3::Zero();
};

Vec3 spheredRay(const Vec3& s_cam, const Mat3& T_cb, const Mat3& D) {
  const Vec3 s_body = T_cb.transpose() * s_cam;
  const Vec3 d = D * s_body;
  return d.normalized();
}

/// Solve the limb cone for the observer position in the body principal frame.
Vec3 solveCone(const LimbCone& lc, const Mat3& Dinv) {
  Eigen::LLT<Mat3> llt(lc.N);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(lc.N);
    if (es.eigenvalues().minCoeff() < 1e-12 * es.eigenvalues().maxCoeff())
      throw Error(ErrorCode::DegenerateLimb, "limb points degenerate for the cone fit");
  }
  const Vec3 n = llt.info() == Eigen::Success
                     ? llt.solve(lc.b)
                     : Vec3(lc.N.fullPivLu().solve(lc.b));
  const double nn = n.squaredNorm();
  if (!(nn > 1.0))
    throw Error(ErrorCode::InfeasibleGeometry,
                "cone fit places the observer inside the transformed body");
  const Vec3 p_transformed = -n / std::sqrt(nn - 1.0);
  return Dinv * p_transformed;
}

} // namespace

Vec3 craPosition(const LimbPointSet& limb, const InverseCameraMatrix& cinv,
                 const Mat3& T_cb, const ShapeMatrix& shape) {
  if (limb.count() < 3)
    throw Error(ErrorCode::DegenerateLimb, "need at least 3 limb points");
  const Mat3 D = shape.D();
  LimbCone lc;
  for (const auto& uv : limb.points) {
    const Vec3 s = spheredRay(cinv.lineOfSight(uv.x(), uv.y()), T_cb, D);
    lc.N += s * s.transpose();
    lc.b += s;
  }
  const Mat3 Dinv = Vec3(shape.semi_axes).asDiagonal();
  const Vec3 p_body = solveCone(lc, Dinv);
  // spacecraft relative to the body center, camera frame
  return T_cb * p_body;
}

double estimateSigmaPix(const LimbPointSet& limb) {
  const std::size_t n = limb.count();
  if (n < 5)
    throw Error(ErrorCode::DegenerateLimb, "need at least 5 points for sigma_pix");

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : limb.points) centroid += p;
  centroid /= static_cast<double>(n);

  // 5-parameter conic about the centroid:
  //   alpha x^2 + beta x y + gamma y^2 + delta x + eps y = 1
  Eigen::Matrix<double, 5, 5> M = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 1> rhs = Eigen::Matrix<double, 5, 1>::Zero();
  for (const auto& p : limb.points) {
    const double x = p.x() - centroid.x();
    const double y = p.y() - centroid.y();
    Eigen::Matrix<double, 5, 1> row;
    row << x * x, x * y, y * y, x, y;
    M += row * row.transpose();
    rhs += row;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(M);
  if (!lu.isInvertible())
    throw Error(ErrorCode::DegenerateLimb, "conic fit is rank deficient");
  const Eigen::Matrix<double, 5, 1> c = lu.solve(rhs);
  const double al = c(0), be = c(1), ga = c(2), de = c(3), ep = c(4);

  // conic center and the centered level Q(x) = cstar
  Eigen::Matrix2d Q;
  Q << 2.0 * al, be, be, 2.0 * ga;
  if (std::abs(Q.determinant()) < 1e-18)
    throw Error(ErrorCode::DegenerateLimb, "conic has no finite center");
  const Eigen::Vector2d x0 = Q.lu().solve(Eigen::Vector2d(-de, -ep));
  const double Qx0 = al * x0.x() * x0.x() + be * x0.x() * x0.y() + ga * x0.y() * x0.y();
  const double cstar = 1.0 - Qx0 - de * x0.x() - ep * x0.y();
  if (!(cstar > 0.0) || !(al > 0.0) || !(4.0 * al * ga - be * be > 0.0))
    throw Error(ErrorCode::DegenerateLimb, "fitted conic is not an ellipse");

  double mean_ratio = 0.0, mean_rad = 0.0;
  std::vector<double> ratio(n);
  std::size_t i = 0;
  for (const auto& p : limb.points) {
    const double x = p.x() - centroid.x() - x0.x();
    const double y = p.y() - centroid.y() - x0.y();
    const double rho = std::hypot(x, y);
    const double cphi = rho > 0.0 ? x / rho : 1.0;
    const double sphi = rho > 0.0 ? y / rho : 0.0;
    const double q = al * cphi * cphi + be * cphi * sphi + ga * sphi * sphi;
    if (!(q > 0.0))
      throw Error(ErrorCode::DegenerateLimb, "non-elliptic direction in conic fit");
    const double rho_fit = std::sqrt(cstar / q);
    ratio[i++] = rho / rho_fit;
    mean_ratio += rho / rho_fit;
    mean_rad += rho_fit;
  }
  mean_ratio /= static_cast<double>(n);
  mean_rad /= static_cast<double>(n);
  double var = 0.0;
  for (double t : ratio) var += (t - mean_ratio) * (t - mean_ratio);
  var /= static_cast<double>(n - 1);
  return std::sqrt(var) * mean_rad;
}

Mat3 measurementCovariance(const LimbPointSet& limb, const InverseCameraMatrix& cinv,
                           const Mat3& T_cb, const ShapeMatrix& shape,
                           double sigma_pix) {
  const std::size_t n = limb.count();
  if (n < 3)
    throw Error(ErrorCode::DegenerateLimb, "need at least 3 limb points");
  const Mat3 D = shape.D();
  const Mat3 Dinv = Vec3(shape.semi_axes).asDiagonal();

  // Jacobian by central differences on each pixel coordinate; the normal
  // equations are updated rank-one per perturbed point rather than rebuilt.
  std::vector<Vec3> rays(n);
  LimbCone base;
  std::size_t i = 0;
  for (const auto& uv : limb.points) {
    rays[i] = spheredRay(cinv.lineOfSight(uv.x(), uv.y()), T_cb, D);
    base.N += rays[i] * rays[i].transpose();
    base.b += rays[i];
    ++i;
  }

  const double step = 0.01; // px
  auto solvePerturbed = [&](std::size_t idx, double du, double dv) -> Vec3 {
    const auto& uv = limb.points[idx];
    const Vec3 s = spheredRay(cinv.lineOfSight(uv.x() + du, uv.y() + dv), T_cb, D);
    LimbCone lc;
    lc.N = base.N - rays[idx] * rays[idx].transpose() + s * s.transpose();
    lc.b = base.b - rays[idx] + s;
    return T_cb * solveCone(lc, Dinv);
  };

  Mat3 JJt = Mat3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 ju = (solvePerturbed(k, step, 0.0) - solvePerturbed(k, -step, 0.0)) /
                    (2.0 * step);
    const Vec3 jv = (solvePerturbed(k, 0.0, step) - solvePerturbed(k, 0.0, -step)) /
                    (2.0 * step);
    JJt += ju * ju.transpose() + jv * jv.transpose();
  }
  Mat3 R = sigma_pix * sigma_pix * JJt;
  return 0.5 * (R + R.transpose());
}

std::optional<OpNavMeasurement> measure(const Vec3& pos_km, const BodyParams& body,
                                        const CameraIntrinsics& cam, double t_s,
                                        std::uint64_t noise_seed,
                                        const MeasureOptions& opts) {
  const CameraPose pose = nadirPose(pos_km);
  RenderOptions ropts;
  ropts.noise_sigma = opts.noise_sigma;
  ropts.seed = noise_seed;
  ropts.psf_sigma_px = opts.psf_sigma_px;
  const GrayImage img = render(body, pose, cam, t_s, ropts);
  const LimbPointSet limb = detectEdges(img, opts.rel_threshold, opts.abs_min_gradient);
  if (limb.count() < static_cast<std::size_t>(opts.min_limb_points)) return std::nullopt;

  const InverseCameraMatrix cinv = inverseCameraMatrix(cam);
  const Mat3 R_hb = bodyRotation(body, t_s); // principal -> Hill
  const Mat3 R_hc = pose.cameraToHill();     // camera -> Hill
  const Mat3 T_cb = R_hc.transpose() * R_hb; // body -> camera (known attitude)
  const ShapeMatrix shape = ShapeMatrix::fromBody(body);

  OpNavMeasurement meas;
  try {
    meas.z_camera = craPosition(limb, cinv, T_cb, shape);
    try {
      meas.sigma_pix = estimateSigmaPix(limb);
    } catch (const Error&) {
      meas.sigma_pix = opts.sigma_pix_floor;
    }
    const Mat3 R_cam = measurementCovariance(limb, cinv, T_cb, shape, meas.sigma_pix);
    meas.z_hill = R_hc * meas.z_camera;
    meas.R_hill = R_hc * R_cam * R_hc.transpose();
    meas.n_points = static_cast<int>(limb.count());
  } catch (const Error&) {
    // unsolvable limb geometry is the same regime as no limb: Invalid
    return std::nullopt;
  }
  return meas;
}

} // namespace onav
