#include "egoloc/camera.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "egoloc/error.hpp"

namespace egoloc {

namespace {

constexpr double kOrthonormalTol = 1e-9;
constexpr double kUndistortAcceptTol = 1e-10;
constexpr int kUndistortMaxIter = 100;
constexpr double kHalfPi = 1.5707963267948966;

double distort_theta(double theta, double k1, double k2) {
  const double t2 = theta * theta;
  return theta * (1.0 + t2 * (k1 + t2 * k2));
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidIntrinsics, "focal lengths must be positive");
  }
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy) ||
      !std::isfinite(k1) || !std::isfinite(k2)) {
    throw Error(ErrorCode::InvalidIntrinsics, "non-finite intrinsic parameter");
  }
  if (model == CameraModel::Pinhole && (k1 != 0.0 || k2 != 0.0)) {
    throw Error(ErrorCode::InvalidIntrinsics, "pinhole model requires k1 = k2 = 0");
  }
  if (model == CameraModel::RadialFisheye && fx != fy) {
    throw Error(ErrorCode::InvalidIntrinsics, "radial fisheye model requires fx = fy");
  }
}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  const double err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err < kOrthonormalTol)) {
    throw Error(ErrorCode::InvalidPose, "rotation is not orthonormal");
  }
  if (!(rotation.determinant() > 0.0)) {
    throw Error(ErrorCode::InvalidPose, "rotation determinant must be +1");
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::InvalidPose, "translation must be finite");
  }
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::InvalidPose, "bottom row of a rigid transform must be [0 0 0 1]");
  }
  return Pose(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Pose invert_pose(const Pose& pose) {
  const Eigen::Matrix3d r_inv = pose.rotation().transpose();
  return Pose(r_inv, -(r_inv * pose.translation()));
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

PixelPoint project(const Eigen::Vector3d& point_cam, const CameraIntrinsics& intr) {
  if (!(point_cam.z() > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "projection requires z > 0");
  }
  const double xn = point_cam.x() / point_cam.z();
  const double yn = point_cam.y() / point_cam.z();

  if (intr.model == CameraModel::Pinhole) {
    return {intr.fx * xn + intr.cx, intr.fy * yn + intr.cy};
  }

  const double r = std::hypot(xn, yn);
  if (r == 0.0) return {intr.cx, intr.cy};
  const double theta = std::atan(r);
  if (theta >= kHalfPi) {
    throw Error(ErrorCode::FieldOfView, "ray outside the fisheye field of view");
  }
  const double scale = distort_theta(theta, intr.k1, intr.k2) / r;
  return {intr.fx * scale * xn + intr.cx, intr.fy * scale * yn + intr.cy};
}

Eigen::Vector2d undistort_to_ray(const PixelPoint& px, const CameraIntrinsics& intr) {
  if (!std::isfinite(px.u) || !std::isfinite(px.v)) {
    throw Error(ErrorCode::InvalidArgument, "pixel coordinates must be finite");
  }
  const double mx = (px.u - intr.cx) / intr.fx;
  const double my = (px.v - intr.cy) / intr.fy;

  if (intr.model == CameraModel::Pinhole) return {mx, my};

  const double theta_d = std::hypot(mx, my);
  if (theta_d == 0.0) return {0.0, 0.0};

  // theta <- theta_d / (1 + k1 theta^2 + k2 theta^4), iterated to machine
  // precision; convergence is accepted when the final step is below 1e-10.
  double theta = theta_d;
  double step = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kUndistortMaxIter; ++i) {
    const double t2 = theta * theta;
    const double next = theta_d / (1.0 + t2 * (intr.k1 + t2 * intr.k2));
    step = std::abs(next - theta);
    theta = next;
    if (step < 1e-15) break;
  }
  if (!(step < kUndistortAcceptTol) || !std::isfinite(theta)) {
    throw Error(ErrorCode::NoConvergence, "fisheye undistortion did not converge");
  }
  const double r = std::tan(theta);
  return {mx * r / theta_d, my * r / theta_d};
}

WorldPoint unproject(const PixelPoint& px, double depth, const CameraIntrinsics& intr,
                     const Pose& pose) {
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "unprojection requires depth > 0");
  }
  const Eigen::Vector2d ray = undistort_to_ray(px, intr);
  const Eigen::Vector3d point_cam(depth * ray.x(), depth * ray.y(), depth);
  return WorldPoint::from(pose.to_world(point_cam));
}

Eigen::Vector3d world_to_cam(const WorldPoint& wp, const Pose& pose) {
  return pose.to_camera(wp.vec());
}

}  // namespace egoloc
