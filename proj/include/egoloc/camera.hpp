#pragma once

#include <Eigen/Core>

namespace egoloc {

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static WorldPoint from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

enum class CameraModel { Pinhole, RadialFisheye };

// Pinhole: fx, fy, cx, cy. RadialFisheye: equidistant mapping with two
// radial coefficients; fx == fy is required and k1/k2 apply to theta.
struct CameraIntrinsics {
  CameraModel model = CameraModel::Pinhole;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;  // throws InvalidIntrinsics
  bool contains(const PixelPoint& px) const {
    return px.u >= 0.0 && px.v >= 0.0 && px.u < width && px.v < height;
  }
};

// Rigid camera-to-world transform. The rotation is checked for
// orthonormality (tolerance 1e-9) and positive determinant on construction.
class Pose {
 public:
  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d to_world(const Eigen::Vector3d& p_cam) const {
    return rotation_ * p_cam + translation_;
  }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const {
    return rotation_.transpose() * (p_world - translation_);
  }

  Eigen::Matrix4d matrix() const;
  static Pose from_matrix(const Eigen::Matrix4d& m);

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

Pose invert_pose(const Pose& pose);
Pose compose(const Pose& a, const Pose& b);  // (a*b): apply b, then a

// Projects a camera-frame point (z > 0) to pixel coordinates.
PixelPoint project(const Eigen::Vector3d& point_cam, const CameraIntrinsics& intr);

// Inverts the intrinsic mapping: pixel -> normalized coordinates (x/z, y/z).
// The fisheye angle is recovered by fixed-point iteration; a final step above
// 1e-10 after 100 iterations raises NoConvergence.
Eigen::Vector2d undistort_to_ray(const PixelPoint& px, const CameraIntrinsics& intr);

// Backprojection: pixel + depth (camera-frame z, meters) -> world point.
WorldPoint unproject(const PixelPoint& px, double depth, const CameraIntrinsics& intr,
                     const Pose& pose);

// Expresses a world point in the camera frame of `pose`; with the query
// frame's pose this is the relative displacement vector.
Eigen::Vector3d world_to_cam(const WorldPoint& wp, const Pose& pose);

}  // namespace egoloc
