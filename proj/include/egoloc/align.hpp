#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "egoloc/camera.hpp"

namespace egoloc {

// Similarity transform x -> scale * rotation * x + translation.
struct Sim3 {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }

  void validate() const;
};

// Closed-form least-squares similarity between corresponding point sets
// (centroid subtraction, SVD of the cross-covariance with reflection
// correction, scale from the variance ratio). Minimizes
// sum ||dst_i - (s R src_i + t)||^2. Throws Degenerate when the source
// points are collinear or coincident.
Sim3 estimate_sim3(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst);

struct RobustSim3Result {
  Sim3 transform;
  std::vector<char> inlier_mask;
};

// RANSAC over 3-point minimal samples; inliers have post-transform residual
// <= max_error; the final transform is refit on the best consensus set.
// Deterministic given the seed.
RobustSim3Result estimate_sim3_robust(std::span<const Eigen::Vector3d> src,
                                      std::span<const Eigen::Vector3d> dst,
                                      double max_error = 0.25, int iterations = 1000,
                                      std::uint64_t seed = 0);

// Maps a camera-to-world pose into the transformed frame: camera centers
// move exactly like points under the Sim3.
Pose apply_sim3_pose(const Sim3& t, const Pose& pose);

}  // namespace egoloc
