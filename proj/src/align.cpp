#include "egoloc/align.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "egoloc/error.hpp"
#include "egoloc/rng.hpp"

namespace egoloc {

void Sim3::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidArgument, "Sim3 scale must be positive and finite");
  }
  const double err =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err < 1e-9) || !(rotation.determinant() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Sim3 rotation must be orthonormal with det +1");
  }
}

Sim3 estimate_sim3(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::InvalidArgument, "correspondence lists differ in length");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw Error(ErrorCode::Degenerate, "similarity estimation needs at least 3 points");
  }

  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  double src_var = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d ds = src[i] - src_mean;
    const Eigen::Vector3d dd = dst[i] - dst_mean;
    src_var += ds.squaredNorm();
    covariance += dd * ds.transpose();
  }
  src_var /= static_cast<double>(n);
  covariance /= static_cast<double>(n);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(src_var > 0.0) || !(sv(1) > 1e-9 * sv(0))) {
    throw Error(ErrorCode::Degenerate, "source points are collinear or coincident");
  }

  Eigen::Vector3d sign = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign(2) = -1.0;

  Sim3 out;
  out.rotation = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();
  out.scale = sv.dot(sign) / src_var;
  out.translation = dst_mean - out.scale * (out.rotation * src_mean);
  out.validate();
  return out;
}

RobustSim3Result estimate_sim3_robust(std::span<const Eigen::Vector3d> src,
                                      std::span<const Eigen::Vector3d> dst, double max_error,
                                      int iterations, std::uint64_t seed) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::InvalidArgument, "correspondence lists differ in length");
  }
  if (!(max_error > 0.0) || iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_error must be > 0 and iterations >= 1");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw Error(ErrorCode::InsufficientInliers, "need at least 3 correspondences");
  }

  Rng rng(Rng::split(seed, 0x5a1e));
  std::vector<char> best_mask;
  std::size_t best_count = 0;
  double best_error = 0.0;

  for (int iter = 0; iter < iterations; ++iter) {
    std::size_t a = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    std::size_t b = a;
    while (b == a) b = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    std::size_t c = a;
    while (c == a || c == b) {
      c = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    }

    Sim3 model;
    try {
      const Eigen::Vector3d s[3] = {src[a], src[b], src[c]};
      const Eigen::Vector3d d[3] = {dst[a], dst[b], dst[c]};
      model = estimate_sim3(std::span<const Eigen::Vector3d>(s, 3),
                            std::span<const Eigen::Vector3d>(d, 3));
    } catch (const Error&) {
      continue;  // degenerate sample
    }

    std::vector<char> mask(n, 0);
    std::size_t count = 0;
    double error = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double residual = (dst[i] - model.apply(src[i])).norm();
      if (residual <= max_error) {
        mask[i] = 1;
        ++count;
        error += residual * residual;
      }
    }
    if (count > best_count || (count == best_count && count > 0 && error < best_error)) {
      best_count = count;
      best_error = error;
      best_mask = std::move(mask);
    }
  }

  if (best_count < 3) {
    throw Error(ErrorCode::InsufficientInliers, "best consensus set has fewer than 3 points");
  }

  std::vector<Eigen::Vector3d> src_in;
  std::vector<Eigen::Vector3d> dst_in;
  src_in.reserve(best_count);
  dst_in.reserve(best_count);
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask[i]) {
      src_in.push_back(src[i]);
      dst_in.push_back(dst[i]);
    }
  }

  RobustSim3Result result;
  result.transform = estimate_sim3(src_in, dst_in);
  result.inlier_mask = std::move(best_mask);
  return result;
}

Pose apply_sim3_pose(const Sim3& t, const Pose& pose) {
  return Pose(t.rotation * pose.rotation(),
              t.scale * (t.rotation * pose.translation()) + t.translation);
}

}  // namespace egoloc
