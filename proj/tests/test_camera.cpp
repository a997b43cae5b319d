#include <doctest.h>

#include <cmath>

#include "egoloc/camera.hpp"
#include "egoloc/error.hpp"
#include "egoloc/rng.hpp"
#include "test_utils.hpp"

using namespace egoloc;

namespace {

CameraIntrinsics simple_pinhole(double fx, double fy, double cx, double cy) {
  CameraIntrinsics intr;
  intr.model = CameraModel::Pinhole;
  intr.fx = fx;
  intr.fy = fy;
  intr.cx = cx;
  intr.cy = cy;
  intr.width = 640;
  intr.height = 480;
  return intr;
}

}  // namespace

TEST_CASE("pinhole projection basics") {
  const CameraIntrinsics intr = simple_pinhole(100, 100, 50, 50);

  const PixelPoint axis = project({0, 0, 1}, intr);
  CHECK(axis.u == doctest::Approx(50.0));
  CHECK(axis.v == doctest::Approx(50.0));

  const PixelPoint tangent = project({1, 0, 1}, intr);
  CHECK(tangent.u == doctest::Approx(150.0));
  CHECK(tangent.v == doctest::Approx(50.0));

  CHECK_THROWS_AS(project({0, 0, 0}, intr), Error);
  CHECK_THROWS_AS(project({0, 0, -1}, intr), Error);
}

TEST_CASE("fisheye projection matches a longhand evaluation") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const CameraIntrinsics intr = testutil::random_fisheye(rng);
    const Eigen::Vector3d p = testutil::random_ray_point(rng, 1.2);

    const PixelPoint px = project(p, intr);

    // Longhand scalar evaluation of the same model.
    const double xn = p.x() / p.z();
    const double yn = p.y() / p.z();
    const double r = std::sqrt(xn * xn + yn * yn);
    const double theta = std::atan(r);
    const double theta_d =
        theta * (1.0 + intr.k1 * theta * theta + intr.k2 * theta * theta * theta * theta);
    const double expected_u = intr.fx * (theta_d / r) * xn + intr.cx;
    const double expected_v = intr.fy * (theta_d / r) * yn + intr.cy;

    CHECK(px.u == doctest::Approx(expected_u).epsilon(1e-12));
    CHECK(px.v == doctest::Approx(expected_v).epsilon(1e-12));
  }
}

TEST_CASE("fisheye center ray and field-of-view guard") {
  Rng rng(7);
  const CameraIntrinsics intr = testutil::random_fisheye(rng);

  const PixelPoint center = project({0, 0, 2.5}, intr);
  CHECK(center.u == doctest::Approx(intr.cx));
  CHECK(center.v == doctest::Approx(intr.cy));

  CHECK_THROWS_AS(project({1e300, 0, 1}, intr), Error);
}

TEST_CASE("undistort_to_ray basics") {
  SUBCASE("principal point maps to the zero ray for any model") {
    Rng rng(3);
    const CameraIntrinsics fisheye = testutil::random_fisheye(rng);
    const Eigen::Vector2d ray = undistort_to_ray({fisheye.cx, fisheye.cy}, fisheye);
    CHECK(ray.norm() == doctest::Approx(0.0));

    const CameraIntrinsics pin = simple_pinhole(100, 100, 50, 50);
    const Eigen::Vector2d pin_ray = undistort_to_ray({50, 50}, pin);
    CHECK(pin_ray.norm() == doctest::Approx(0.0));
  }

  SUBCASE("pinhole inversion is closed form") {
    const CameraIntrinsics pin = simple_pinhole(100, 100, 50, 50);
    const Eigen::Vector2d ray = undistort_to_ray({150, 50}, pin);
    CHECK(ray.x() == doctest::Approx(1.0));
    CHECK(ray.y() == doctest::Approx(0.0));
  }

  SUBCASE("divergent distortion raises NoConvergence") {
    CameraIntrinsics bad;
    bad.model = CameraModel::RadialFisheye;
    bad.fx = bad.fy = 100;
    bad.cx = bad.cy = 50;
    bad.k1 = 5.0;
    bad.k2 = 0.0;
    bad.width = bad.height = 100;
    CHECK_THROWS_AS(undistort_to_ray({170, 50}, bad), Error);
  }
}

TEST_CASE("fisheye round trip through distortion inversion") {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const CameraIntrinsics intr = testutil::random_fisheye(rng);
    const Eigen::Vector3d p = testutil::random_ray_point(rng, 1.2);
    const PixelPoint px = project(p, intr);
    const Eigen::Vector2d ray = undistort_to_ray(px, intr);
    worst = std::max(worst, std::abs(ray.x() - p.x() / p.z()));
    worst = std::max(worst, std::abs(ray.y() - p.y() / p.z()));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("unproject basics and depth linearity") {
  const CameraIntrinsics unit = simple_pinhole(1, 1, 0, 0);
  const Pose identity;

  const WorldPoint a = unproject({0, 0}, 1.0, unit, identity);
  CHECK(a.vec().isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));

  const WorldPoint b = unproject({2, 3}, 2.0, unit, identity);
  CHECK(b.vec().isApprox(Eigen::Vector3d(4, 6, 2), 1e-12));

  CHECK_THROWS_AS(unproject({0, 0}, 0.0, unit, identity), Error);
  CHECK_THROWS_AS(unproject({0, 0}, -1.0, unit, identity), Error);

  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const CameraIntrinsics intr = testutil::random_fisheye(rng);
    const Pose pose = testutil::random_pose(rng);
    const PixelPoint px = project(testutil::random_ray_point(rng, 1.2), intr);
    const double depth = rng.uniform(0.2, 5.0);
    const double alpha = rng.uniform(0.5, 3.0);

    const Eigen::Vector3d base = unproject(px, depth, intr, pose).vec() - pose.translation();
    const Eigen::Vector3d scaled =
        unproject(px, alpha * depth, intr, pose).vec() - pose.translation();
    CHECK((scaled - alpha * base).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, scaled.norm()));
  }
}

TEST_CASE("unproject-project round trip recovers camera points") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const CameraIntrinsics intr = testutil::random_fisheye(rng);
    const Pose pose = testutil::random_pose(rng);
    const Eigen::Vector3d p_cam = testutil::random_ray_point(rng, 1.2);

    const PixelPoint px = project(p_cam, intr);
    const WorldPoint wp = unproject(px, p_cam.z(), intr, pose);
    const Eigen::Vector3d recovered = pose.to_camera(wp.vec());
    CHECK((recovered - p_cam).norm() < 1e-8);
  }
}

TEST_CASE("world_to_cam and pose algebra") {
  const Pose identity;
  CHECK(world_to_cam({1, 2, 3}, identity).isApprox(Eigen::Vector3d(1, 2, 3), 1e-15));

  const Pose shifted(Eigen::Matrix3d::Identity(), {1, 0, 0});
  CHECK(world_to_cam({1, 0, 0}, shifted).norm() == doctest::Approx(0.0));

  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose pose = testutil::random_pose(rng);
    const Eigen::Vector3d p(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));
    CHECK((pose.to_camera(pose.to_world(p)) - p).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("invert_pose") {
  const Pose identity;
  const Pose inv_identity = invert_pose(identity);
  CHECK(inv_identity.rotation().isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  CHECK(inv_identity.translation().norm() == doctest::Approx(0.0));

  const Pose lift(Eigen::Matrix3d::Identity(), {0, 0, 5});
  CHECK(invert_pose(lift).translation().isApprox(Eigen::Vector3d(0, 0, -5), 1e-15));

  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose pose = testutil::random_pose(rng);
    const Pose twice = invert_pose(invert_pose(pose));
    CHECK((twice.rotation() - pose.rotation()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((twice.translation() - pose.translation()).cwiseAbs().maxCoeff() < 1e-12);

    const Pose round = compose(pose, invert_pose(pose));
    CHECK((round.rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(round.translation().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("orthonormality is preserved under long composition chains") {
  Rng rng(41);
  Pose chain;
  for (int step = 0; step < 200; ++step) {
    chain = compose(chain, testutil::random_pose(rng));
    if (step % 3 == 0) chain = invert_pose(chain);
    const Eigen::Matrix3d gram = chain.rotation().transpose() * chain.rotation();
    CHECK((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pose and intrinsics validation") {
  Eigen::Matrix3d skewed = Eigen::Matrix3d::Identity();
  skewed(0, 1) = 0.5;
  CHECK_THROWS_AS(Pose(skewed, Eigen::Vector3d::Zero()), Error);

  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(2, 2) = -1.0;
  CHECK_THROWS_AS(Pose(reflection, Eigen::Vector3d::Zero()), Error);

  CameraIntrinsics bad_fisheye;
  bad_fisheye.model = CameraModel::RadialFisheye;
  bad_fisheye.fx = 100;
  bad_fisheye.fy = 101;
  bad_fisheye.cx = bad_fisheye.cy = 50;
  CHECK_THROWS_AS(bad_fisheye.validate(), Error);

  CameraIntrinsics bad_pinhole = simple_pinhole(100, 100, 50, 50);
  bad_pinhole.k1 = 0.1;
  CHECK_THROWS_AS(bad_pinhole.validate(), Error);

  CameraIntrinsics negative = simple_pinhole(-1, 100, 50, 50);
  CHECK_THROWS_AS(negative.validate(), Error);
}
