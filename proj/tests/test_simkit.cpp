#include <doctest.h>

#include <cmath>
#include <vector>

#include "egoloc/align.hpp"
#include "egoloc/error.hpp"
#include "egoloc/localize.hpp"
#include "egoloc/metrics.hpp"
#include "egoloc/rng.hpp"
#include "egoloc/simkit.hpp"
#include "test_utils.hpp"

using namespace egoloc;

namespace {

bool scenes_equal(const SyntheticScene& a, const SyntheticScene& b) {
  if (a.objects.size() != b.objects.size() || a.trajectory.size() != b.trajectory.size()) {
    return false;
  }
  for (const auto& [name, point] : a.objects) {
    const auto it = b.objects.find(name);
    if (it == b.objects.end() || point.vec() != it->second.vec()) return false;
  }
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    if (a.trajectory[i].rotation() != b.trajectory[i].rotation()) return false;
    if (a.trajectory[i].translation() != b.trajectory[i].translation()) return false;
  }
  return true;
}

double run_mean_l2(double depth_scale_sigma, std::uint64_t seed, int scenes, int queries) {
  NoiseConfig noise;
  noise.depth_scale_sigma = depth_scale_sigma;
  double sum = 0.0;
  long count = 0;
  for (int s = 0; s < scenes; ++s) {
    const SyntheticScene scene = generate_scene(Rng::split(seed, 100 + s), {8, 300, 10.0});
    std::vector<std::string> ids;
    for (const auto& [name, point] : scene.objects) ids.push_back(name);
    Rng pick(Rng::split(seed, 7000 + s));
    for (int q = 0; q < queries; ++q) {
      const std::string& object_id =
          ids[static_cast<std::size_t>(pick.uniform_int(0, static_cast<int>(ids.size()) - 1))];
      const int query_frame = static_cast<int>(pick.uniform_int(240, 299));
      RenderedQuery rendered;
      try {
        rendered = render_query(scene, object_id, query_frame, noise,
                                Rng::split(seed, 9000 + 100 * s + q), "q", "s");
      } catch (const Error&) {
        continue;
      }
      DepthProvider depths = DepthProvider::scalar(rendered.depths);
      const LocalizationResult result =
          localize_query(rendered.timeline, rendered.poses, depths, scene.intr, LocalizeConfig{});
      if (result.status != LocalizeStatus::Ok) continue;
      const Eigen::Vector3d oracle = oracle_displacement(scene, object_id, query_frame);
      sum += (*result.displacement - oracle).norm();
      ++count;
    }
  }
  REQUIRE(count > 0);
  return sum / static_cast<double>(count);
}

}  // namespace

TEST_CASE("scene generation is deterministic") {
  const SceneConfig config{5, 150, 9.0};
  const SyntheticScene a = generate_scene(77, config);
  const SyntheticScene b = generate_scene(77, config);
  CHECK(scenes_equal(a, b));

  const SyntheticScene c = generate_scene(78, config);
  CHECK_FALSE(scenes_equal(a, c));
}

TEST_CASE("rendered queries are deterministic") {
  const SyntheticScene scene = generate_scene(91, {4, 140, 9.0});
  const std::string object_id = scene.objects.begin()->first;
  NoiseConfig noise;
  noise.depth_scale_sigma = 0.2;
  noise.score_noise_sigma = 0.05;
  noise.pixel_noise_sigma = 1.0;
  noise.pose_dropout = 0.3;

  const RenderedQuery a = render_query(scene, object_id, 130, noise, 5, "q", "s");
  const RenderedQuery b = render_query(scene, object_id, 130, noise, 5, "q", "s");
  REQUIRE(a.timeline.entries.size() == b.timeline.entries.size());
  for (std::size_t i = 0; i < a.timeline.entries.size(); ++i) {
    CHECK(a.timeline.entries[i].score == b.timeline.entries[i].score);
    CHECK(a.timeline.entries[i].bbox.x == b.timeline.entries[i].bbox.x);
  }
  CHECK(a.depths == b.depths);
  for (const auto& [frame, pose] : a.poses) {
    CHECK(pose.has_value() == b.poses.at(frame).has_value());
  }

  const RenderedQuery c = render_query(scene, object_id, 130, noise, 6, "q", "s");
  bool any_difference = false;
  for (std::size_t i = 0; i < a.timeline.entries.size() && !any_difference; ++i) {
    any_difference = a.timeline.entries[i].score != c.timeline.entries[i].score;
  }
  CHECK(any_difference);
}

TEST_CASE("empty object map is a valid scene") {
  const SyntheticScene scene = generate_scene(3, {0, 50, 9.0});
  CHECK(scene.objects.empty());
  CHECK(scene.trajectory.size() == 50);
}

TEST_CASE("trajectory motion is bounded") {
  const SyntheticScene scene = generate_scene(13, {4, 200, 9.0});
  for (std::size_t i = 1; i < scene.trajectory.size(); ++i) {
    const Pose& prev = scene.trajectory[i - 1];
    const Pose& cur = scene.trajectory[i];
    CHECK((cur.translation() - prev.translation()).norm() <= 0.1 + 1e-12);
    const Eigen::Matrix3d relative = prev.rotation().transpose() * cur.rotation();
    const double angle = std::acos(std::clamp((relative.trace() - 1.0) / 2.0, -1.0, 1.0));
    CHECK(angle <= 10.0 * 3.141592653589793 / 180.0 + 1e-9);
  }
}

TEST_CASE("every object is visible in at least one frame") {
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const SyntheticScene scene = generate_scene(seed, {8, 250, 10.0});
    for (const auto& [object_id, position] : scene.objects) {
      bool visible = false;
      for (const Pose& pose : scene.trajectory) {
        const Eigen::Vector3d p_cam = pose.to_camera(position.vec());
        if (!(p_cam.z() > 0)) continue;
        try {
          if (scene.intr.contains(project(p_cam, scene.intr))) {
            visible = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      CHECK(visible);
    }
  }
}

TEST_CASE("oracle_displacement") {
  SUBCASE("identity query pose returns world coordinates") {
    SyntheticScene scene;
    scene.intr.fx = scene.intr.fy = 100;
    scene.objects["obj"] = {1.5, -2.0, 0.5};
    scene.trajectory = {Pose{}};
    CHECK(oracle_displacement(scene, "obj", 0).isApprox(Eigen::Vector3d(1.5, -2.0, 0.5), 1e-15));
  }

  SUBCASE("object at the camera center maps to zero") {
    SyntheticScene scene;
    scene.objects["obj"] = {2, 3, 1};
    scene.trajectory = {Pose(Eigen::Matrix3d::Identity(), {2, 3, 1})};
    CHECK(oracle_displacement(scene, "obj", 0).norm() == doctest::Approx(0.0));
  }

  SUBCASE("Sim3 on scene and trajectory scales the displacement") {
    Rng rng(19);
    const SyntheticScene scene = generate_scene(7, {3, 60, 9.0});
    Sim3 t;
    t.scale = 2.3;
    t.rotation = testutil::random_rotation(rng);
    t.translation = {0.4, -1.2, 2.0};

    SyntheticScene mapped = scene;
    for (auto& [name, point] : mapped.objects) {
      point = WorldPoint::from(t.apply(point.vec()));
    }
    for (Pose& pose : mapped.trajectory) pose = apply_sim3_pose(t, pose);

    const std::string object_id = scene.objects.begin()->first;
    const Eigen::Vector3d base = oracle_displacement(scene, object_id, 30);
    const Eigen::Vector3d after = oracle_displacement(mapped, object_id, 30);
    CHECK((after - t.scale * base).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("render_query validation") {
  const SyntheticScene scene = generate_scene(23, {3, 100, 9.0});

  CHECK_THROWS_AS(render_query(scene, "nope", 50, NoiseConfig{}, 1), Error);
  CHECK_THROWS_AS(render_query(scene, scene.objects.begin()->first, 0, NoiseConfig{}, 1), Error);
  CHECK_THROWS_AS(render_query(scene, scene.objects.begin()->first, 100, NoiseConfig{}, 1), Error);

  NoiseConfig bad;
  bad.pose_dropout = 1.5;
  CHECK_THROWS_AS(render_query(scene, scene.objects.begin()->first, 50, bad, 1), Error);
}

TEST_CASE("never-visible objects are rejected") {
  // Hand-built scene: the camera looks along +x; the object sits behind it
  // until the final frame, where the camera turns around.
  SyntheticScene scene;
  scene.intr.model = CameraModel::Pinhole;
  scene.intr.fx = scene.intr.fy = 100;
  scene.intr.cx = 50;
  scene.intr.cy = 50;
  scene.intr.width = 100;
  scene.intr.height = 100;

  Eigen::Matrix3d facing_x;
  facing_x.col(0) = Eigen::Vector3d(0, -1, 0);
  facing_x.col(1) = Eigen::Vector3d(0, 0, -1);
  facing_x.col(2) = Eigen::Vector3d(1, 0, 0);
  Eigen::Matrix3d facing_neg_x;
  facing_neg_x.col(0) = Eigen::Vector3d(0, 1, 0);
  facing_neg_x.col(1) = Eigen::Vector3d(0, 0, -1);
  facing_neg_x.col(2) = Eigen::Vector3d(-1, 0, 0);

  scene.objects["behind"] = {-3, 0, 0};
  scene.trajectory = {Pose(facing_x, {0, 0, 0}), Pose(facing_x, {0.05, 0, 0}),
                      Pose(facing_neg_x, {0.1, 0, 0})};

  CHECK_THROWS_AS(render_query(scene, "behind", 2, NoiseConfig{}, 1), Error);
  CHECK_NOTHROW(oracle_displacement(scene, "behind", 2));
}

TEST_CASE("pose dropout statistics and scene-level consistency") {
  const SyntheticScene scene = generate_scene(29, {6, 250, 10.0});
  NoiseConfig noise;
  noise.pose_dropout = 0.25;

  const std::string a = scene.objects.begin()->first;
  const std::string b = std::next(scene.objects.begin())->first;
  const RenderedQuery qa = render_query(scene, a, 240, noise, 1, "qa", "s");
  const RenderedQuery qb = render_query(scene, b, 245, noise, 2, "qb", "s");

  long dropped = 0;
  for (const auto& [frame, pose] : qa.poses) {
    CHECK(pose.has_value() == qb.poses.at(frame).has_value());  // shared per scene
    dropped += pose.has_value() ? 0 : 1;
  }
  const double rate = static_cast<double>(dropped) / static_cast<double>(qa.poses.size());
  CHECK(rate > 0.10);
  CHECK(rate < 0.40);
}

TEST_CASE("qwp converges to one minus the dropout rate") {
  NoiseConfig noise;
  noise.pose_dropout = 0.2;

  std::vector<LocalizationResult> results;
  std::vector<GroundTruth> gts;
  int query_counter = 0;
  for (int s = 0; s < 25; ++s) {
    const SyntheticScene scene = generate_scene(Rng::split(500, s), {8, 300, 10.0});
    std::vector<std::string> ids;
    for (const auto& [name, point] : scene.objects) ids.push_back(name);
    Rng pick(Rng::split(501, s));
    for (int q = 0; q < 20; ++q) {
      const std::string qid = "q" + std::to_string(query_counter++);
      const std::string& object_id =
          ids[static_cast<std::size_t>(pick.uniform_int(0, static_cast<int>(ids.size()) - 1))];
      const int query_frame = static_cast<int>(pick.uniform_int(240, 299));
      RenderedQuery rendered;
      try {
        rendered = render_query(scene, object_id, query_frame, noise, Rng::split(502, query_counter),
                                qid, "scene");
      } catch (const Error&) {
        continue;
      }
      DepthProvider depths = DepthProvider::scalar(rendered.depths);
      results.push_back(
          localize_query(rendered.timeline, rendered.poses, depths, scene.intr, LocalizeConfig{}));
      gts.push_back(rendered.gt);
    }
  }
  REQUIRE(gts.size() >= 450);

  const EvalReport report = evaluate(results, gts, 0.5);
  const double n = static_cast<double>(report.n_total);
  const double se = std::sqrt(0.8 * 0.2 / n);
  CHECK(std::abs(report.qwp - 0.8) < 3.0 * se + 0.02);  // small bias from all-peaks dropout
  CHECK(report.success == doctest::Approx(report.success_star * report.qwp).epsilon(1e-12));
}

TEST_CASE("depth noise degrades accuracy monotonically") {
  double previous = -1.0;
  for (const double sigma : {0.0, 0.1, 0.2, 0.4}) {
    const double mean_l2 = run_mean_l2(sigma, 321, 2, 25);
    CHECK(mean_l2 >= previous);
    previous = mean_l2;
  }
}

TEST_CASE("depth_random replaces depth with uniform draws") {
  const SyntheticScene scene = generate_scene(17, {4, 120, 9.0});
  NoiseConfig noise;
  noise.depth_random = {{0.1, 10.0}};
  const RenderedQuery rendered =
      render_query(scene, scene.objects.begin()->first, 110, noise, 3, "q", "s");
  for (const auto& [frame, depth] : rendered.depths) {
    CHECK(depth >= 0.1);
    CHECK(depth <= 10.0);
  }
}

TEST_CASE("scores stay in range under noise") {
  const SyntheticScene scene = generate_scene(41, {4, 120, 9.0});
  NoiseConfig noise;
  noise.score_noise_sigma = 0.4;
  const RenderedQuery rendered =
      render_query(scene, scene.objects.begin()->first, 110, noise, 3, "q", "s");
  for (const Detection& d : rendered.timeline.entries) {
    CHECK(d.score >= 0.0);
    CHECK(d.score <= 1.0);
  }
  CHECK_NOTHROW(rendered.timeline.validate());
}
