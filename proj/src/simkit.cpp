#include "egoloc/simkit.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "egoloc/error.hpp"
#include "egoloc/rng.hpp"

namespace egoloc {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kCameraHeight = 1.5;
constexpr double kObjectZMin = 0.5;
constexpr double kObjectZMax = 2.5;
constexpr double kMinObjectClearance = 0.6;  // meters from any camera center
constexpr double kMinPlacementScore = 0.35;
constexpr int kPlacementRetries = 200;

// Seed streams for the independent draw families.
constexpr std::uint64_t kStreamTrajectory = 0x11;
constexpr std::uint64_t kStreamObjects = 0x22;
constexpr std::uint64_t kStreamPoseDropout = 0x33;

CameraIntrinsics default_intrinsics() {
  CameraIntrinsics intr;
  intr.model = CameraModel::RadialFisheye;
  intr.fx = 300.0;
  intr.fy = 300.0;
  intr.cx = 320.0;
  intr.cy = 240.0;
  intr.k1 = -0.03;
  intr.k2 = 0.003;
  intr.width = 640;
  intr.height = 480;
  return intr;
}

Eigen::Matrix3d look_rotation(double yaw, double pitch) {
  // Camera axes: x right, y down, z forward; world z is up.
  const Eigen::Vector3d forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw),
                                std::sin(pitch));
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d rotation;
  rotation.col(0) = right;
  rotation.col(1) = down;
  rotation.col(2) = forward;
  return rotation;
}

bool projects_inside(const Eigen::Vector3d& point_cam, const CameraIntrinsics& intr,
                     PixelPoint* px_out = nullptr) {
  if (!(point_cam.z() > 0.0)) return false;
  try {
    const PixelPoint px = project(point_cam, intr);
    if (!intr.contains(px)) return false;
    if (px_out != nullptr) *px_out = px;
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool pose_dropped(std::uint64_t scene_seed, int frame, double dropout) {
  if (dropout <= 0.0) return false;
  Rng rng(Rng::split(Rng::split(scene_seed, kStreamPoseDropout), static_cast<std::uint64_t>(frame)));
  return rng.uniform() < dropout;
}

}  // namespace

void NoiseConfig::validate() const {
  if (depth_scale_sigma < 0.0 || depth_shift_sigma < 0.0 || score_noise_sigma < 0.0 ||
      pixel_noise_sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "noise sigmas must be >= 0");
  }
  if (!(pose_dropout >= 0.0 && pose_dropout <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "pose dropout must be in [0, 1]");
  }
  if (depth_random.has_value() &&
      !(depth_random->first > 0.0 && depth_random->second > depth_random->first)) {
    throw Error(ErrorCode::InvalidArgument, "depth_random range must satisfy 0 < lo < hi");
  }
}

double visibility_score(const Eigen::Vector3d& point_cam) {
  const double depth = point_cam.z();
  if (!(depth > 0.0)) return 0.0;
  const double off_axis = std::atan2(std::hypot(point_cam.x(), point_cam.y()), depth);
  const double angular = std::exp(-(off_axis / 0.5) * (off_axis / 0.5));
  const double proximity = std::clamp(3.0 / depth, 0.0, 1.0);
  return angular * proximity;
}

SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  if (config.n_frames < 2) {
    throw Error(ErrorCode::InvalidArgument, "a scene needs at least 2 frames");
  }
  if (config.n_objects < 0 || !(config.room_extent > 2.5)) {
    throw Error(ErrorCode::InvalidArgument, "invalid scene configuration");
  }

  SyntheticScene scene;
  scene.seed = seed;
  scene.intr = default_intrinsics();

  // Trajectory: a gentle positional walk with an oscillating gaze that
  // sweeps every azimuth a few times, so objects enter and leave the view.
  Rng traj_rng(Rng::split(seed, kStreamTrajectory));
  const double half = config.room_extent / 2.0;
  const double walk_bound = std::max(half - 1.0, 0.25);
  const int n = config.n_frames;

  const double yaw0 = traj_rng.uniform(0.0, 2.0 * kPi);
  // Sweep rate capped so per-frame rotation stays under 10 degrees.
  const double cycles = std::min(2.0, static_cast<double>(n) / 140.0);
  const double pitch_amp = traj_rng.uniform(0.05, 0.12);
  const double pitch_phase = traj_rng.uniform(0.0, 2.0 * kPi);

  Eigen::Vector2d position(traj_rng.uniform(-walk_bound / 2.0, walk_bound / 2.0),
                           traj_rng.uniform(-walk_bound / 2.0, walk_bound / 2.0));
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();

  scene.trajectory.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double phase = 2.0 * kPi * cycles * static_cast<double>(i) / static_cast<double>(n);
    const double yaw = yaw0 + kPi * std::sin(phase);
    const double pitch = pitch_amp * std::sin(3.0 * phase + pitch_phase);
    const double height = kCameraHeight + 0.05 * std::sin(phase + pitch_phase);

    scene.trajectory.emplace_back(look_rotation(yaw, pitch),
                                  Eigen::Vector3d(position.x(), position.y(), height));

    const Eigen::Vector2d kick(traj_rng.uniform(-1.0, 1.0), traj_rng.uniform(-1.0, 1.0));
    velocity = 0.92 * velocity + 0.02 * kick;
    if (velocity.norm() > 0.08) velocity *= 0.08 / velocity.norm();
    position += velocity;
    for (int axis = 0; axis < 2; ++axis) {  // reflect off the walk bounds
      if (position[axis] > walk_bound) {
        position[axis] = 2.0 * walk_bound - position[axis];
        velocity[axis] = -velocity[axis];
      } else if (position[axis] < -walk_bound) {
        position[axis] = -2.0 * walk_bound - position[axis];
        velocity[axis] = -velocity[axis];
      }
    }
  }

  // Objects: uniform in the room box, re-drawn until visible with a usable
  // peak score and clear of the trajectory.
  Rng obj_rng(Rng::split(seed, kStreamObjects));
  for (int obj = 0; obj < config.n_objects; ++obj) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      const Eigen::Vector3d candidate(obj_rng.uniform(-half, half), obj_rng.uniform(-half, half),
                                      obj_rng.uniform(kObjectZMin, kObjectZMax));
      double best_score = 0.0;
      double min_clearance = std::numeric_limits<double>::infinity();
      for (const Pose& pose : scene.trajectory) {
        const Eigen::Vector3d point_cam = pose.to_camera(candidate);
        min_clearance = std::min(min_clearance, (candidate - pose.translation()).norm());
        if (!projects_inside(point_cam, scene.intr)) continue;
        best_score = std::max(best_score, visibility_score(point_cam));
      }
      if (best_score >= kMinPlacementScore && min_clearance >= kMinObjectClearance) {
        char name[16];
        std::snprintf(name, sizeof(name), "obj_%03d", obj);
        scene.objects.emplace(name, WorldPoint::from(candidate));
        placed = true;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::InfeasiblePlacement,
                  "could not place object " + std::to_string(obj) + " after " +
                      std::to_string(kPlacementRetries) + " attempts");
    }
  }
  return scene;
}

RenderedQuery render_query(const SyntheticScene& scene, const std::string& object_id,
                           int query_frame, const NoiseConfig& noise, std::uint64_t seed,
                           const std::string& query_id, const std::string& scene_id) {
  noise.validate();
  const auto obj_it = scene.objects.find(object_id);
  if (obj_it == scene.objects.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown object '" + object_id + "'");
  }
  if (query_frame < 1 || query_frame >= static_cast<int>(scene.trajectory.size())) {
    throw Error(ErrorCode::InvalidArgument, "query frame outside the trajectory");
  }
  const Eigen::Vector3d object = obj_it->second.vec();

  bool seen_before_query = false;
  for (int i = 0; i < query_frame && !seen_before_query; ++i) {
    seen_before_query =
        projects_inside(scene.trajectory[static_cast<std::size_t>(i)].to_camera(object), scene.intr);
  }
  if (!seen_before_query) {
    throw Error(ErrorCode::NeverVisible,
                "object '" + object_id + "' never visible before the query frame");
  }

  Rng rng(Rng::split(seed, 0x7e7d));
  RenderedQuery out;
  out.timeline.query_id = query_id;
  out.timeline.query_frame = query_frame;
  out.timeline.entries.reserve(static_cast<std::size_t>(query_frame) + 1);

  for (int frame = 0; frame <= query_frame; ++frame) {
    const Pose& pose = scene.trajectory[static_cast<std::size_t>(frame)];
    const Eigen::Vector3d point_cam = pose.to_camera(object);
    PixelPoint px;
    const bool visible = projects_inside(point_cam, scene.intr, &px);

    Detection det;
    det.frame = frame;
    double depth_true;
    if (visible) {
      const double bell = visibility_score(point_cam);
      det.score = std::clamp(bell + rng.normal(0.0, noise.score_noise_sigma), 0.0, 1.0);
      const double u = px.u + rng.normal(0.0, noise.pixel_noise_sigma);
      const double v = px.v + rng.normal(0.0, noise.pixel_noise_sigma);
      const double size = std::clamp(0.25 * scene.intr.fx / point_cam.z(), 6.0, 120.0);
      det.bbox = {u - size / 2.0, v - size / 2.0, size, size};
      depth_true = point_cam.z();
    } else {
      det.score = rng.uniform(0.0, 0.1);
      const double size = rng.uniform(10.0, 60.0);
      const double u = rng.uniform(0.0, static_cast<double>(scene.intr.width));
      const double v = rng.uniform(0.0, static_cast<double>(scene.intr.height));
      det.bbox = {u - size / 2.0, v - size / 2.0, size, size};
      depth_true = rng.uniform(0.5, 5.0);  // garbage depth for a garbage box
    }
    out.timeline.entries.push_back(det);

    double depth;
    if (noise.depth_random.has_value()) {
      depth = rng.uniform(noise.depth_random->first, noise.depth_random->second);
    } else {
      const double k = rng.normal(1.0, noise.depth_scale_sigma);
      const double b = rng.normal(0.0, noise.depth_shift_sigma);
      depth = std::max(k * depth_true + b, 1e-3);
    }
    out.depths[frame] = depth;

    if (pose_dropped(scene.seed, frame, noise.pose_dropout)) {
      out.poses[frame] = std::nullopt;
    } else {
      out.poses[frame] = pose;
    }
  }

  out.gt.query_id = query_id;
  out.gt.scene_id = scene_id;
  out.gt.object_world = obj_it->second;
  out.gt.query_pose = scene.trajectory[static_cast<std::size_t>(query_frame)];
  return out;
}

Eigen::Vector3d oracle_displacement(const SyntheticScene& scene, const std::string& object_id,
                                    int query_frame) {
  const auto obj_it = scene.objects.find(object_id);
  if (obj_it == scene.objects.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown object '" + object_id + "'");
  }
  if (query_frame < 0 || query_frame >= static_cast<int>(scene.trajectory.size())) {
    throw Error(ErrorCode::InvalidArgument, "query frame outside the trajectory");
  }
  return world_to_cam(obj_it->second, scene.trajectory[static_cast<std::size_t>(query_frame)]);
}

}  // namespace egoloc
