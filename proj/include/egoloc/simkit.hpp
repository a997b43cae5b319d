#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "egoloc/camera.hpp"
#include "egoloc/localize.hpp"
#include "egoloc/metrics.hpp"
#include "egoloc/signal.hpp"

namespace egoloc {

struct SceneConfig {
  int n_objects = 8;
  int n_frames = 300;
  double room_extent = 10.0;  // horizontal box size, meters
};

// Ground-truthed synthetic scene: static objects, a smooth camera sweep
// through a room, and fixed fisheye intrinsics. Fully determined by the
// seed and config.
struct SyntheticScene {
  std::uint64_t seed = 0;
  CameraIntrinsics intr;
  std::map<std::string, WorldPoint> objects;
  std::vector<Pose> trajectory;  // camera-to-world, one per frame
};

struct NoiseConfig {
  double depth_scale_sigma = 0.0;  // k ~ Normal(1, sigma), per frame
  double depth_shift_sigma = 0.0;  // b ~ Normal(0, sigma) meters, per frame
  std::optional<std::pair<double, double>> depth_random;  // replaces depth with Uniform(lo, hi)
  double pose_dropout = 0.0;       // probability a frame's pose is unavailable
  double score_noise_sigma = 0.0;
  double pixel_noise_sigma = 0.0;  // pixels, on the detection centroid

  void validate() const;
};

SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config = {});

struct RenderedQuery {
  DetectionTimeline timeline;
  PoseMap poses;                 // frames 0..query_frame, null where dropped
  std::map<int, double> depths;  // per-frame centroid depth after noise
  GroundTruth gt;
};

// Simulates the detector/depth/pose inputs for one query. Visible frames
// score on a visibility bell peaking for close, centered objects; invisible
// frames draw a low distractor score with a random box. Pose dropout coins
// depend only on (scene seed, frame), so all queries of a scene agree on
// pose availability.
RenderedQuery render_query(const SyntheticScene& scene, const std::string& object_id,
                           int query_frame, const NoiseConfig& noise, std::uint64_t seed,
                           const std::string& query_id = "", const std::string& scene_id = "");

// Exact displacement of the object in the query frame's camera coordinates.
Eigen::Vector3d oracle_displacement(const SyntheticScene& scene, const std::string& object_id,
                                    int query_frame);

// True centroid score of the visibility model, exposed for tests.
double visibility_score(const Eigen::Vector3d& point_cam);

}  // namespace egoloc
