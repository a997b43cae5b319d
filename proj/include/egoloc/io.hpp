#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "egoloc/align.hpp"
#include "egoloc/camera.hpp"
#include "egoloc/localize.hpp"
#include "egoloc/metrics.hpp"
#include "egoloc/signal.hpp"
#include "egoloc/simkit.hpp"

namespace egoloc {

// JSON / binary readers and writers for every on-disk format. Readers
// validate the full schema and report the file, query id and field path on
// failure; writers emit deterministic output (sorted keys, shortest float
// round-trip).

CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr);

PoseMap load_poses(const std::filesystem::path& path);
void save_poses(const std::filesystem::path& path, const PoseMap& poses);

std::vector<DetectionTimeline> load_detections(const std::filesystem::path& path);
void save_detections(const std::filesystem::path& path,
                     const std::vector<DetectionTimeline>& timelines);

struct DepthSpec {
  enum class Mode { Scalar, Map };
  Mode mode = Mode::Scalar;
  std::map<int, double> values;   // scalar mode
  std::filesystem::path dir;      // map mode, resolved against the json file

  DepthProvider provider() const;
};

std::map<std::string, DepthSpec> load_depths(const std::filesystem::path& path);
void save_depths(const std::filesystem::path& path,
                 const std::map<std::string, DepthSpec>& depths);

std::vector<GroundTruth> load_gt(const std::filesystem::path& path);
void save_gt(const std::filesystem::path& path, const std::vector<GroundTruth>& gts);

std::vector<LocalizationResult> load_results(const std::filesystem::path& path);
void save_results(const std::filesystem::path& path,
                  const std::vector<LocalizationResult>& results);

void save_report(const std::filesystem::path& path, const EvalReport& report);

struct AnchorPair {
  int frame = 0;
  Eigen::Vector3d local_center;
  Eigen::Vector3d world_center;
};

std::vector<AnchorPair> load_anchors(const std::filesystem::path& path);
void save_anchors(const std::filesystem::path& path, const std::vector<AnchorPair>& anchors);

Sim3 load_sim3(const std::filesystem::path& path);
void save_sim3(const std::filesystem::path& path, const Sim3& t);

SyntheticScene load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SyntheticScene& scene);

// Dense depth map: 16-byte header (magic "DPTH", u32 width, u32 height,
// u32 reserved, little-endian) followed by row-major float32 meters.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;
};

DepthMap read_depth_map(const std::filesystem::path& path);
void write_depth_map(const std::filesystem::path& path, const DepthMap& map);

}  // namespace egoloc
