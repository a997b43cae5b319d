#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egoloc/camera.hpp"
#include "egoloc/signal.hpp"

namespace egoloc {

struct ViewObservation {
  int frame_idx = 0;
  Pose pose;
  PixelPoint pixel;  // bbox centroid
  double depth = 0.0;
  double score = 0.0;
};

struct ScoredWorldPoint {
  WorldPoint point;
  double score = 0.0;
};

struct AggregationStrategy {
  enum class Kind { Last, Mean, Nms, DetWeighted };

  Kind kind = Kind::DetWeighted;
  double nms_radius = 1.0;  // meters

  static AggregationStrategy last() { return {Kind::Last, 1.0}; }
  static AggregationStrategy mean() { return {Kind::Mean, 1.0}; }
  static AggregationStrategy nms(double radius = 1.0) { return {Kind::Nms, radius}; }
  static AggregationStrategy det_weighted() { return {Kind::DetWeighted, 1.0}; }
};

enum class LocalizeStatus { Ok, NoQueryPose, NoResponsePose, NoDetection };

const char* localize_status_name(LocalizeStatus status);
LocalizeStatus localize_status_from_name(const std::string& name);

struct LocalizationResult {
  std::string query_id;
  LocalizeStatus status = LocalizeStatus::NoDetection;
  std::optional<WorldPoint> world_point;
  std::optional<Eigen::Vector3d> displacement;  // present iff status == Ok
};

ScoredWorldPoint unproject_observation(const ViewObservation& obs, const CameraIntrinsics& intr);

// Fuses scored world points. Inputs must be in ascending frame order (Last
// picks the final element). DetWeighted with an all-zero score sum falls
// back to Mean and logs a warning. Nms keeps the top-scoring point and
// score-averages it with every point within nms_radius of it.
WorldPoint aggregate(std::span<const ScoredWorldPoint> points, const AggregationStrategy& strategy);

struct RayObservation {
  Pose pose;
  PixelPoint pixel;
};

struct TriangulationResult {
  WorldPoint point;
  double min_ray_angle = 0.0;  // radians, smallest pairwise angle
  bool degenerate = false;
};

// Least-squares intersection of the viewing rays (midpoint formulation).
// Sets the degenerate flag when the smallest pairwise ray angle falls under
// the threshold; the point is still returned.
TriangulationResult triangulate(std::span<const RayObservation> observations,
                                const CameraIntrinsics& intr,
                                double degenerate_angle_threshold = 0.017453292519943295);

enum class ResponseStrategy { LastTrack, LastDetPeak, TopDetPeak, DetPeaks };
enum class DepthSource { PerView, Triangulation };

// Per-query depth access: either scalar per-frame values or dense binary
// maps sampled at the bbox centroid (nearest pixel). Dense maps are loaded
// lazily and cached; providers are per-query objects and not shared across
// threads.
class DepthProvider {
 public:
  static DepthProvider scalar(std::map<int, double> values);
  static DepthProvider dense(std::filesystem::path dir);

  // Depth in meters, or nullopt when unavailable or non-positive.
  std::optional<double> at(int frame, const PixelPoint& centroid);

 private:
  struct CachedMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;
  };

  bool dense_mode_ = false;
  std::map<int, double> values_;
  std::filesystem::path dir_;
  std::map<int, std::optional<CachedMap>> cache_;
};

using PoseMap = std::map<int, std::optional<Pose>>;

struct LocalizeConfig {
  PeakParams peak_params;
  AggregationStrategy aggregation;
  ResponseStrategy response = ResponseStrategy::DetPeaks;
  DepthSource depth_source = DepthSource::PerView;
  std::optional<double> peak_window_threshold;  // expands peaks into windows when set
  double degenerate_angle_threshold = 0.017453292519943295;  // 1 degree
};

// Full per-query pipeline: response selection, pose filtering, per-view
// unprojection or triangulation, aggregation, and the final displacement in
// the query frame's camera coordinates.
LocalizationResult localize_query(const DetectionTimeline& timeline, const PoseMap& poses,
                                  DepthProvider& depths, const CameraIntrinsics& intr,
                                  const LocalizeConfig& config);

}  // namespace egoloc
