#include "egoloc/localize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "egoloc/error.hpp"
#include "egoloc/io.hpp"
#include "egoloc/log.hpp"

namespace egoloc {

const char* localize_status_name(LocalizeStatus status) {
  switch (status) {
    case LocalizeStatus::Ok: return "ok";
    case LocalizeStatus::NoQueryPose: return "no_query_pose";
    case LocalizeStatus::NoResponsePose: return "no_response_pose";
    case LocalizeStatus::NoDetection: return "no_detection";
  }
  return "?";
}

LocalizeStatus localize_status_from_name(const std::string& name) {
  if (name == "ok") return LocalizeStatus::Ok;
  if (name == "no_query_pose") return LocalizeStatus::NoQueryPose;
  if (name == "no_response_pose") return LocalizeStatus::NoResponsePose;
  if (name == "no_detection") return LocalizeStatus::NoDetection;
  throw Error(ErrorCode::SchemaError, "unknown localization status '" + name + "'");
}

ScoredWorldPoint unproject_observation(const ViewObservation& obs, const CameraIntrinsics& intr) {
  if (!(obs.score >= 0.0 && obs.score <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "observation score outside [0, 1]");
  }
  return {unproject(obs.pixel, obs.depth, intr, obs.pose), obs.score};
}

namespace {

WorldPoint weighted_mean(std::span<const ScoredWorldPoint> points,
                         std::span<const std::size_t> subset) {
  double weight_sum = 0.0;
  for (std::size_t i : subset) weight_sum += points[i].score;

  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  if (weight_sum > 0.0) {
    for (std::size_t i : subset) acc += points[i].score * points[i].point.vec();
    return WorldPoint::from(acc / weight_sum);
  }
  log_warn("aggregation weights sum to zero; falling back to unweighted mean");
  for (std::size_t i : subset) acc += points[i].point.vec();
  return WorldPoint::from(acc / static_cast<double>(subset.size()));
}

}  // namespace

WorldPoint aggregate(std::span<const ScoredWorldPoint> points,
                     const AggregationStrategy& strategy) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyInput, "aggregation over an empty point set");
  }
  for (const ScoredWorldPoint& p : points) {
    if (!std::isfinite(p.score) || !p.point.vec().allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "non-finite aggregation input");
    }
  }

  std::vector<std::size_t> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) all[i] = i;

  switch (strategy.kind) {
    case AggregationStrategy::Kind::Last:
      return points.back().point;
    case AggregationStrategy::Kind::Mean: {
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      for (const ScoredWorldPoint& p : points) acc += p.point.vec();
      return WorldPoint::from(acc / static_cast<double>(points.size()));
    }
    case AggregationStrategy::Kind::DetWeighted:
      return weighted_mean(points, all);
    case AggregationStrategy::Kind::Nms: {
      if (!(strategy.nms_radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "NMS radius must be positive");
      }
      std::size_t top = 0;
      for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].score > points[top].score) top = i;
      }
      std::vector<std::size_t> neighborhood;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double dist = (points[i].point.vec() - points[top].point.vec()).norm();
        if (dist <= strategy.nms_radius) neighborhood.push_back(i);
      }
      return weighted_mean(points, neighborhood);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown aggregation strategy");
}

TriangulationResult triangulate(std::span<const RayObservation> observations,
                                const CameraIntrinsics& intr,
                                double degenerate_angle_threshold) {
  if (observations.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "triangulation needs at least 2 observations");
  }

  std::vector<Eigen::Vector3d> origins;
  std::vector<Eigen::Vector3d> directions;
  origins.reserve(observations.size());
  directions.reserve(observations.size());
  for (const RayObservation& obs : observations) {
    const Eigen::Vector2d ray = undistort_to_ray(obs.pixel, intr);
    const Eigen::Vector3d dir_world =
        (obs.pose.rotation() * Eigen::Vector3d(ray.x(), ray.y(), 1.0)).normalized();
    origins.push_back(obs.pose.translation());
    directions.push_back(dir_world);
  }

  // Minimize the summed squared perpendicular distance to all rays:
  // sum (I - d d^T) x = sum (I - d d^T) o
  Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const Eigen::Matrix3d proj =
        Eigen::Matrix3d::Identity() - directions[i] * directions[i].transpose();
    lhs += proj;
    rhs += proj * origins[i];
  }
  const Eigen::Vector3d solution = lhs.completeOrthogonalDecomposition().solve(rhs);

  double min_angle = 3.141592653589793;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    for (std::size_t j = i + 1; j < directions.size(); ++j) {
      const double c = std::clamp(directions[i].dot(directions[j]), -1.0, 1.0);
      min_angle = std::min(min_angle, std::acos(c));
    }
  }

  TriangulationResult result;
  result.point = WorldPoint::from(solution);
  result.min_ray_angle = min_angle;
  result.degenerate = min_angle < degenerate_angle_threshold;
  if (result.degenerate) {
    log_debug("triangulation baseline is degenerate (min ray angle " +
              std::to_string(min_angle * 180.0 / 3.141592653589793) + " deg)");
  }
  return result;
}

DepthProvider DepthProvider::scalar(std::map<int, double> values) {
  DepthProvider p;
  p.dense_mode_ = false;
  p.values_ = std::move(values);
  return p;
}

DepthProvider DepthProvider::dense(std::filesystem::path dir) {
  DepthProvider p;
  p.dense_mode_ = true;
  p.dir_ = std::move(dir);
  return p;
}

std::optional<double> DepthProvider::at(int frame, const PixelPoint& centroid) {
  if (!dense_mode_) {
    const auto it = values_.find(frame);
    if (it == values_.end() || !(it->second > 0.0)) return std::nullopt;
    return it->second;
  }

  auto cached = cache_.find(frame);
  if (cached == cache_.end()) {
    const std::filesystem::path path = dir_ / (std::to_string(frame) + ".dpth");
    std::optional<CachedMap> entry;
    if (std::filesystem::exists(path)) {
      const DepthMap map = read_depth_map(path);
      entry = CachedMap{map.width, map.height, map.values};
    }
    cached = cache_.emplace(frame, std::move(entry)).first;
  }
  if (!cached->second.has_value()) return std::nullopt;

  const CachedMap& map = *cached->second;
  const int u = std::clamp(static_cast<int>(std::lround(centroid.u)), 0, map.width - 1);
  const int v = std::clamp(static_cast<int>(std::lround(centroid.v)), 0, map.height - 1);
  const float value = map.values[static_cast<std::size_t>(v) * map.width + u];
  if (!(value > 0.0f) || !std::isfinite(value)) return std::nullopt;
  return static_cast<double>(value);
}

namespace {

std::optional<Pose> pose_for(const PoseMap& poses, int frame) {
  const auto it = poses.find(frame);
  if (it == poses.end()) return std::nullopt;
  return it->second;
}

// Entry positions covered by the selected peaks, optionally grown into
// threshold windows on the smoothed curve.
std::vector<std::size_t> selected_positions(const DetectionTimeline& timeline,
                                            const PeakSet& peaks, const LocalizeConfig& config) {
  std::map<int, std::size_t> frame_to_pos;
  for (std::size_t i = 0; i < timeline.entries.size(); ++i) {
    frame_to_pos[timeline.entries[i].frame] = i;
  }

  std::set<std::size_t> positions;
  for (const Peak& peak : peaks) positions.insert(frame_to_pos.at(peak.frame_idx));

  const bool can_smooth =
      config.peak_params.median_kernel <= 2 * static_cast<int>(timeline.entries.size()) - 1;
  if (config.peak_window_threshold.has_value() && can_smooth) {
    std::vector<double> raw(timeline.entries.size());
    for (std::size_t i = 0; i < timeline.entries.size(); ++i) raw[i] = timeline.entries[i].score;
    const std::vector<double> smoothed =
        median_filter(raw, config.peak_params.median_kernel, config.peak_params.padding);
    for (const Peak& peak : peaks) {
      const int pos = static_cast<int>(frame_to_pos.at(peak.frame_idx));
      const auto [lo, hi] = expand_peak_window(smoothed, pos, *config.peak_window_threshold);
      for (int i = lo; i <= hi; ++i) positions.insert(static_cast<std::size_t>(i));
    }
  }
  return {positions.begin(), positions.end()};
}

}  // namespace

LocalizationResult localize_query(const DetectionTimeline& timeline, const PoseMap& poses,
                                  DepthProvider& depths, const CameraIntrinsics& intr,
                                  const LocalizeConfig& config) {
  intr.validate();
  LocalizationResult result;
  result.query_id = timeline.query_id;

  if (timeline.entries.empty()) {
    result.status = LocalizeStatus::NoDetection;
    return result;
  }
  timeline.validate();

  PeakSet peaks;
  if (config.response == ResponseStrategy::LastTrack) {
    const Detection& last = timeline.entries.back();
    peaks = {Peak{last.frame, last.bbox, last.score, 0.0, 0.0}};
  } else {
    peaks = select_response_peaks(timeline, config.peak_params);
    if (peaks.empty()) {
      // No peak survived: fall back to the highest raw score (latest on ties).
      std::size_t best = 0;
      for (std::size_t i = 1; i < timeline.entries.size(); ++i) {
        if (timeline.entries[i].score >= timeline.entries[best].score) best = i;
      }
      const Detection& d = timeline.entries[best];
      peaks = {Peak{d.frame, d.bbox, d.score, 0.0, 0.0}};
      log_debug("query " + timeline.query_id + ": no peaks, using highest-score frame " +
                std::to_string(d.frame));
    }
    switch (config.response) {
      case ResponseStrategy::LastDetPeak:
        peaks = apply_strategy(peaks, PeakStrategy::LastDetPeak);
        break;
      case ResponseStrategy::TopDetPeak:
        peaks = apply_strategy(peaks, PeakStrategy::TopDetPeak);
        break;
      case ResponseStrategy::DetPeaks:
      case ResponseStrategy::LastTrack:
        break;
    }
  }

  std::vector<ViewObservation> posed_views;
  std::vector<std::size_t> positions = selected_positions(timeline, peaks, config);
  for (std::size_t pos : positions) {
    const Detection& d = timeline.entries[pos];
    const std::optional<Pose> pose = pose_for(poses, d.frame);
    if (!pose.has_value()) continue;
    posed_views.push_back({d.frame, *pose, d.bbox.centroid(), 0.0, d.score});
  }
  if (posed_views.empty()) {
    result.status = LocalizeStatus::NoResponsePose;
    return result;
  }

  std::vector<ScoredWorldPoint> points;
  if (config.depth_source == DepthSource::Triangulation && posed_views.size() >= 2) {
    std::vector<RayObservation> rays;
    double score_sum = 0.0;
    rays.reserve(posed_views.size());
    for (const ViewObservation& view : posed_views) {
      rays.push_back({view.pose, view.pixel});
      score_sum += view.score;
    }
    const TriangulationResult tri =
        triangulate(rays, intr, config.degenerate_angle_threshold);
    points.push_back({tri.point, score_sum / static_cast<double>(posed_views.size())});
  } else {
    if (config.depth_source == DepthSource::Triangulation) {
      log_debug("query " + timeline.query_id +
                ": single posed view, falling back to per-view depth");
    }
    for (ViewObservation& view : posed_views) {
      const std::optional<double> depth = depths.at(view.frame_idx, view.pixel);
      if (!depth.has_value()) continue;
      view.depth = *depth;
      points.push_back(unproject_observation(view, intr));
    }
    if (points.empty()) {
      result.status = LocalizeStatus::NoResponsePose;
      return result;
    }
  }

  result.world_point = aggregate(points, config.aggregation);

  const std::optional<Pose> query_pose = pose_for(poses, timeline.query_frame);
  if (!query_pose.has_value()) {
    result.status = LocalizeStatus::NoQueryPose;
    return result;
  }
  result.displacement = world_to_cam(*result.world_point, *query_pose);
  result.status = LocalizeStatus::Ok;
  return result;
}

}  // namespace egoloc
