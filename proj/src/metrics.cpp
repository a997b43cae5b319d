#include "egoloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <vector>

#include "egoloc/error.hpp"
#include "egoloc/log.hpp"

namespace egoloc {

double l2_error(const Eigen::Vector3d& pred_disp, const Eigen::Vector3d& gt_disp) {
  if (!pred_disp.allFinite() || !gt_disp.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "displacement vectors must be finite");
  }
  return (pred_disp - gt_disp).norm();
}

double angular_error(const Eigen::Vector3d& pred_disp, const Eigen::Vector3d& gt_disp) {
  const double np = pred_disp.norm();
  const double ng = gt_disp.norm();
  if (np == 0.0 || ng == 0.0) {
    throw Error(ErrorCode::ZeroVector, "angular error undefined for a zero vector");
  }
  const double c = std::clamp(pred_disp.dot(gt_disp) / (np * ng), -1.0, 1.0);
  return std::acos(c);
}

namespace {

struct Accumulator {
  long n_total = 0;
  long n_posed = 0;
  long n_success = 0;
  long n_l2 = 0;  // Ok queries whose ground-truth displacement is computable
  double l2_sq_sum = 0.0;
  double angle_sum = 0.0;
  long n_angle = 0;

  MetricStats stats() const {
    MetricStats s;
    s.n_total = n_total;
    s.n_posed = n_posed;
    s.n_success = n_success;
    s.qwp = n_total > 0 ? static_cast<double>(n_posed) / static_cast<double>(n_total) : 0.0;
    s.success = n_total > 0 ? static_cast<double>(n_success) / static_cast<double>(n_total) : 0.0;
    s.success_star =
        n_posed > 0 ? static_cast<double>(n_success) / static_cast<double>(n_posed) : 0.0;
    s.l2_rmse = n_l2 > 0 ? std::sqrt(l2_sq_sum / static_cast<double>(n_l2)) : 0.0;
    s.angle_mean = n_angle > 0 ? angle_sum / static_cast<double>(n_angle) : 0.0;
    return s;
  }
};

}  // namespace

EvalReport evaluate(std::span<const LocalizationResult> results,
                    std::span<const GroundTruth> gts, double threshold) {
  if (gts.empty() || results.empty()) {
    throw Error(ErrorCode::EmptyInput, "evaluation needs predictions and ground truth");
  }
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "success threshold must be positive");
  }

  std::unordered_map<std::string, const GroundTruth*> by_id;
  for (const GroundTruth& gt : gts) {
    if (!by_id.emplace(gt.query_id, &gt).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate ground-truth query '" + gt.query_id + "'");
    }
  }

  std::unordered_map<std::string, const LocalizationResult*> matched;
  for (const LocalizationResult& r : results) {
    if (by_id.find(r.query_id) == by_id.end()) {
      throw Error(ErrorCode::UnmatchedQuery, "prediction for unknown query '" + r.query_id + "'");
    }
    if (!matched.emplace(r.query_id, &r).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate prediction for query '" + r.query_id + "'");
    }
  }

  Accumulator global;
  std::map<std::string, Accumulator> per_scene;

  for (const GroundTruth& gt : gts) {
    Accumulator& scene = per_scene[gt.scene_id];
    ++global.n_total;
    ++scene.n_total;

    const auto it = matched.find(gt.query_id);
    if (it == matched.end()) continue;  // missing prediction counts as a failure
    const LocalizationResult& r = *it->second;
    if (r.status != LocalizeStatus::Ok) continue;
    if (!r.displacement.has_value()) {
      throw Error(ErrorCode::InvalidArgument,
                  "Ok result without displacement for query '" + r.query_id + "'");
    }

    ++global.n_posed;
    ++scene.n_posed;

    if (!gt.query_pose.has_value()) {
      log_warn("query " + gt.query_id + " is Ok but ground truth has no query pose; scored as failed");
      continue;
    }

    const Eigen::Vector3d gt_disp = world_to_cam(gt.object_world, *gt.query_pose);
    const double l2 = l2_error(*r.displacement, gt_disp);
    ++global.n_l2;
    ++scene.n_l2;
    global.l2_sq_sum += l2 * l2;
    scene.l2_sq_sum += l2 * l2;
    if (r.displacement->norm() > 0.0 && gt_disp.norm() > 0.0) {
      const double angle = angular_error(*r.displacement, gt_disp);
      global.angle_sum += angle;
      ++global.n_angle;
      scene.angle_sum += angle;
      ++scene.n_angle;
    }
    if (l2 < threshold) {
      ++global.n_success;
      ++scene.n_success;
    }
  }

  EvalReport report;
  static_cast<MetricStats&>(report) = global.stats();
  for (const auto& [scene_id, acc] : per_scene) {
    report.per_scene[scene_id] = acc.stats();
  }
  return report;
}

std::string format_report_table(const EvalReport& report, bool per_scene) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-16s %8s %8s %8s %8s %8s\n", "", "Succ%", "Succ*%", "L2",
                "Angle", "QwP%");
  out += line;

  const auto add_row = [&](const std::string& name, const MetricStats& s) {
    std::snprintf(line, sizeof(line), "%-16s %8.2f %8.2f %8.3f %8.3f %8.2f\n", name.c_str(),
                  100.0 * s.success, 100.0 * s.success_star, s.l2_rmse, s.angle_mean,
                  100.0 * s.qwp);
    out += line;
  };

  add_row("all", report);
  if (per_scene) {
    for (const auto& [scene_id, stats] : report.per_scene) add_row(scene_id, stats);
  }
  return out;
}

}  // namespace egoloc
