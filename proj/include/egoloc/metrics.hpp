#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "egoloc/camera.hpp"
#include "egoloc/localize.hpp"

namespace egoloc {

struct GroundTruth {
  std::string query_id;
  std::string scene_id;
  WorldPoint object_world;
  std::optional<Pose> query_pose;
};

struct MetricStats {
  double qwp = 0.0;
  double success = 0.0;
  double success_star = 0.0;
  double l2_rmse = 0.0;     // over Ok queries; 0 when none
  double angle_mean = 0.0;  // radians, over Ok queries; 0 when none
  long n_total = 0;
  long n_posed = 0;    // queries with status Ok
  long n_success = 0;  // Ok queries under the L2 threshold
};

struct EvalReport : MetricStats {
  std::map<std::string, MetricStats> per_scene;
};

double l2_error(const Eigen::Vector3d& pred_disp, const Eigen::Vector3d& gt_disp);

// Angle between displacement vectors in [0, pi]; throws ZeroVector when
// either vector has zero norm.
double angular_error(const Eigen::Vector3d& pred_disp, const Eigen::Vector3d& gt_disp);

// Scores predictions against ground truth. A query succeeds iff its status
// is Ok and its L2 error is under the threshold; qwp counts Ok statuses.
// Ground-truth entries without a matching prediction count as failures;
// predictions without ground truth raise UnmatchedQuery.
EvalReport evaluate(std::span<const LocalizationResult> results,
                    std::span<const GroundTruth> gts, double threshold);

// Table with columns Succ%, Succ*%, L2, Angle, QwP%, optionally one row per
// scene after the global row.
std::string format_report_table(const EvalReport& report, bool per_scene = false);

}  // namespace egoloc
