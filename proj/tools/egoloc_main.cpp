#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "egoloc/align.hpp"
#include "egoloc/error.hpp"
#include "egoloc/io.hpp"
#include "egoloc/localize.hpp"
#include "egoloc/log.hpp"
#include "egoloc/metrics.hpp"
#include "egoloc/rng.hpp"
#include "egoloc/signal.hpp"
#include "egoloc/simkit.hpp"

namespace fs = std::filesystem;
using namespace egoloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

AggregationStrategy parse_aggregation(const std::string& name, double nms_radius) {
  if (name == "last") return AggregationStrategy::last();
  if (name == "mean") return AggregationStrategy::mean();
  if (name == "nms") return AggregationStrategy::nms(nms_radius);
  if (name == "det-weighted") return AggregationStrategy::det_weighted();
  throw Error(ErrorCode::InvalidArgument,
              "unknown aggregation strategy '" + name + "' (expected det-weighted|mean|nms|last)");
}

ResponseStrategy parse_response(const std::string& name) {
  if (name == "last-track") return ResponseStrategy::LastTrack;
  if (name == "last-det-peak") return ResponseStrategy::LastDetPeak;
  if (name == "top-det-peak") return ResponseStrategy::TopDetPeak;
  if (name == "det-peaks") return ResponseStrategy::DetPeaks;
  throw Error(ErrorCode::InvalidArgument,
              "unknown response strategy '" + name +
                  "' (expected last-track|last-det-peak|top-det-peak|det-peaks)");
}

DepthSource parse_depth_source(const std::string& name) {
  if (name == "per-view") return DepthSource::PerView;
  if (name == "triangulation") return DepthSource::Triangulation;
  throw Error(ErrorCode::InvalidArgument,
              "unknown depth source '" + name + "' (expected per-view|triangulation)");
}

std::string response_name(ResponseStrategy s) {
  switch (s) {
    case ResponseStrategy::LastTrack: return "last-track";
    case ResponseStrategy::LastDetPeak: return "last-det-peak";
    case ResponseStrategy::TopDetPeak: return "top-det-peak";
    case ResponseStrategy::DetPeaks: return "det-peaks";
  }
  return "?";
}

std::string aggregation_name(AggregationStrategy::Kind k) {
  switch (k) {
    case AggregationStrategy::Kind::Last: return "last";
    case AggregationStrategy::Kind::Mean: return "mean";
    case AggregationStrategy::Kind::Nms: return "nms";
    case AggregationStrategy::Kind::DetWeighted: return "det-weighted";
  }
  return "?";
}

struct PeakParamFlags {
  PeakParams params;
  std::string pad = "replicate";

  void attach(CLI::App* cmd) {
    cmd->add_option("--median-kernel", params.median_kernel, "median filter kernel (odd frames)");
    cmd->add_option("--distance", params.distance, "min distance between peaks (frames)");
    cmd->add_option("--width", params.width, "min peak width (frames)");
    cmd->add_option("--prominence", params.prominence, "min peak prominence");
    cmd->add_option("--wlen", params.wlen, "window length for prominence measurement");
    cmd->add_option("--rel-height", params.rel_height, "relative height for width measurement");
    cmd->add_option("--pad", pad, "median filter padding: replicate|zero")
        ->check(CLI::IsMember({"replicate", "zero"}));
  }

  PeakParams resolve() const {
    PeakParams p = params;
    p.padding = pad == "zero" ? PaddingMode::Zero : PaddingMode::Replicate;
    p.validate();
    return p;
  }
};

// ---------------------------------------------------------------------------
// localize

struct LocalizeArgs {
  std::string detections, poses, intrinsics, depths, out;
  std::string strategy = "det-weighted";
  std::string response = "det-peaks";
  std::string depth_source = "per-view";
  double nms_radius = 1.0;
  double window_threshold = 0.0;  // 0 = no expansion
  int parallelism = 1;
  PeakParamFlags peak_flags;
};

std::vector<LocalizationResult> run_localization(const std::vector<DetectionTimeline>& timelines,
                                                 const PoseMap& poses,
                                                 const std::map<std::string, DepthSpec>& depths,
                                                 const CameraIntrinsics& intr,
                                                 const LocalizeConfig& config, int parallelism) {
  for (const DetectionTimeline& t : timelines) {
    if (depths.find(t.query_id) == depths.end()) {
      throw Error(ErrorCode::SchemaError, "no depth entry for query '" + t.query_id + "'");
    }
  }

  std::vector<LocalizationResult> results(timelines.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < timelines.size(); i = next.fetch_add(1)) {
      try {
        DepthProvider provider = depths.at(timelines[i].query_id).provider();
        results[i] = localize_query(timelines[i], poses, provider, intr, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(parallelism, static_cast<int>(timelines.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(results.begin(), results.end(),
            [](const LocalizationResult& a, const LocalizationResult& b) {
              return a.query_id < b.query_id;
            });
  return results;
}

int cmd_localize(const LocalizeArgs& args) {
  const CameraIntrinsics intr = load_intrinsics(args.intrinsics);
  const PoseMap poses = load_poses(args.poses);
  const std::vector<DetectionTimeline> timelines = load_detections(args.detections);
  const std::map<std::string, DepthSpec> depths = load_depths(args.depths);

  LocalizeConfig config;
  config.peak_params = args.peak_flags.resolve();
  config.aggregation = parse_aggregation(args.strategy, args.nms_radius);
  config.response = parse_response(args.response);
  config.depth_source = parse_depth_source(args.depth_source);
  if (args.window_threshold > 0.0) config.peak_window_threshold = args.window_threshold;
  if (args.parallelism < 1) {
    throw Error(ErrorCode::InvalidArgument, "parallelism must be >= 1");
  }

  const std::vector<LocalizationResult> results =
      run_localization(timelines, poses, depths, intr, config, args.parallelism);
  save_results(args.out, results);

  std::size_t ok = 0;
  for (const LocalizationResult& r : results) ok += r.status == LocalizeStatus::Ok;
  std::printf("localized %zu queries (%zu ok) -> %s\n", results.size(), ok, args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string pred, gt;
  std::string out = "report.json";
  double threshold = 0.0;
  bool per_scene = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const std::vector<LocalizationResult> results = load_results(args.pred);
  const std::vector<GroundTruth> gts = load_gt(args.gt);
  const EvalReport report = evaluate(results, gts, args.threshold);
  save_report(args.out, report);
  std::fputs(format_report_table(report, args.per_scene).c_str(), stdout);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int scenes = 1;
  int queries = 10;
  std::uint64_t seed = 0;
  std::string out;
  int frames = 300;
  int objects = 8;
  double room_extent = 10.0;
  double depth_scale_sigma = 0.0;
  double depth_shift_sigma = 0.0;
  std::vector<double> depth_random;
  double pose_dropout = 0.0;
  double score_noise_sigma = 0.0;
  double pixel_noise_sigma = 0.0;
  double threshold = 0.5;
};

std::string scene_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%03d", index);
  return buf;
}

int cmd_simulate(const SimulateArgs& args) {
  if (args.scenes < 1 || args.queries < 1) {
    throw Error(ErrorCode::InvalidArgument, "need at least one scene and one query");
  }
  NoiseConfig noise;
  noise.depth_scale_sigma = args.depth_scale_sigma;
  noise.depth_shift_sigma = args.depth_shift_sigma;
  if (!args.depth_random.empty()) {
    if (args.depth_random.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "--depth-random expects two values: lo hi");
    }
    noise.depth_random = {args.depth_random[0], args.depth_random[1]};
  }
  noise.pose_dropout = args.pose_dropout;
  noise.score_noise_sigma = args.score_noise_sigma;
  noise.pixel_noise_sigma = args.pixel_noise_sigma;
  noise.validate();

  SceneConfig scene_config;
  scene_config.n_frames = args.frames;
  scene_config.n_objects = args.objects;
  scene_config.room_extent = args.room_extent;

  fs::create_directories(args.out);
  std::vector<GroundTruth> all_gt;
  std::vector<LocalizationResult> all_results;

  LocalizeConfig eval_config;  // defaults: det-peaks + det-weighted + per-view

  for (int s = 0; s < args.scenes; ++s) {
    const std::uint64_t scene_seed = Rng::split(args.seed, 1000 + static_cast<std::uint64_t>(s));
    const SyntheticScene scene = generate_scene(scene_seed, scene_config);
    const std::string scene_id = scene_dir_name(s);
    const fs::path dir = fs::path(args.out) / scene_id;
    fs::create_directories(dir);

    std::vector<std::string> object_ids;
    for (const auto& [name, point] : scene.objects) object_ids.push_back(name);

    std::vector<DetectionTimeline> timelines;
    std::map<std::string, DepthSpec> depths;
    std::vector<GroundTruth> gts;
    PoseMap scene_poses;

    for (int q = 0; q < args.queries; ++q) {
      const std::uint64_t query_seed =
          Rng::split(scene_seed, 5000 + static_cast<std::uint64_t>(q));
      Rng pick(query_seed);
      char qname[32];
      std::snprintf(qname, sizeof(qname), "s%03d_q%03d", s, q);

      std::optional<RenderedQuery> rendered;
      for (int attempt = 0; attempt < 50 && !rendered.has_value(); ++attempt) {
        const std::string& object_id =
            object_ids[static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(object_ids.size()) - 1))];
        const int query_frame = static_cast<int>(
            pick.uniform_int(static_cast<std::int64_t>(0.8 * scene_config.n_frames),
                             scene_config.n_frames - 1));
        try {
          rendered = render_query(scene, object_id, query_frame, noise,
                                  Rng::split(query_seed, static_cast<std::uint64_t>(attempt)),
                                  qname, scene_id);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NeverVisible) throw;
        }
      }
      if (!rendered.has_value()) {
        throw Error(ErrorCode::InfeasiblePlacement,
                    std::string("no visible object/query-frame combination for ") + qname);
      }

      timelines.push_back(rendered->timeline);
      DepthSpec spec;
      spec.mode = DepthSpec::Mode::Scalar;
      spec.values = rendered->depths;
      depths.emplace(qname, std::move(spec));
      gts.push_back(rendered->gt);
      for (const auto& [frame, pose] : rendered->poses) scene_poses[frame] = pose;
    }

    save_scene(dir / "scene.json", scene);
    save_detections(dir / "detections.json", timelines);
    save_poses(dir / "poses.json", scene_poses);
    save_depths(dir / "depths.json", depths);
    save_gt(dir / "gt.json", gts);
    save_intrinsics(dir / "intrinsics.json", scene.intr);

    all_gt.insert(all_gt.end(), gts.begin(), gts.end());
    const std::vector<LocalizationResult> results =
        run_localization(timelines, scene_poses, depths, scene.intr, eval_config, 1);
    all_results.insert(all_results.end(), results.begin(), results.end());
  }

  save_gt(fs::path(args.out) / "gt.json", all_gt);

  const EvalReport report = evaluate(all_results, all_gt, args.threshold);
  std::printf("wrote %d scene(s), %zu queries to %s\n", args.scenes, all_gt.size(),
              args.out.c_str());
  std::printf("oracle run: success=%.4f success*=%.4f qwp=%.4f l2_rmse=%.6f (threshold %.3g m)\n",
              report.success, report.success_star, report.qwp, report.l2_rmse, args.threshold);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
  std::string dataset;
  std::string out = "ablation.csv";
  std::string plot_data;
  double threshold = 0.5;
  double nms_radius = 1.0;
  std::vector<double> window_sweep;
  int parallelism = 1;
};

struct SceneData {
  std::vector<DetectionTimeline> timelines;
  PoseMap poses;
  std::map<std::string, DepthSpec> depths;
  CameraIntrinsics intr;
};

EvalReport run_ablation_config(const std::vector<SceneData>& scenes,
                               const std::vector<GroundTruth>& gts, const LocalizeConfig& config,
                               double threshold, int parallelism) {
  std::vector<LocalizationResult> results;
  for (const SceneData& scene : scenes) {
    const std::vector<LocalizationResult> r = run_localization(
        scene.timelines, scene.poses, scene.depths, scene.intr, config, parallelism);
    results.insert(results.end(), r.begin(), r.end());
  }
  return evaluate(results, gts, threshold);
}

int cmd_ablate(const AblateArgs& args) {
  if (!fs::is_directory(args.dataset)) {
    throw Error(ErrorCode::Io, "dataset directory not found: " + args.dataset);
  }
  std::vector<SceneData> scenes;
  std::vector<GroundTruth> gts;
  std::vector<fs::path> scene_dirs;
  for (const auto& entry : fs::directory_iterator(args.dataset)) {
    if (entry.is_directory() && fs::exists(entry.path() / "detections.json")) {
      scene_dirs.push_back(entry.path());
    }
  }
  std::sort(scene_dirs.begin(), scene_dirs.end());
  if (scene_dirs.empty()) {
    throw Error(ErrorCode::Io, "no scene directories under " + args.dataset);
  }
  for (const fs::path& dir : scene_dirs) {
    SceneData scene;
    scene.timelines = load_detections(dir / "detections.json");
    scene.poses = load_poses(dir / "poses.json");
    scene.depths = load_depths(dir / "depths.json");
    scene.intr = load_intrinsics(dir / "intrinsics.json");
    scenes.push_back(std::move(scene));
    const std::vector<GroundTruth> scene_gt = load_gt(dir / "gt.json");
    gts.insert(gts.end(), scene_gt.begin(), scene_gt.end());
  }

  std::ofstream csv(args.out);
  if (!csv) throw Error(ErrorCode::Io, "cannot write " + args.out);
  csv << "response,aggregation,depth_source,window_threshold,success,success_star,"
         "l2_rmse,angle_mean,qwp\n";

  const auto write_row = [&](const LocalizeConfig& config, const std::string& window,
                             const EvalReport& r) {
    csv << response_name(config.response) << ',' << aggregation_name(config.aggregation.kind)
        << ',' << (config.depth_source == DepthSource::PerView ? "per-view" : "triangulation")
        << ',' << window << ',' << r.success << ',' << r.success_star << ',' << r.l2_rmse << ','
        << r.angle_mean << ',' << r.qwp << '\n';
  };

  const ResponseStrategy responses[] = {ResponseStrategy::LastTrack, ResponseStrategy::LastDetPeak,
                                        ResponseStrategy::TopDetPeak, ResponseStrategy::DetPeaks};
  const AggregationStrategy::Kind aggregations[] = {
      AggregationStrategy::Kind::Last, AggregationStrategy::Kind::Mean,
      AggregationStrategy::Kind::Nms, AggregationStrategy::Kind::DetWeighted};
  const DepthSource depth_sources[] = {DepthSource::PerView, DepthSource::Triangulation};

  for (const ResponseStrategy response : responses) {
    for (const AggregationStrategy::Kind kind : aggregations) {
      for (const DepthSource depth_source : depth_sources) {
        LocalizeConfig config;
        config.response = response;
        config.aggregation = {kind, args.nms_radius};
        config.depth_source = depth_source;
        const EvalReport r =
            run_ablation_config(scenes, gts, config, args.threshold, args.parallelism);
        write_row(config, "", r);
      }
    }
  }

  std::ofstream plot;
  if (!args.plot_data.empty()) {
    plot.open(args.plot_data);
    if (!plot) throw Error(ErrorCode::Io, "cannot write " + args.plot_data);
    plot << "window_threshold,success,l2_rmse\n";
  }
  for (const double threshold : args.window_sweep) {
    LocalizeConfig config;  // det-peaks + det-weighted + per-view
    config.peak_window_threshold = threshold;
    const EvalReport r = run_ablation_config(scenes, gts, config, args.threshold, args.parallelism);
    write_row(config, std::to_string(threshold), r);
    if (plot.is_open()) {
      plot << threshold << ',' << r.success << ',' << r.l2_rmse << '\n';
    }
  }

  std::printf("wrote %s\n", args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// align

struct AlignArgs {
  std::string anchors;
  std::string out = "sim3.json";
  bool robust = false;
  double max_error = 0.25;
  int iterations = 1000;
  std::uint64_t seed = 0;
};

int cmd_align(const AlignArgs& args) {
  const std::vector<AnchorPair> anchors = load_anchors(args.anchors);
  std::vector<Eigen::Vector3d> src;
  std::vector<Eigen::Vector3d> dst;
  src.reserve(anchors.size());
  dst.reserve(anchors.size());
  for (const AnchorPair& a : anchors) {
    src.push_back(a.local_center);
    dst.push_back(a.world_center);
  }

  Sim3 transform;
  std::size_t inliers = anchors.size();
  if (args.robust) {
    const RobustSim3Result result =
        estimate_sim3_robust(src, dst, args.max_error, args.iterations, args.seed);
    transform = result.transform;
    inliers = static_cast<std::size_t>(
        std::count(result.inlier_mask.begin(), result.inlier_mask.end(), char(1)));
  } else {
    transform = estimate_sim3(src, dst);
  }
  save_sim3(args.out, transform);
  std::printf("aligned %zu/%zu anchors, scale=%.6f -> %s\n", inliers, anchors.size(),
              transform.scale, args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// peaks

struct PeaksArgs {
  std::string scores;
  std::string plot_data;
  PeakParamFlags peak_flags;
};

int cmd_peaks(const PeaksArgs& args) {
  const std::vector<DetectionTimeline> timelines = load_detections(args.scores);
  const PeakParams params = args.peak_flags.resolve();

  std::ofstream plot;
  if (!args.plot_data.empty()) {
    plot.open(args.plot_data);
    if (!plot) throw Error(ErrorCode::Io, "cannot write " + args.plot_data);
    plot << "query_id,frame,raw_score,smoothed_score,is_peak\n";
  }

  for (const DetectionTimeline& timeline : timelines) {
    const PeakSet peaks = select_response_peaks(timeline, params);
    if (peaks.empty()) {
      std::printf("query %s: no peaks\n", timeline.query_id.c_str());
    } else {
      std::printf("query %s: %zu peak(s)\n", timeline.query_id.c_str(), peaks.size());
      for (const Peak& p : peaks) {
        std::printf("  frame=%d score=%.4f prominence=%.4f width=%.2f\n", p.frame_idx, p.score,
                    p.prominence, p.width);
      }
    }

    if (plot.is_open()) {
      std::vector<double> raw(timeline.entries.size());
      for (std::size_t i = 0; i < timeline.entries.size(); ++i) raw[i] = timeline.entries[i].score;
      const std::vector<double> smoothed =
          raw.size() >= 1 ? median_filter(raw, params.median_kernel, params.padding) : raw;
      for (std::size_t i = 0; i < timeline.entries.size(); ++i) {
        const int frame = timeline.entries[i].frame;
        const bool is_peak = std::any_of(peaks.begin(), peaks.end(),
                                         [&](const Peak& p) { return p.frame_idx == frame; });
        plot << timeline.query_id << ',' << frame << ',' << raw[i] << ',' << smoothed[i] << ','
             << (is_peak ? 1 : 0) << '\n';
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egoloc: multi-view geometric localization over egocentric detections"};
  app.require_subcommand(1);

  LocalizeArgs loc;
  CLI::App* localize_cmd = app.add_subcommand("localize", "localize queries from detections/poses/depths");
  localize_cmd->add_option("--detections", loc.detections, "detections.json")->required();
  localize_cmd->add_option("--poses", loc.poses, "poses.json")->required();
  localize_cmd->add_option("--intrinsics", loc.intrinsics, "intrinsics.json")->required();
  localize_cmd->add_option("--depths", loc.depths, "depths.json")->required();
  localize_cmd->add_option("--out", loc.out, "output result.json")->required();
  localize_cmd->add_option("--strategy", loc.strategy, "aggregation: det-weighted|mean|nms|last");
  localize_cmd->add_option("--response-strategy", loc.response,
                           "response selection: last-track|last-det-peak|top-det-peak|det-peaks");
  localize_cmd->add_option("--depth-source", loc.depth_source, "per-view|triangulation");
  localize_cmd->add_option("--nms-radius", loc.nms_radius, "NMS fusion radius (m)");
  localize_cmd->add_option("--peak-window-threshold", loc.window_threshold,
                           "expand peaks into score windows (0 disables)");
  localize_cmd->add_option("--parallelism", loc.parallelism, "worker threads");
  loc.peak_flags.attach(localize_cmd);

  EvaluateArgs ev;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against ground truth");
  evaluate_cmd->add_option("--pred", ev.pred, "result.json")->required();
  evaluate_cmd->add_option("--gt", ev.gt, "gt.json")->required();
  evaluate_cmd->add_option("--threshold", ev.threshold, "success threshold (m)")->required();
  evaluate_cmd->add_option("--out", ev.out, "output report.json");
  evaluate_cmd->add_flag("--per-scene", ev.per_scene, "add per-scene rows to the table");

  SimulateArgs sim;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate_cmd->add_option("--scenes", sim.scenes, "number of scenes");
  simulate_cmd->add_option("--queries", sim.queries, "queries per scene");
  simulate_cmd->add_option("--seed", sim.seed, "master seed")->required();
  simulate_cmd->add_option("--out", sim.out, "output directory")->required();
  simulate_cmd->add_option("--frames", sim.frames, "frames per scene");
  simulate_cmd->add_option("--objects", sim.objects, "objects per scene");
  simulate_cmd->add_option("--room-extent", sim.room_extent, "room size (m)");
  simulate_cmd->add_option("--depth-scale-sigma", sim.depth_scale_sigma, "depth scale noise sigma");
  simulate_cmd->add_option("--depth-shift-sigma", sim.depth_shift_sigma, "depth shift noise sigma (m)");
  simulate_cmd->add_option("--depth-random", sim.depth_random,
                           "replace depth with Uniform(lo, hi) meters")
      ->expected(2);
  simulate_cmd->add_option("--pose-dropout", sim.pose_dropout, "pose dropout probability");
  simulate_cmd->add_option("--score-noise-sigma", sim.score_noise_sigma, "detection score noise");
  simulate_cmd->add_option("--pixel-noise-sigma", sim.pixel_noise_sigma, "centroid noise (px)");
  simulate_cmd->add_option("--threshold", sim.threshold, "threshold for the printed oracle run (m)");

  AblateArgs ab;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "run the strategy cross-product on a dataset");
  ablate_cmd->add_option("--dataset", ab.dataset, "dataset directory from simulate")->required();
  ablate_cmd->add_option("--out", ab.out, "output CSV");
  ablate_cmd->add_option("--plot-data", ab.plot_data, "window-sweep plot data CSV");
  ablate_cmd->add_option("--threshold", ab.threshold, "success threshold (m)");
  ablate_cmd->add_option("--nms-radius", ab.nms_radius, "NMS fusion radius (m)");
  ablate_cmd->add_option("--window-sweep", ab.window_sweep, "peak window thresholds to sweep");
  ablate_cmd->add_option("--parallelism", ab.parallelism, "worker threads");

  AlignArgs al;
  CLI::App* align_cmd = app.add_subcommand("align", "estimate a Sim3 from anchor correspondences");
  align_cmd->add_option("--anchors", al.anchors, "anchors.json")->required();
  align_cmd->add_option("--out", al.out, "output sim3.json");
  align_cmd->add_flag("--robust", al.robust, "RANSAC with outlier rejection");
  align_cmd->add_option("--max-error", al.max_error, "inlier residual bound (m)");
  align_cmd->add_option("--iterations", al.iterations, "RANSAC iterations");
  align_cmd->add_option("--seed", al.seed, "RANSAC seed");

  PeaksArgs pk;
  CLI::App* peaks_cmd = app.add_subcommand("peaks", "inspect detection-score peaks");
  peaks_cmd->add_option("--scores", pk.scores, "detections.json")->required();
  peaks_cmd->add_option("--plot-data", pk.plot_data, "score curve plot data CSV");
  pk.peak_flags.attach(peaks_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (localize_cmd->parsed()) return cmd_localize(loc);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev);
    if (simulate_cmd->parsed()) return cmd_simulate(sim);
    if (ablate_cmd->parsed()) return cmd_ablate(ab);
    if (align_cmd->parsed()) return cmd_align(al);
    if (peaks_cmd->parsed()) return cmd_peaks(pk);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (...) {
    std::fprintf(stderr, "internal error\n");
    return kExitInternal;
  }
  return kExitOk;
}
