#include "egoloc/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "egoloc/error.hpp"

namespace egoloc {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  out << j.dump(1) << '\n';
}

[[noreturn]] void schema_fail(const std::filesystem::path& path, const std::string& where,
                              const std::string& what) {
  throw Error(ErrorCode::SchemaError, path.string() + ": " + where + ": " + what);
}

double require_number(const json& j, const std::filesystem::path& path, const std::string& where) {
  if (!j.is_number()) schema_fail(path, where, "expected a number");
  return j.get<double>();
}

int require_int(const json& j, const std::filesystem::path& path, const std::string& where) {
  if (!j.is_number_integer()) schema_fail(path, where, "expected an integer");
  return j.get<int>();
}

std::string require_string(const json& j, const std::filesystem::path& path,
                           const std::string& where) {
  if (!j.is_string()) schema_fail(path, where, "expected a string");
  return j.get<std::string>();
}

const json& require_field(const json& j, const char* key, const std::filesystem::path& path,
                          const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    schema_fail(path, where, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

Eigen::Vector3d require_vec3(const json& j, const std::filesystem::path& path,
                             const std::string& where) {
  if (!j.is_array() || j.size() != 3) schema_fail(path, where, "expected an array of 3 numbers");
  return {require_number(j[0], path, where + "[0]"), require_number(j[1], path, where + "[1]"),
          require_number(j[2], path, where + "[2]")};
}

Pose require_pose16(const json& j, const std::filesystem::path& path, const std::string& where) {
  if (!j.is_array() || j.size() != 16) schema_fail(path, where, "expected an array of 16 numbers");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      m(r, c) = require_number(j[4 * r + c], path, where + "[" + std::to_string(4 * r + c) + "]");
    }
  }
  try {
    return Pose::from_matrix(m);
  } catch (const Error& e) {
    schema_fail(path, where, e.what());
  }
}

json pose_to_json(const Pose& pose) {
  const Eigen::Matrix4d m = pose.matrix();
  json out = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out.push_back(m(r, c));
  }
  return out;
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

int parse_frame_key(const std::string& key, const std::filesystem::path& path,
                    const std::string& where) {
  try {
    std::size_t used = 0;
    const int frame = std::stoi(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
    return frame;
  } catch (const std::exception&) {
    schema_fail(path, where, "key '" + key + "' is not a frame index");
  }
}

DetectionTimeline parse_timeline(const json& j, const std::filesystem::path& path,
                                 const std::string& where) {
  DetectionTimeline t;
  t.query_id = require_string(require_field(j, "query_id", path, where), path, where + ".query_id");
  const std::string ctx = where + " (query '" + t.query_id + "')";
  t.query_frame = require_int(require_field(j, "query_frame", path, ctx), path, ctx + ".query_frame");
  const json& entries = require_field(j, "entries", path, ctx);
  if (!entries.is_array()) schema_fail(path, ctx + ".entries", "expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string ewhere = ctx + ".entries[" + std::to_string(i) + "]";
    const json& e = entries[i];
    Detection d;
    d.frame = require_int(require_field(e, "frame", path, ewhere), path, ewhere + ".frame");
    const json& bbox = require_field(e, "bbox", path, ewhere);
    if (!bbox.is_array() || bbox.size() != 4) {
      schema_fail(path, ewhere + ".bbox", "expected an array of 4 numbers");
    }
    d.bbox = {require_number(bbox[0], path, ewhere + ".bbox[0]"),
              require_number(bbox[1], path, ewhere + ".bbox[1]"),
              require_number(bbox[2], path, ewhere + ".bbox[2]"),
              require_number(bbox[3], path, ewhere + ".bbox[3]")};
    d.score = require_number(require_field(e, "score", path, ewhere), path, ewhere + ".score");
    t.entries.push_back(d);
  }
  try {
    t.validate();
  } catch (const Error& e) {
    schema_fail(path, ctx, e.what());
  }
  return t;
}

json timeline_to_json(const DetectionTimeline& t) {
  json entries = json::array();
  for (const Detection& d : t.entries) {
    entries.push_back({{"frame", d.frame},
                       {"bbox", json::array({d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h})},
                       {"score", d.score}});
  }
  return {{"query_id", t.query_id}, {"query_frame", t.query_frame}, {"entries", entries}};
}

void put_u32_le(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                                  static_cast<unsigned char>((v >> 8) & 0xff),
                                  static_cast<unsigned char>((v >> 16) & 0xff),
                                  static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  const json j = parse_file(path);
  CameraIntrinsics intr;
  const std::string model = require_string(require_field(j, "model", path, "intrinsics"), path,
                                           "intrinsics.model");
  if (model == "pinhole") {
    intr.model = CameraModel::Pinhole;
  } else if (model == "radial_fisheye") {
    intr.model = CameraModel::RadialFisheye;
  } else {
    schema_fail(path, "intrinsics.model", "expected 'pinhole' or 'radial_fisheye'");
  }
  intr.fx = require_number(require_field(j, "fx", path, "intrinsics"), path, "intrinsics.fx");
  intr.fy = require_number(require_field(j, "fy", path, "intrinsics"), path, "intrinsics.fy");
  intr.cx = require_number(require_field(j, "cx", path, "intrinsics"), path, "intrinsics.cx");
  intr.cy = require_number(require_field(j, "cy", path, "intrinsics"), path, "intrinsics.cy");
  intr.k1 = require_number(require_field(j, "k1", path, "intrinsics"), path, "intrinsics.k1");
  intr.k2 = require_number(require_field(j, "k2", path, "intrinsics"), path, "intrinsics.k2");
  intr.width = require_int(require_field(j, "width", path, "intrinsics"), path, "intrinsics.width");
  intr.height =
      require_int(require_field(j, "height", path, "intrinsics"), path, "intrinsics.height");
  try {
    intr.validate();
  } catch (const Error& e) {
    schema_fail(path, "intrinsics", e.what());
  }
  return intr;
}

void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr) {
  const json j = {
      {"model", intr.model == CameraModel::Pinhole ? "pinhole" : "radial_fisheye"},
      {"fx", intr.fx},
      {"fy", intr.fy},
      {"cx", intr.cx},
      {"cy", intr.cy},
      {"k1", intr.k1},
      {"k2", intr.k2},
      {"width", intr.width},
      {"height", intr.height},
  };
  write_file(path, j);
}

PoseMap load_poses(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_object()) schema_fail(path, "poses", "expected an object keyed by frame index");
  PoseMap poses;
  for (const auto& [key, value] : j.items()) {
    const int frame = parse_frame_key(key, path, "poses");
    if (value.is_null()) {
      poses[frame] = std::nullopt;
    } else {
      poses[frame] = require_pose16(value, path, "poses['" + key + "']");
    }
  }
  return poses;
}

void save_poses(const std::filesystem::path& path, const PoseMap& poses) {
  json j = json::object();
  for (const auto& [frame, pose] : poses) {
    if (pose.has_value()) {
      j[std::to_string(frame)] = pose_to_json(*pose);
    } else {
      j[std::to_string(frame)] = nullptr;
    }
  }
  write_file(path, j);
}

std::vector<DetectionTimeline> load_detections(const std::filesystem::path& path) {
  const json j = parse_file(path);
  std::vector<DetectionTimeline> out;
  if (j.is_object()) {
    out.push_back(parse_timeline(j, path, "detections"));
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(parse_timeline(j[i], path, "detections[" + std::to_string(i) + "]"));
    }
  } else {
    schema_fail(path, "detections", "expected an object or an array of objects");
  }
  return out;
}

void save_detections(const std::filesystem::path& path,
                     const std::vector<DetectionTimeline>& timelines) {
  json j = json::array();
  for (const DetectionTimeline& t : timelines) j.push_back(timeline_to_json(t));
  write_file(path, j);
}

DepthProvider DepthSpec::provider() const {
  if (mode == Mode::Scalar) return DepthProvider::scalar(values);
  return DepthProvider::dense(dir);
}

std::map<std::string, DepthSpec> load_depths(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_object()) schema_fail(path, "depths", "expected an object keyed by query id");
  std::map<std::string, DepthSpec> out;
  for (const auto& [query_id, spec] : j.items()) {
    const std::string where = "depths['" + query_id + "']";
    DepthSpec d;
    const std::string mode =
        require_string(require_field(spec, "mode", path, where), path, where + ".mode");
    if (mode == "scalar") {
      d.mode = DepthSpec::Mode::Scalar;
      const json& values = require_field(spec, "values", path, where);
      if (!values.is_object()) schema_fail(path, where + ".values", "expected an object");
      for (const auto& [key, value] : values.items()) {
        const int frame = parse_frame_key(key, path, where + ".values");
        d.values[frame] = require_number(value, path, where + ".values['" + key + "']");
      }
    } else if (mode == "map") {
      d.mode = DepthSpec::Mode::Map;
      const std::filesystem::path dir =
          require_string(require_field(spec, "dir", path, where), path, where + ".dir");
      d.dir = dir.is_absolute() ? dir : path.parent_path() / dir;
    } else {
      schema_fail(path, where + ".mode", "expected 'scalar' or 'map'");
    }
    out.emplace(query_id, std::move(d));
  }
  return out;
}

void save_depths(const std::filesystem::path& path,
                 const std::map<std::string, DepthSpec>& depths) {
  json j = json::object();
  for (const auto& [query_id, spec] : depths) {
    if (spec.mode == DepthSpec::Mode::Scalar) {
      json values = json::object();
      for (const auto& [frame, depth] : spec.values) values[std::to_string(frame)] = depth;
      j[query_id] = {{"mode", "scalar"}, {"values", values}};
    } else {
      j[query_id] = {{"mode", "map"}, {"dir", spec.dir.string()}};
    }
  }
  write_file(path, j);
}

std::vector<GroundTruth> load_gt(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_array()) schema_fail(path, "gt", "expected an array");
  std::vector<GroundTruth> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "gt[" + std::to_string(i) + "]";
    const json& e = j[i];
    GroundTruth gt;
    gt.query_id =
        require_string(require_field(e, "query_id", path, where), path, where + ".query_id");
    gt.scene_id =
        require_string(require_field(e, "scene_id", path, where), path, where + ".scene_id");
    gt.object_world = WorldPoint::from(
        require_vec3(require_field(e, "object_world", path, where), path, where + ".object_world"));
    const json& pose = require_field(e, "query_pose", path, where);
    if (!pose.is_null()) {
      gt.query_pose = require_pose16(pose, path, where + ".query_pose");
    }
    out.push_back(std::move(gt));
  }
  return out;
}

void save_gt(const std::filesystem::path& path, const std::vector<GroundTruth>& gts) {
  json j = json::array();
  for (const GroundTruth& gt : gts) {
    json e = {{"query_id", gt.query_id},
              {"scene_id", gt.scene_id},
              {"object_world", vec3_to_json(gt.object_world.vec())}};
    e["query_pose"] = gt.query_pose.has_value() ? pose_to_json(*gt.query_pose) : json(nullptr);
    j.push_back(std::move(e));
  }
  write_file(path, j);
}

std::vector<LocalizationResult> load_results(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_array()) schema_fail(path, "results", "expected an array");
  std::vector<LocalizationResult> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "results[" + std::to_string(i) + "]";
    const json& e = j[i];
    LocalizationResult r;
    r.query_id =
        require_string(require_field(e, "query_id", path, where), path, where + ".query_id");
    r.status = localize_status_from_name(
        require_string(require_field(e, "status", path, where), path, where + ".status"));
    if (e.contains("world_point") && !e.at("world_point").is_null()) {
      r.world_point =
          WorldPoint::from(require_vec3(e.at("world_point"), path, where + ".world_point"));
    }
    if (e.contains("displacement") && !e.at("displacement").is_null()) {
      r.displacement = require_vec3(e.at("displacement"), path, where + ".displacement");
    }
    if ((r.status == LocalizeStatus::Ok) != r.displacement.has_value()) {
      schema_fail(path, where, "displacement must be present exactly for status 'ok'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_results(const std::filesystem::path& path,
                  const std::vector<LocalizationResult>& results) {
  json j = json::array();
  for (const LocalizationResult& r : results) {
    json e = {{"query_id", r.query_id}, {"status", localize_status_name(r.status)}};
    if (r.world_point.has_value()) e["world_point"] = vec3_to_json(r.world_point->vec());
    if (r.displacement.has_value()) e["displacement"] = vec3_to_json(*r.displacement);
    j.push_back(std::move(e));
  }
  write_file(path, j);
}

namespace {

json stats_to_json(const MetricStats& s) {
  return {{"qwp", s.qwp},
          {"success", s.success},
          {"success_star", s.success_star},
          {"l2_rmse", s.l2_rmse},
          {"angle_mean", s.angle_mean},
          {"n_total", s.n_total},
          {"n_posed", s.n_posed},
          {"n_success", s.n_success}};
}

}  // namespace

void save_report(const std::filesystem::path& path, const EvalReport& report) {
  json j = stats_to_json(report);
  json per_scene = json::object();
  for (const auto& [scene_id, stats] : report.per_scene) {
    per_scene[scene_id] = stats_to_json(stats);
  }
  j["per_scene"] = per_scene;
  write_file(path, j);
}

std::vector<AnchorPair> load_anchors(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_array()) schema_fail(path, "anchors", "expected an array");
  std::vector<AnchorPair> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "anchors[" + std::to_string(i) + "]";
    const json& e = j[i];
    AnchorPair a;
    a.frame = require_int(require_field(e, "frame", path, where), path, where + ".frame");
    a.local_center = require_vec3(require_field(e, "local_center", path, where), path,
                                  where + ".local_center");
    a.world_center = require_vec3(require_field(e, "world_center", path, where), path,
                                  where + ".world_center");
    out.push_back(a);
  }
  return out;
}

void save_anchors(const std::filesystem::path& path, const std::vector<AnchorPair>& anchors) {
  json j = json::array();
  for (const AnchorPair& a : anchors) {
    j.push_back({{"frame", a.frame},
                 {"local_center", vec3_to_json(a.local_center)},
                 {"world_center", vec3_to_json(a.world_center)}});
  }
  write_file(path, j);
}

Sim3 load_sim3(const std::filesystem::path& path) {
  const json j = parse_file(path);
  Sim3 t;
  t.scale = require_number(require_field(j, "scale", path, "sim3"), path, "sim3.scale");
  const json& rot = require_field(j, "rotation", path, "sim3");
  if (!rot.is_array() || rot.size() != 9) {
    schema_fail(path, "sim3.rotation", "expected an array of 9 numbers");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      t.rotation(r, c) =
          require_number(rot[3 * r + c], path, "sim3.rotation[" + std::to_string(3 * r + c) + "]");
    }
  }
  t.translation =
      require_vec3(require_field(j, "translation", path, "sim3"), path, "sim3.translation");
  try {
    t.validate();
  } catch (const Error& e) {
    schema_fail(path, "sim3", e.what());
  }
  return t;
}

void save_sim3(const std::filesystem::path& path, const Sim3& t) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
  }
  const json j = {
      {"scale", t.scale}, {"rotation", rot}, {"translation", vec3_to_json(t.translation)}};
  write_file(path, j);
}

SyntheticScene load_scene(const std::filesystem::path& path) {
  const json j = parse_file(path);
  SyntheticScene scene;
  scene.seed = require_field(j, "seed", path, "scene").get<std::uint64_t>();
  const json& ij = require_field(j, "intrinsics", path, "scene");
  scene.intr.model = require_string(require_field(ij, "model", path, "scene.intrinsics"), path,
                                    "scene.intrinsics.model") == "pinhole"
                         ? CameraModel::Pinhole
                         : CameraModel::RadialFisheye;
  scene.intr.fx = require_number(require_field(ij, "fx", path, "scene.intrinsics"), path, "fx");
  scene.intr.fy = require_number(require_field(ij, "fy", path, "scene.intrinsics"), path, "fy");
  scene.intr.cx = require_number(require_field(ij, "cx", path, "scene.intrinsics"), path, "cx");
  scene.intr.cy = require_number(require_field(ij, "cy", path, "scene.intrinsics"), path, "cy");
  scene.intr.k1 = require_number(require_field(ij, "k1", path, "scene.intrinsics"), path, "k1");
  scene.intr.k2 = require_number(require_field(ij, "k2", path, "scene.intrinsics"), path, "k2");
  scene.intr.width =
      require_int(require_field(ij, "width", path, "scene.intrinsics"), path, "width");
  scene.intr.height =
      require_int(require_field(ij, "height", path, "scene.intrinsics"), path, "height");

  const json& objects = require_field(j, "objects", path, "scene");
  if (!objects.is_object()) schema_fail(path, "scene.objects", "expected an object");
  for (const auto& [name, value] : objects.items()) {
    scene.objects[name] =
        WorldPoint::from(require_vec3(value, path, "scene.objects['" + name + "']"));
  }

  const json& trajectory = require_field(j, "trajectory", path, "scene");
  if (!trajectory.is_array()) schema_fail(path, "scene.trajectory", "expected an array");
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    scene.trajectory.push_back(
        require_pose16(trajectory[i], path, "scene.trajectory[" + std::to_string(i) + "]"));
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const SyntheticScene& scene) {
  json objects = json::object();
  for (const auto& [name, point] : scene.objects) objects[name] = vec3_to_json(point.vec());
  json trajectory = json::array();
  for (const Pose& pose : scene.trajectory) trajectory.push_back(pose_to_json(pose));
  const json j = {
      {"seed", scene.seed},
      {"intrinsics",
       {{"model", scene.intr.model == CameraModel::Pinhole ? "pinhole" : "radial_fisheye"},
        {"fx", scene.intr.fx},
        {"fy", scene.intr.fy},
        {"cx", scene.intr.cx},
        {"cy", scene.intr.cy},
        {"k1", scene.intr.k1},
        {"k2", scene.intr.k2},
        {"width", scene.intr.width},
        {"height", scene.intr.height}}},
      {"objects", objects},
      {"trajectory", trajectory},
  };
  write_file(path, j);
}

DepthMap read_depth_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(header, "DPTH", 4) != 0) {
    throw Error(ErrorCode::SchemaError, path.string() + ": bad depth map magic");
  }
  DepthMap map;
  map.width = static_cast<int>(get_u32_le(header + 4));
  map.height = static_cast<int>(get_u32_le(header + 8));
  if (map.width <= 0 || map.height <= 0 || map.width > 1 << 16 || map.height > 1 << 16) {
    throw Error(ErrorCode::SchemaError, path.string() + ": implausible depth map dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(map.width) * map.height;
  map.values.resize(count);
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw Error(ErrorCode::SchemaError, path.string() + ": truncated depth map");
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = get_u32_le(raw.data() + 4 * i);
    float value;
    std::memcpy(&value, &bits, sizeof(value));
    map.values[i] = value;
  }
  return map;
}

void write_depth_map(const std::filesystem::path& path, const DepthMap& map) {
  if (map.width <= 0 || map.height <= 0 ||
      map.values.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw Error(ErrorCode::InvalidArgument, "inconsistent depth map dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write("DPTH", 4);
  put_u32_le(out, static_cast<std::uint32_t>(map.width));
  put_u32_le(out, static_cast<std::uint32_t>(map.height));
  put_u32_le(out, 0);
  for (const float value : map.values) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    put_u32_le(out, bits);
  }
}

}  // namespace egoloc
