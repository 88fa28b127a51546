#include "declutter/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "declutter/errors.hpp"

namespace declutter::io {

namespace {

json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }
Rgb rgb_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

json to_json(const sim::Scene& scene) {
  json objs = json::array();
  for (const sim::SceneObject& o : scene.objects) {
    json shape;
    if (o.shape.kind == sim::Shape::Kind::circle) {
      shape = {{"type", "circle"}, {"radius", o.shape.radius}};
    } else {
      json verts = json::array();
      for (const geom::Vec2 v : o.shape.vertices) verts.push_back({v.x, v.y});
      shape = {{"type", "polygon"}, {"vertices", verts}};
    }
    objs.push_back({{"id", o.id},
                    {"shape", shape},
                    {"pose", {{"x", o.pose.x}, {"y", o.pose.y}, {"yaw", o.pose.yaw}}},
                    {"height", o.height},
                    {"color", rgb_json(o.color)}});
  }
  const auto& w = scene.workspace;
  return {{"workspace", {{"x_min", w.x_min}, {"y_min", w.y_min}, {"x_max", w.x_max}, {"y_max", w.y_max}}},
          {"table_depth", scene.table_depth},
          {"rng_seed", scene.rng_seed},
          {"objects", objs}};
}

sim::Scene scene_from_json(const json& j) {
  sim::Scene s;
  const json& w = j.at("workspace");
  s.workspace = {w.at("x_min").get<double>(), w.at("y_min").get<double>(), w.at("x_max").get<double>(),
                 w.at("y_max").get<double>()};
  s.table_depth = j.at("table_depth").get<double>();
  s.rng_seed = j.value("rng_seed", std::uint64_t{0});
  for (const json& o : j.at("objects")) {
    sim::SceneObject obj;
    obj.id = o.at("id").get<int>();
    const json& sh = o.at("shape");
    if (sh.at("type").get<std::string>() == "circle") {
      obj.shape = sim::Shape::circle(sh.at("radius").get<double>());
    } else {
      // Vertices are stored already centred; keep them verbatim.
      for (const json& v : sh.at("vertices")) obj.shape.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    const json& p = o.at("pose");
    obj.pose = {p.at("x").get<double>(), p.at("y").get<double>(), p.at("yaw").get<double>()};
    obj.height = o.at("height").get<double>();
    obj.color = rgb_from(o.at("color"));
    if (!obj.shape.valid()) throw ConfigError("scene: object " + std::to_string(obj.id) + " is not convex CCW");
    if (!(obj.height > 0.0)) throw ConfigError("scene: object height must be positive");
    s.objects.push_back(std::move(obj));
  }
  return s;
}

json to_json(const grasp::KModel& model) {
  return {{"beta", {model.beta[0], model.beta[1], model.beta[2]}}, {"k_max", model.k_max}};
}

grasp::KModel k_model_from_json(const json& j) {
  grasp::KModel m;
  const json& b = j.at("beta");
  for (int i = 0; i < 3; ++i) m.beta[i] = b.at(i).get<double>();
  m.k_max = j.value("k_max", 25);
  return m;
}

json to_json(const GraspPose& pose) {
  return {{"cx", pose.center.x},
          {"cy", pose.center.y},
          {"angle_deg", pose.angle * 180.0 / std::numbers::pi},
          {"opening_px", pose.opening_px},
          {"gdi", pose.gdi}};
}

json poses_to_json(const std::vector<GraspPose>& poses) {
  json arr = json::array();
  for (const GraspPose& p : poses) arr.push_back(to_json(p));
  return arr;
}

json to_json(const PushAction& a) {
  return {{"start", {a.start.x, a.start.y}}, {"end", {a.end.x, a.end.y}}, {"entry_depth", a.entry_depth}};
}

PushAction push_action_from_json(const json& j) {
  return {{j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()},
          {j.at("end").at(0).get<double>(), j.at("end").at(1).get<double>()},
          j.at("entry_depth").get<double>()};
}

json to_json(const policy::AttemptRecord& r) {
  json j{{"objects_before", r.objects_before},
         {"action", policy::to_string(r.action)},
         {"rationale", r.rationale ? json(policy::to_string(*r.rationale)) : json(nullptr)},
         {"grasp_success", r.grasp_success},
         {"multi_pick", r.multi_pick},
         {"picked", r.picked},
         {"failure", sim::to_string(r.failure)},
         {"global_score", r.global_score},
         {"local_score_of_target", r.local_score_of_target},
         {"k_used", r.k_used},
         {"target_gdi", r.target_gdi},
         {"events", r.events}};
  return j;
}

policy::AttemptRecord attempt_from_json(const json& j) {
  policy::AttemptRecord r;
  r.objects_before = j.at("objects_before").get<int>();
  const auto action = policy::action_from_string(j.at("action").get<std::string>());
  if (!action) throw Error("log: unknown action");
  r.action = *action;
  if (!j.at("rationale").is_null()) r.rationale = policy::rationale_from_string(j.at("rationale").get<std::string>());
  r.grasp_success = j.at("grasp_success").get<bool>();
  r.multi_pick = j.at("multi_pick").get<bool>();
  r.picked = j.at("picked").get<int>();
  const std::string f = j.at("failure").get<std::string>();
  for (const auto fr : {sim::FailureReason::none, sim::FailureReason::collision, sim::FailureReason::too_wide,
                        sim::FailureReason::empty_jaws, sim::FailureReason::slip})
    if (f == sim::to_string(fr)) r.failure = fr;
  r.global_score = j.at("global_score").get<double>();
  r.local_score_of_target = j.at("local_score_of_target").get<double>();
  r.k_used = j.at("k_used").get<int>();
  r.target_gdi = j.at("target_gdi").get<double>();
  r.events = j.at("events").get<std::vector<std::string>>();
  return r;
}

std::string episodes_to_jsonl(const std::vector<policy::EpisodeLog>& logs) {
  std::string out;
  for (const policy::EpisodeLog& log : logs) {
    for (const policy::AttemptRecord& r : log.records) {
      json j = to_json(r);
      j["seed"] = log.seed;
      out += j.dump();
      out += '\n';
    }
    const json summary{{"summary",
                        {{"seed", log.seed},
                         {"initial_objects", log.initial_objects},
                         {"attempts", log.records.size()},
                         {"grasp_attempts", log.grasp_attempts()},
                         {"termination", policy::to_string(log.termination)}}}};
    out += summary.dump();
    out += '\n';
  }
  return out;
}

std::vector<policy::EpisodeLog> episodes_from_jsonl(const std::string& text) {
  std::vector<policy::EpisodeLog> logs;
  policy::EpisodeLog cur;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("summary")) {
      const json& s = j.at("summary");
      cur.seed = s.at("seed").get<std::uint64_t>();
      cur.initial_objects = s.at("initial_objects").get<int>();
      const auto t = policy::termination_from_string(s.at("termination").get<std::string>());
      if (!t) throw Error("log: unknown termination");
      cur.termination = *t;
      logs.push_back(std::move(cur));
      cur = {};
    } else {
      cur.records.push_back(attempt_from_json(j));
    }
  }
  return logs;
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string("config: '") + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
  }
}

}  // namespace

exp::ExperimentConfig config_from_json(const json& j) {
  exp::ExperimentConfig c;
  check_keys(j,
             {"variant", "trials", "max_objects", "seeds", "durations", "gdi", "gripper", "thresholds", "push",
              "fcm", "k_model", "k_fixed", "k_mode", "workspace", "table_depth", "camera_scale", "depth_delta",
              "max_attempts_factor", "depth_noise", "grasp_sigma_xy", "grasp_sigma_angle_deg", "heap_max_gap"},
             "root");
  if (j.contains("variant")) {
    const auto v = exp::variant_from_string(j.at("variant").get<std::string>());
    if (!v) throw ConfigError("config: unknown variant");
    c.variant = *v;
  }
  exp::apply_variant(c.episode, c.variant);
  read_opt(j, "trials", c.trials);
  read_opt(j, "max_objects", c.max_objects);
  read_opt(j, "seeds", c.seeds);
  if (j.contains("durations")) {
    const json& d = j.at("durations");
    check_keys(d, {"t_grasp_s", "t_push_s", "t_perceive_s"}, "durations");
    read_opt(d, "t_grasp_s", c.durations.t_grasp_s);
    read_opt(d, "t_push_s", c.durations.t_push_s);
    read_opt(d, "t_perceive_s", c.durations.t_perceive_s);
  }
  auto& e = c.episode;
  if (j.contains("gdi")) {
    const json& g = j.at("gdi");
    check_keys(g, {"lct", "hct", "finger_width_px", "samples_per_side"}, "gdi");
    read_opt(g, "lct", e.gdi.lct);
    read_opt(g, "hct", e.gdi.hct);
    read_opt(g, "finger_width_px", e.gdi.finger_width_px);
    read_opt(g, "samples_per_side", e.gdi.samples_per_side);
  }
  if (j.contains("gripper")) {
    const json& g = j.at("gripper");
    check_keys(g, {"opening", "finger_span", "finger_thickness", "insert_depth", "grip_margin", "max_grasp_offset"},
               "gripper");
    read_opt(g, "opening", e.gripper.opening);
    read_opt(g, "finger_span", e.gripper.finger_span);
    read_opt(g, "finger_thickness", e.gripper.finger_thickness);
    read_opt(g, "insert_depth", e.gripper.insert_depth);
    read_opt(g, "grip_margin", e.gripper.grip_margin);
    read_opt(g, "max_grasp_offset", e.gripper.max_grasp_offset);
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    check_keys(t, {"t_global", "t_local", "n_top", "failure_limit"}, "thresholds");
    read_opt(t, "t_global", e.thresholds.t_global);
    read_opt(t, "t_local", e.thresholds.t_local);
    read_opt(t, "n_top", e.thresholds.n_top);
    read_opt(t, "failure_limit", e.thresholds.failure_limit);
  }
  if (j.contains("push")) {
    const json& p = j.at("push");
    check_keys(p, {"entry_delta", "step_px", "probe_margin"}, "push");
    read_opt(p, "entry_delta", e.push.entry_delta);
    read_opt(p, "step_px", e.push.step_px);
    read_opt(p, "probe_margin", e.push.probe_margin);
  }
  if (j.contains("fcm")) {
    const json& f = j.at("fcm");
    check_keys(f,
               {"dog_sigma_inner", "dog_sigma_outer", "orientation_sigma", "window_sigma", "color_weight",
                "orientation_weight", "contrast_norm", "color_norm", "orientation_norm"},
               "fcm");
    read_opt(f, "dog_sigma_inner", e.fcm.dog_sigma_inner);
    read_opt(f, "dog_sigma_outer", e.fcm.dog_sigma_outer);
    read_opt(f, "orientation_sigma", e.fcm.orientation_sigma);
    read_opt(f, "window_sigma", e.fcm.window_sigma);
    read_opt(f, "color_weight", e.fcm.color_weight);
    read_opt(f, "orientation_weight", e.fcm.orientation_weight);
    read_opt(f, "contrast_norm", e.fcm.contrast_norm);
    read_opt(f, "color_norm", e.fcm.color_norm);
    read_opt(f, "orientation_norm", e.fcm.orientation_norm);
  }
  if (j.contains("k_model")) {
    try {
      e.k_model = k_model_from_json(j.at("k_model"));
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("config: bad k_model: ") + ex.what());
    }
  }
  read_opt(j, "k_fixed", e.k_fixed);
  if (j.contains("k_mode")) {
    const std::string m = j.at("k_mode").get<std::string>();
    if (m == "fixed") e.k_mode = policy::KMode::fixed;
    else if (m == "exact") e.k_mode = policy::KMode::exact;
    else if (m == "estimate") e.k_mode = policy::KMode::estimate;
    else throw ConfigError("config: unknown k_mode " + m);
  }
  if (j.contains("workspace")) {
    const json& w = j.at("workspace");
    check_keys(w, {"x_min", "y_min", "x_max", "y_max"}, "workspace");
    read_opt(w, "x_min", c.heap.workspace.x_min);
    read_opt(w, "y_min", c.heap.workspace.y_min);
    read_opt(w, "x_max", c.heap.workspace.x_max);
    read_opt(w, "y_max", c.heap.workspace.y_max);
  }
  read_opt(j, "table_depth", c.heap.table_depth);
  read_opt(j, "heap_max_gap", c.heap.max_gap);
  double scale = e.camera.scale;
  read_opt(j, "camera_scale", scale);
  e.camera = sim::CameraModel::covering(c.heap.workspace, scale);
  read_opt(j, "depth_delta", e.depth_delta);
  read_opt(j, "max_attempts_factor", e.max_attempts_factor);
  read_opt(j, "depth_noise", e.render.depth_noise);
  read_opt(j, "grasp_sigma_xy", e.grasp_sigma_xy);
  if (j.contains("grasp_sigma_angle_deg"))
    e.grasp_sigma_angle = j.at("grasp_sigma_angle_deg").get<double>() * std::numbers::pi / 180.0;

  if (c.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (c.max_objects < 1 || c.max_objects > 20) throw ConfigError("config: max_objects must be in [1, 20]");
  if (c.heap.table_depth < 0.50 || c.heap.table_depth > 0.70) throw ConfigError("config: table_depth must be in [0.5, 0.7]");
  if (!e.thresholds.valid()) throw ConfigError("config: invalid policy thresholds");
  if (e.gdi.hct < 0.0 || e.gdi.lct < 0.0 || e.gdi.lct >= 0.5 * e.opening_px())
    throw ConfigError("config: gdi requires 0 <= lct < opening_px/2 and hct >= 0");
  if (c.seeds.empty()) throw ConfigError("config: seeds must not be empty");
  return c;
}

json to_json(const exp::ExperimentConfig& c) {
  const auto& e = c.episode;
  const char* k_mode = e.k_mode == policy::KMode::fixed ? "fixed" : e.k_mode == policy::KMode::exact ? "exact" : "estimate";
  return {{"variant", exp::to_string(c.variant)},
          {"trials", c.trials},
          {"max_objects", c.max_objects},
          {"seeds", c.seeds},
          {"durations",
           {{"t_grasp_s", c.durations.t_grasp_s},
            {"t_push_s", c.durations.t_push_s},
            {"t_perceive_s", c.durations.t_perceive_s}}},
          {"gdi",
           {{"lct", e.gdi.lct},
            {"hct", e.gdi.hct},
            {"finger_width_px", e.gdi.finger_width_px},
            {"samples_per_side", e.gdi.samples_per_side}}},
          {"gripper",
           {{"opening", e.gripper.opening},
            {"finger_span", e.gripper.finger_span},
            {"finger_thickness", e.gripper.finger_thickness},
            {"insert_depth", e.gripper.insert_depth},
            {"grip_margin", e.gripper.grip_margin},
            {"max_grasp_offset", e.gripper.max_grasp_offset}}},
          {"thresholds",
           {{"t_global", e.thresholds.t_global},
            {"t_local", e.thresholds.t_local},
            {"n_top", e.thresholds.n_top},
            {"failure_limit", e.thresholds.failure_limit}}},
          {"push",
           {{"entry_delta", e.push.entry_delta}, {"step_px", e.push.step_px}, {"probe_margin", e.push.probe_margin}}},
          {"fcm",
           {{"dog_sigma_inner", e.fcm.dog_sigma_inner},
            {"dog_sigma_outer", e.fcm.dog_sigma_outer},
            {"orientation_sigma", e.fcm.orientation_sigma},
            {"window_sigma", e.fcm.window_sigma},
            {"color_weight", e.fcm.color_weight},
            {"orientation_weight", e.fcm.orientation_weight},
            {"contrast_norm", e.fcm.contrast_norm},
            {"color_norm", e.fcm.color_norm},
            {"orientation_norm", e.fcm.orientation_norm}}},
          {"k_model", to_json(e.k_model)},
          {"k_fixed", e.k_fixed},
          {"k_mode", k_mode},
          {"workspace",
           {{"x_min", c.heap.workspace.x_min},
            {"y_min", c.heap.workspace.y_min},
            {"x_max", c.heap.workspace.x_max},
            {"y_max", c.heap.workspace.y_max}}},
          {"table_depth", c.heap.table_depth},
          {"heap_max_gap", c.heap.max_gap},
          {"camera_scale", e.camera.scale},
          {"depth_delta", e.depth_delta},
          {"max_attempts_factor", e.max_attempts_factor},
          {"depth_noise", e.render.depth_noise},
          {"grasp_sigma_xy", e.grasp_sigma_xy},
          {"grasp_sigma_angle_deg", e.grasp_sigma_angle * 180.0 / std::numbers::pi}};
}

void write_depth_pgm(const std::filesystem::path& path, const DepthImage& depth) {
  Image<std::uint16_t> img(depth.width(), depth.height());
  for (std::size_t i = 0; i < depth.size(); ++i)
    img.pixels()[i] = static_cast<std::uint16_t>(std::clamp(std::lround(depth.pixels()[i] * 10000.0), 0L, 65535L));
  write_pgm16(path, img);
}

void write_scaled_field(const std::filesystem::path& path, const GrayImage& field, double global_score) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const double v : field.pixels()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > 0.0 ? 65535.0 / hi : 1.0;
  Image<std::uint16_t> img(field.width(), field.height());
  for (std::size_t i = 0; i < field.size(); ++i)
    img.pixels()[i] = static_cast<std::uint16_t>(std::clamp(std::lround(field.pixels()[i] * scale), 0L, 65535L));
  write_pgm16(path, img);
  const json side{{"scale", scale}, {"min", lo}, {"max", hi}, {"global_score", global_score}};
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  write_text(sidecar, side.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

}  // namespace declutter::io
