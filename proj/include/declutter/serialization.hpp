#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "declutter/clutter.hpp"
#include "declutter/experiment.hpp"
#include "declutter/grasp.hpp"
#include "declutter/policy.hpp"
#include "declutter/push.hpp"
#include "declutter/simscene.hpp"

namespace declutter::io {

using nlohmann::json;

json to_json(const sim::Scene& scene);
sim::Scene scene_from_json(const json& j);

json to_json(const grasp::KModel& model);
grasp::KModel k_model_from_json(const json& j);

/// {cx, cy, angle_deg, opening_px, gdi}
json to_json(const GraspPose& pose);
json poses_to_json(const std::vector<GraspPose>& poses);

/// {start:[x,y], end:[x,y], entry_depth}
json to_json(const PushAction& action);
PushAction push_action_from_json(const json& j);

json to_json(const policy::AttemptRecord& rec);
policy::AttemptRecord attempt_from_json(const json& j);

/// One JSON object per attempt followed by a summary line
/// {"summary": {...}} per episode.
std::string episodes_to_jsonl(const std::vector<policy::EpisodeLog>& logs);
std::vector<policy::EpisodeLog> episodes_from_jsonl(const std::string& text);

/// Experiment configuration. Missing keys keep their defaults; unknown keys
/// and type errors raise ConfigError.
exp::ExperimentConfig config_from_json(const json& j);
json to_json(const exp::ExperimentConfig& config);

/// Depth scaled by 10000 into 16 bits.
void write_depth_pgm(const std::filesystem::path& path, const DepthImage& depth);

/// Field written as 16-bit PGM scaled so its maximum maps to 65535, with a
/// sidecar {scale, min, max, global_score} next to it (".json").
void write_scaled_field(const std::filesystem::path& path, const GrayImage& field, double global_score);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace declutter::io
