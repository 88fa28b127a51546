#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "declutter/clutter.hpp"
#include "declutter/grasp.hpp"
#include "declutter/push.hpp"
#include "declutter/simscene.hpp"

namespace declutter::policy {

struct PolicyThresholds {
  double t_global = 0.019;
  double t_local = 0.107;
  int n_top = 3;
  int failure_limit = 3;
  bool valid() const { return t_global > 0 && t_local > 0 && n_top >= 1 && failure_limit >= 1; }
};

enum class Rationale { global_low, local_low, all_local_high, failure_override };
enum class ActionKind { grasp, push, noop };

const char* to_string(Rationale r);
const char* to_string(ActionKind k);
std::optional<Rationale> rationale_from_string(const std::string& s);
std::optional<ActionKind> action_from_string(const std::string& s);

struct Decision {
  ActionKind kind = ActionKind::grasp;
  Rationale rationale = Rationale::global_low;
  /// Pose to grasp, or whose clutter ROI the push should disperse.
  GraspPose target;
  std::size_t target_index = 0;
};

/// Push-or-grasp rule. `top_poses` are ranked by GDI and carry their local
/// clutter scores; it must not be empty.
Decision decide_action(double global, const std::vector<GraspPose>& top_poses, int failure_count,
                       const PolicyThresholds& th);

enum class KMode { fixed, exact, estimate };

/// Everything an episode needs.
struct EpisodeConfig {
  bool use_clutter_policy = true;
  KMode k_mode = KMode::estimate;
  int k_fixed = 10;
  grasp::KModel k_model;
  grasp::GdiParams gdi;
  sim::GripperParams gripper;
  sim::CameraModel camera = sim::CameraModel::covering(sim::Workspace{});
  sim::RenderOptions render;
  clutter::FcmParams fcm;
  PolicyThresholds thresholds;
  push::PushParams push;
  double depth_delta = 0.01;
  int max_attempts_factor = 3;
  /// Standard deviations of the executed grasp's position (m) and angle (rad)
  /// around the planned pose.
  double grasp_sigma_xy = 0.002;
  double grasp_sigma_angle = 3.0 * std::numbers::pi / 180.0;

  double opening_px() const { return camera.to_pixels(gripper.opening); }
};

struct AttemptRecord {
  int objects_before = 0;
  ActionKind action = ActionKind::grasp;
  std::optional<Rationale> rationale;  // empty when the clutter policy is off
  bool grasp_success = false;
  bool multi_pick = false;
  int picked = 0;
  sim::FailureReason failure = sim::FailureReason::none;
  double global_score = 0.0;
  double local_score_of_target = 0.0;
  int k_used = 0;
  double target_gdi = 0.0;
  std::vector<std::string> events;
  friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

enum class Termination { workspace_empty, max_attempts, no_candidates };
const char* to_string(Termination t);
std::optional<Termination> termination_from_string(const std::string& s);

struct EpisodeLog {
  std::uint64_t seed = 0;
  int initial_objects = 0;
  std::vector<AttemptRecord> records;
  Termination termination = Termination::workspace_empty;

  int grasp_attempts() const;
  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

EpisodeLog run_episode(const sim::Scene& initial, const EpisodeConfig& config, std::uint64_t seed);

}  // namespace declutter::policy
