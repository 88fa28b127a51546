#include "declutter/policy.hpp"

#include <algorithm>

#include "declutter/errors.hpp"
#include "declutter/rng.hpp"

namespace declutter::policy {

const char* to_string(Rationale r) {
  switch (r) {
    case Rationale::global_low: return "global_low";
    case Rationale::local_low: return "local_low";
    case Rationale::all_local_high: return "all_local_high";
    case Rationale::failure_override: return "failure_override";
  }
  return "";
}

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::grasp: return "grasp";
    case ActionKind::push: return "push";
    case ActionKind::noop: return "noop";
  }
  return "";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::workspace_empty: return "workspace_empty";
    case Termination::max_attempts: return "max_attempts";
    case Termination::no_candidates: return "no_candidates";
  }
  return "";
}

std::optional<Rationale> rationale_from_string(const std::string& s) {
  for (const Rationale r :
       {Rationale::global_low, Rationale::local_low, Rationale::all_local_high, Rationale::failure_override})
    if (s == to_string(r)) return r;
  return std::nullopt;
}

std::optional<ActionKind> action_from_string(const std::string& s) {
  for (const ActionKind k : {ActionKind::grasp, ActionKind::push, ActionKind::noop})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::optional<Termination> termination_from_string(const std::string& s) {
  for (const Termination t : {Termination::workspace_empty, Termination::max_attempts, Termination::no_candidates})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

int EpisodeLog::grasp_attempts() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(),
                                        [](const AttemptRecord& r) { return r.action == ActionKind::grasp; }));
}

namespace {

std::size_t gdi_best(const std::vector<GraspPose>& poses) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < poses.size(); ++i)
    if (poses[i].gdi > poses[best].gdi) best = i;
  return best;
}

std::size_t least_cluttered(const std::vector<GraspPose>& poses) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < poses.size(); ++i)
    if (poses[i].local_clutter < poses[best].local_clutter) best = i;
  return best;
}

}  // namespace

Decision decide_action(double global, const std::vector<GraspPose>& top_poses, int failure_count,
                       const PolicyThresholds& th) {
  if (top_poses.empty()) throw std::invalid_argument("decide_action: no grasp poses");
  const std::size_t best = gdi_best(top_poses);
  if (failure_count >= th.failure_limit)
    return {ActionKind::push, Rationale::failure_override, top_poses[best], best};
  if (global < th.t_global) return {ActionKind::grasp, Rationale::global_low, top_poses[best], best};
  const std::size_t calm = least_cluttered(top_poses);
  if (top_poses[calm].local_clutter < th.t_local)
    return {ActionKind::grasp, Rationale::local_low, top_poses[calm], calm};
  return {ActionKind::push, Rationale::all_local_high, top_poses[best], best};
}

EpisodeLog run_episode(const sim::Scene& initial, const EpisodeConfig& config, std::uint64_t seed) {
  EpisodeLog log;
  log.seed = seed;
  log.initial_objects = static_cast<int>(initial.objects.size());
  const int max_attempts = config.max_attempts_factor * log.initial_objects;
  const double opening_px = config.opening_px();

  sim::Scene scene = initial;
  const DepthImage bg = sim::background(scene, config.camera);
  int failures = 0;
  bool push_blocked = false;

  for (int attempt = 0;; ++attempt) {
    const sim::RenderedView view = sim::render(scene, config.camera, config.render);
    const BinaryMask mask = grasp::depth_filter(view.depth, bg, config.depth_delta);
    const double area = grasp::estimate_area_spread(mask);
    if (area == 0.0) {
      log.termination = Termination::workspace_empty;
      break;
    }
    if (attempt >= max_attempts) {
      log.termination = Termination::max_attempts;
      break;
    }

    const clutter::ClutterMap map = clutter::compute_clutter_map(view.rgb, config.fcm);
    const double g = clutter::global_score(map);

    AttemptRecord rec;
    rec.objects_before = static_cast<int>(scene.objects.size());
    rec.global_score = g;
    switch (config.k_mode) {
      case KMode::fixed: rec.k_used = config.k_fixed; break;
      case KMode::exact: rec.k_used = std::max(1, rec.objects_before); break;
      case KMode::estimate: rec.k_used = grasp::estimate_k(area, g, config.k_model); break;
    }

    grasp::PlanInputs in;
    in.k = rec.k_used;
    in.gdi = config.gdi;
    in.opening_px = opening_px;
    in.n_top = config.thresholds.n_top;
    in.seed = mix_seed(seed, static_cast<std::uint64_t>(attempt));
    in.depth_delta = config.depth_delta;
    std::vector<GraspPose> poses = grasp::plan_grasps_with_k(view.depth, mask, in);
    if (poses.empty()) {
      log.termination = Termination::no_candidates;
      break;
    }
    for (GraspPose& p : poses) p.local_clutter = clutter::local_score(map, p.center, opening_px);

    Decision d;
    if (config.use_clutter_policy) {
      d = decide_action(g, poses, failures, config.thresholds);
      rec.rationale = d.rationale;
      if (d.kind == ActionKind::push && push_blocked) {
        // The previous push found no entry and nothing has moved since.
        d.kind = ActionKind::grasp;
        d.target_index = 0;
        for (std::size_t i = 1; i < poses.size(); ++i)
          if (poses[i].local_clutter < poses[d.target_index].local_clutter) d.target_index = i;
        d.target = poses[d.target_index];
        if (d.rationale == Rationale::failure_override) failures = 0;
        rec.events.push_back("push_blocked");
      }
    } else {
      d = {ActionKind::grasp, Rationale::global_low, poses.front(), 0};
    }
    rec.local_score_of_target = d.target.local_clutter;
    rec.target_gdi = d.target.gdi;

    if (d.kind == ActionKind::grasp) {
      rec.action = ActionKind::grasp;
      Rng exec_rng(mix_seed(in.seed, 0x6a));
      sim::GraspError err;
      err.offset = {config.grasp_sigma_xy * exec_rng.normal(), config.grasp_sigma_xy * exec_rng.normal()};
      err.angle = config.grasp_sigma_angle * exec_rng.normal();
      sim::GraspResult gr = sim::attempt_grasp(scene, d.target, config.gripper, config.camera, err);
      rec.grasp_success = gr.outcome.success;
      rec.multi_pick = gr.outcome.multi_pick;
      rec.picked = static_cast<int>(gr.outcome.picked_ids.size());
      rec.failure = gr.outcome.failure_reason;
      failures = gr.outcome.success ? 0 : failures + 1;
      if (gr.outcome.success) push_blocked = false;
      scene = std::move(gr.scene);
    } else {
      // Fallback chain: the chosen ROI, then the remaining ranked poses.
      std::vector<std::size_t> order{d.target_index};
      for (std::size_t i = 0; i < poses.size(); ++i)
        if (i != d.target_index) order.push_back(i);
      bool pushed = false;
      for (const std::size_t i : order) {
        try {
          const PushAction action = push::plan_push(view.depth, mask, poses[i].center, config.push);
          sim::PushResult pr = sim::apply_push(scene, action, config.gripper, config.camera);
          for (const int id : pr.events.clamped_ids) rec.events.push_back("clamped:" + std::to_string(id));
          if (pr.events.stalled) rec.events.push_back("stalled");
          scene = std::move(pr.scene);
          pushed = true;
          break;
        } catch (const NoEntryPoint&) {
          rec.events.push_back("no_entry");
        } catch (const NonConvergence&) {
          rec.events.push_back("non_convergence");
        }
      }
      rec.action = pushed ? ActionKind::push : ActionKind::noop;
      push_blocked = !pushed;
      // The override push consumes the failure streak; ordinary pushes keep it.
      if (d.rationale == Rationale::failure_override) failures = 0;
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

}  // namespace declutter::policy
