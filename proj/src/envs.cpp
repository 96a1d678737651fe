#include "prefpol/envs.hpp"

#include <algorithm>
#include <cmath>

#include "prefpol/errors.hpp"

namespace prefpol {

namespace {

constexpr int kImageSize = 64;

double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

void check_finite_action(const double* a, int dim) {
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(a[i]))
      throw ConfigError("env_step: non-finite action component");
}

// Arena coordinate in [-1, 1] to pixel column/row.
int to_px(double x) {
  return static_cast<int>(std::lround((x + 1.0) / 2.0 * (kImageSize - 1)));
}

// ---------------------------------------------------------------------------
// PointReach: move a 2-D agent onto a goal marker. State is
// [agent_x, agent_y, goal_x, goal_y]; dense reward is the negative distance
// to the goal after the move.
// ---------------------------------------------------------------------------

class PointReach final : public Env {
 public:
  PointReach() {
    spec_.name = "point_reach";
    spec_.state_dim = 4;
    spec_.action_dim = 2;
    spec_.horizon = 100;
    spec_.success_desc = "agent within 0.05 of the goal";
    spec_.reward_desc = "negative Euclidean distance to the goal";
    spec_.default_task_description = "to move the red agent onto the green goal marker";
  }

  const EnvSpec& spec() const override { return spec_; }

  std::vector<double> reset(Rng& rng) const override {
    double ax = rng.uniform(-1, 1), ay = rng.uniform(-1, 1);
    double gx, gy;
    do {
      gx = rng.uniform(-1, 1);
      gy = rng.uniform(-1, 1);
    } while (std::hypot(gx - ax, gy - ay) < 0.3);
    return {ax, ay, gx, gy};
  }

  StepResult step(const std::vector<double>& s,
                  const double* action) const override {
    check_finite_action(action, 2);
    double ax = clip(action[0], spec_.action_low, spec_.action_high);
    double ay = clip(action[1], spec_.action_low, spec_.action_high);
    double nx = clip(s[0] + ax, -1, 1);
    double ny = clip(s[1] + ay, -1, 1);
    double dist = std::hypot(nx - s[2], ny - s[3]);
    return {{nx, ny, s[2], s[3]}, -dist, dist < 0.05};
  }

  Image render(const std::vector<double>& s) const override {
    Image img(kImageSize, kImageSize, {255, 255, 255});
    draw_disc(img, to_px(s[2]), to_px(s[3]), 4.0, {40, 170, 60});   // goal
    draw_disc(img, to_px(s[0]), to_px(s[1]), 3.0, {210, 40, 40});   // agent
    return img;
  }

  std::vector<double> expert_target(
      const std::vector<double>& s) const override {
    return {s[2], s[3]};
  }

  std::vector<double> corrupt_target(const std::vector<double>& s,
                                     Rng& rng) const override {
    // A plausible-looking but wrong goal, far enough that noise cannot
    // rescue the episode.
    double fx, fy;
    do {
      fx = rng.uniform(-1, 1);
      fy = rng.uniform(-1, 1);
    } while (std::hypot(fx - s[2], fy - s[3]) < 0.3);
    return {fx, fy};
  }

  void expert_action(const std::vector<double>& s,
                     const std::vector<double>& target,
                     double* out) const override {
    out[0] = clip(target[0] - s[0], spec_.action_low, spec_.action_high);
    out[1] = clip(target[1] - s[1], spec_.action_low, spec_.action_high);
  }

 private:
  EnvSpec spec_;
};

// ---------------------------------------------------------------------------
// DrawerPull: a 1-D gripper approaches a handle, auto-grasps within 0.05,
// then pulls the drawer open. State is [gripper_x, handle_x, extension d,
// grasped]. Closed handle position is +0.5, fully open is -0.5.
// ---------------------------------------------------------------------------

constexpr double kHandleClosed = 0.5;
constexpr double kHandleOpen = -0.5;
constexpr double kGraspRadius = 0.05;

class DrawerPull final : public Env {
 public:
  DrawerPull() {
    spec_.name = "drawer_pull";
    spec_.state_dim = 4;
    spec_.action_dim = 1;
    spec_.horizon = 100;
    spec_.success_desc = "drawer extension d > 0.9";
    spec_.reward_desc =
        "-|gripper - handle| while ungrasped, +d per step while grasped";
    spec_.default_task_description =
        "to grasp the drawer handle and pull the drawer fully open";
  }

  const EnvSpec& spec() const override { return spec_; }

  std::vector<double> reset(Rng& rng) const override {
    return {rng.uniform(-1.0, 0.3), kHandleClosed, 0.0, 0.0};
  }

  StepResult step(const std::vector<double>& s,
                  const double* action) const override {
    check_finite_action(action, 1);
    double a = clip(action[0], spec_.action_low, spec_.action_high);
    double g = clip(s[0] + a, -1, 1);
    double h = s[1];
    bool grasped = s[3] > 0.5;
    if (!grasped && std::abs(g - h) <= kGraspRadius) grasped = true;
    if (grasped) {
      h = clip(g, kHandleOpen, kHandleClosed);
      g = h;  // hand rides the handle inside the drawer rails
    }
    double d = (kHandleClosed - h) / (kHandleClosed - kHandleOpen);
    double reward = grasped ? d : -std::abs(g - h);
    return {{g, h, d, grasped ? 1.0 : 0.0}, reward, d > 0.9};
  }

  Image render(const std::vector<double>& s) const override {
    Image img(kImageSize, kImageSize, {255, 255, 255});
    // cabinet body on the right
    draw_rect(img, to_px(0.55), 20, to_px(0.95), 44, {90, 90, 90});
    // drawer extension from the handle to the cabinet face
    draw_rect(img, to_px(s[1]), 26, to_px(0.55), 38, {170, 120, 60});
    draw_disc(img, to_px(s[1]), 32, 2.0, {30, 30, 30});   // handle knob
    draw_disc(img, to_px(s[0]), 32, 3.0, {50, 80, 220});  // gripper
    return img;
  }

  std::vector<double> expert_target(
      const std::vector<double>& /*init*/) const override {
    return {kHandleClosed};  // approach point; pull phase aims at kHandleOpen
  }

  std::vector<double> corrupt_target(const std::vector<double>& /*init*/,
                                     Rng& rng) const override {
    // Hover point left of the grasp zone: the gripper parks there and the
    // drawer never opens. Overshoot is at most one action step, which
    // cannot reach the handle from <= 0.3.
    return {rng.uniform(-1.0, 0.3)};
  }

  void expert_action(const std::vector<double>& s,
                     const std::vector<double>& target,
                     double* out) const override {
    bool grasped = s[3] > 0.5;
    double aim = grasped ? kHandleOpen : target[0];
    out[0] = clip(aim - s[0], spec_.action_low, spec_.action_high);
  }

 private:
  EnvSpec spec_;
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "point_reach") return std::make_unique<PointReach>();
  if (name == "drawer_pull") return std::make_unique<DrawerPull>();
  throw ConfigError("unknown env: " + name);
}

std::vector<std::string> env_names() { return {"point_reach", "drawer_pull"}; }

EpisodeDataset scripted_collect(const Env& env, const CollectOptions& opt) {
  if (opt.episodes <= 0)
    throw ConfigError("scripted_collect: episodes must be positive");
  if (opt.failure_rate < 0 || opt.failure_rate > 1)
    throw ConfigError("scripted_collect: failure_rate must be in [0, 1]");
  if (opt.expert_noise < 0)
    throw ConfigError("scripted_collect: expert_noise must be >= 0");

  const EnvSpec& spec = env.spec();
  EpisodeDataset out;
  out.meta.env = spec.name;
  out.meta.state_dim = spec.state_dim;
  out.meta.action_dim = spec.action_dim;
  out.meta.horizon = spec.horizon;
  out.meta.segment_len = opt.segment_len;
  out.meta.seed = opt.seed;
  out.meta.frames_available = opt.render_frames;
  out.meta.action_low = spec.action_low;
  out.meta.action_high = spec.action_high;
  out.episodes.resize(opt.episodes);

  std::vector<double> action(spec.action_dim);
  for (int ep = 0; ep < opt.episodes; ++ep) {
    Rng rng(Rng::derive(opt.seed, static_cast<std::uint64_t>(ep)));
    std::vector<double> state = env.reset(rng);
    const bool fail = rng.uniform() < opt.failure_rate;
    const std::vector<double> target =
        fail ? env.corrupt_target(state, rng) : env.expert_target(state);

    Trajectory& tr = out.episodes[ep];
    tr.states.reserve(static_cast<std::size_t>(spec.horizon) * spec.state_dim);
    tr.actions.reserve(static_cast<std::size_t>(spec.horizon) *
                       spec.action_dim);
    tr.true_rewards.reserve(spec.horizon);

    for (int t = 0; t < spec.horizon; ++t) {
      env.expert_action(state, target, action.data());
      for (int i = 0; i < spec.action_dim; ++i) {
        action[i] = clip(action[i] + opt.expert_noise * rng.normal(),
                         spec.action_low, spec.action_high);
      }
      for (double v : state) tr.states.push_back(static_cast<float>(v));
      for (double v : action) tr.actions.push_back(static_cast<float>(v));
      StepResult sr = env.step(state, action.data());
      tr.true_rewards.push_back(static_cast<float>(sr.reward));
      tr.success = tr.success || sr.success;
      state = std::move(sr.next_state);
    }
  }
  return out;
}

}  // namespace prefpol
