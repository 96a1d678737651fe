#pragma once

#include <memory>
#include <string>
#include <vector>

#include "prefpol/core_model.hpp"
#include "prefpol/image.hpp"
#include "prefpol/rng.hpp"

namespace prefpol {

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  int action_dim = 0;
  double action_low = -0.1;
  double action_high = 0.1;
  int horizon = 100;
  std::string success_desc;
  std::string reward_desc;
  std::string default_task_description;  // used when querying a VLM teacher
};

struct StepResult {
  std::vector<double> next_state;
  double reward = 0;
  bool success = false;
};

// Environments are immutable configuration; state is passed in and out, so
// independent rollouts can share one instance across threads.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::vector<double> reset(Rng& rng) const = 0;
  virtual StepResult step(const std::vector<double>& state,
                          const double* action) const = 0;
  virtual Image render(const std::vector<double>& state) const = 0;

  // Scripted-collector hooks. A target is what the proportional controller
  // steers by; corrupt_target produces a coherent-but-wrong one so the
  // episode fails.
  virtual std::vector<double> expert_target(
      const std::vector<double>& init_state) const = 0;
  virtual std::vector<double> corrupt_target(
      const std::vector<double>& init_state, Rng& rng) const = 0;
  virtual void expert_action(const std::vector<double>& state,
                             const std::vector<double>& target,
                             double* action_out) const = 0;
};

// Supported names: "point_reach", "drawer_pull".
std::unique_ptr<Env> make_env(const std::string& name);

std::vector<std::string> env_names();

struct CollectOptions {
  int episodes = 0;
  double expert_noise = 0.02;  // action-space Gaussian sigma
  double failure_rate = 0.5;
  std::uint64_t seed = 0;
  bool render_frames = false;  // marks the dataset as VLM-queryable
  int segment_len = 16;
};

EpisodeDataset scripted_collect(const Env& env, const CollectOptions& opt);

}  // namespace prefpol
