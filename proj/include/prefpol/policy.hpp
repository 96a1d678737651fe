#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prefpol/autodiff.hpp"
#include "prefpol/mat.hpp"
#include "prefpol/rng.hpp"

namespace prefpol {

struct PolicyConfig {
  std::vector<int> hidden{256, 256};
  double log_std_init = -0.5;

  bool operator==(const PolicyConfig&) const = default;
};

// Diagonal-Gaussian policy: mean = tanh MLP(state), state-independent
// log_std. log_std is clamped to [-5, 2] after every optimizer step.
struct PolicyParams {
  int state_dim = 0;
  int action_dim = 0;
  std::vector<Mat> w;  // (out, in) per layer, mean head last
  std::vector<Mat> b;  // (1, out) per layer
  Mat log_std;         // (1, action_dim)

  static PolicyParams init(int state_dim, int action_dim,
                           const PolicyConfig& cfg, Rng& rng);

  // Evaluation-mode forward pass: deterministic mean, no dropout.
  std::vector<double> mean_action(std::span<const float> state) const;

  void clamp_log_std(double lo = -5.0, double hi = 2.0);
  bool all_finite() const;
  double param_norm() const;
  std::size_t count() const;

  // Flat parameter list in a fixed order (w0, b0, w1, b1, ..., log_std);
  // Adam state, gradients and checkpoints all follow it.
  std::vector<Mat*> mats();
  std::vector<const Mat*> mats() const;

  bool operator==(const PolicyParams&) const = default;
};

struct ParamGrads {
  std::vector<Mat> w, b;
  Mat log_std;

  static ParamGrads zeros_like(const PolicyParams& p);
  void zero();
  double norm() const;
  std::vector<Mat*> mats();
  std::vector<const Mat*> mats() const;
};

// Builds the policy mean on the tape. X is (B, state_dim); returns
// (B, action_dim). Dropout is inserted after each hidden activation when
// p_drop > 0 and rng is non-null (training mode).
Tape::Ref policy_mean(Tape& tape, const PolicyParams& p, ParamGrads* g,
                      Tape::Ref x, double p_drop, Rng* rng);

// Batch log pi(a|s): states (B, state_dim), actions (B, action_dim),
// result (B, 1).
Tape::Ref gaussian_log_prob_batch(Tape& tape, const PolicyParams& p,
                                  ParamGrads* g, Mat states, Mat actions,
                                  double p_drop, Rng* rng);

// Single (s, a) convenience wrapper; returns a scalar node.
Tape::Ref gaussian_log_prob(Tape& tape, const PolicyParams& p, ParamGrads* g,
                            std::span<const float> state,
                            std::span<const float> action, double p_drop,
                            Rng* rng);

}  // namespace prefpol
