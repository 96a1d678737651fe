#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prefpol/adam.hpp"
#include "prefpol/autodiff.hpp"
#include "prefpol/core_model.hpp"
#include "prefpol/policy.hpp"

namespace prefpol {

struct CplConfig {
  double alpha = 0.1;       // score temperature
  double lambda = 0.5;      // conservative bias on the dispreferred score
  double gamma = 0.99;      // per-step discount inside a segment
  bool include_equal = false;
  double p_drop = 0.25;
  int batch_size = 64;      // pairs for CPL, transitions for BC
  long total_steps = 500000;
  double lr = 1e-4;
  long checkpoint_every = 5000;
  long log_every = 100;
  std::uint64_t seed = 0;
  PolicyConfig policy;

  void validate() const;
};

// s(sigma) = sum_t gamma^t * alpha * log pi(a_t | s_t), t from the segment
// start.
Tape::Ref segment_score(Tape& tape, const PolicyParams& params,
                        ParamGrads* grads, const Segment& seg, double alpha,
                        double gamma, double p_drop, Rng* drop_rng);

// loss = (1-y) * softplus(lambda*s2 - s1) + y * softplus(lambda*s1 - s2),
// the log-space form of the contrastive preference objective. Nonnegative
// and finite for finite scores.
Tape::Ref cpl_pair_loss(Tape& tape, const PolicyParams& params,
                        ParamGrads* grads, const Segment& a, const Segment& b,
                        double label, const CplConfig& cfg, Rng* drop_rng);

struct FilterResult {
  PreferenceDataset kept;
  double removed_fraction = 0.0;
};

// Drops y = 0.5 records, preserving order.
FilterResult filter_equal(const PreferenceDataset& prefs);

// Mean of -log pi(a|s) over the batch.
Tape::Ref bc_loss(Tape& tape, const PolicyParams& params, ParamGrads* grads,
                  Mat states, Mat actions, double p_drop, Rng* drop_rng);

enum class Objective { cpl, bc };

std::string to_string(Objective o);
Objective objective_from(const std::string& s);

struct TrainOptions {
  Objective objective = Objective::cpl;
  CplConfig cfg;
  std::string out_dir;
  std::string config_hash = "0";
  bool quiet = true;  // when false, prints progress lines
};

struct TrainResult {
  std::vector<std::pair<long, std::string>> checkpoints;  // (step, path)
  std::string log_path;
  long steps = 0;
  double wall_seconds = 0;
  double final_loss = 0;
  double removed_fraction = 0;  // equal-preference filtering, CPL only
};

// Batched Adam on the chosen objective with periodic checkpoints and a
// csv log (step, loss, grad_norm, wall_ms). Deterministic in the seed on a
// fixed platform; wall_ms is the only non-reproducible column. prefs must
// be non-null for the CPL objective.
TrainResult train(const EpisodeDataset& episodes,
                  const PreferenceDataset* prefs, const TrainOptions& opt);

}  // namespace prefpol
