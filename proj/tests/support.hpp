#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "prefpol/core_model.hpp"
#include "prefpol/policy.hpp"
#include "prefpol/rng.hpp"

namespace testsupport {

// Random dataset with no env semantics; enough for slicing/persistence.
inline prefpol::EpisodeDataset synth_dataset(int episodes, int horizon,
                                             int state_dim, int action_dim,
                                             std::uint64_t seed) {
  prefpol::EpisodeDataset d;
  d.meta.env = "synthetic";
  d.meta.state_dim = state_dim;
  d.meta.action_dim = action_dim;
  d.meta.horizon = horizon;
  d.meta.seed = seed;
  prefpol::Rng rng(seed);
  d.episodes.resize(episodes);
  for (auto& e : d.episodes) {
    e.success = rng.uniform() < 0.5;
    for (int t = 0; t < horizon; ++t) {
      for (int j = 0; j < state_dim; ++j)
        e.states.push_back(static_cast<float>(rng.uniform(-1, 1)));
      for (int j = 0; j < action_dim; ++j)
        e.actions.push_back(static_cast<float>(rng.uniform(-0.1, 0.1)));
      e.true_rewards.push_back(static_cast<float>(rng.uniform(-1, 0)));
    }
  }
  return d;
}

// Straight-line diagonal-Gaussian log density; the no-tape oracle the tape
// implementation is checked against.
inline double logprob_oracle(const prefpol::PolicyParams& p,
                             const std::vector<double>& state,
                             const std::vector<double>& action) {
  std::vector<double> cur = state;
  std::vector<double> next;
  for (std::size_t layer = 0; layer < p.w.size(); ++layer) {
    const auto& w = p.w[layer];
    next.assign(w.rows, 0.0);
    for (int o = 0; o < w.rows; ++o) {
      double s = p.b[layer].a[o];
      for (int k = 0; k < w.cols; ++k) s += w(o, k) * cur[k];
      next[o] = layer + 1 < p.w.size() ? std::tanh(s) : s;
    }
    cur.swap(next);
  }
  double lp = 0;
  for (int j = 0; j < p.action_dim; ++j) {
    const double ls = p.log_std.a[j];
    const double z = (action[j] - cur[j]) / std::exp(ls);
    lp += -0.5 * z * z - ls - 0.5 * std::log(2.0 * 3.14159265358979323846);
  }
  return lp;
}

// Central finite differences over every parameter. `loss` must rebuild the
// whole forward pass from current parameter values; `autodiff_grads` holds
// the gradients being verified. Returns the worst relative error seen,
// with an absolute floor guarding near-zero gradients.
inline double finite_diff_worst_error(
    prefpol::PolicyParams& params, const prefpol::ParamGrads& autodiff_grads,
    const std::function<double()>& loss, double h = 1e-4) {
  double worst = 0;
  auto ps = params.mats();
  auto gs = autodiff_grads.mats();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (std::size_t i = 0; i < ps[k]->size(); ++i) {
      double& x = ps[k]->a[i];
      const double saved = x;
      x = saved + h;
      const double up = loss();
      x = saved - h;
      const double down = loss();
      x = saved;
      const double fd = (up - down) / (2 * h);
      const double ad = gs[k]->a[i];
      const double denom = std::max({std::abs(fd), std::abs(ad), 1e-4});
      worst = std::max(worst, std::abs(fd - ad) / denom);
    }
  }
  return worst;
}

}  // namespace testsupport
