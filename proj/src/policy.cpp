#include "prefpol/policy.hpp"

#include <cmath>

#include "prefpol/errors.hpp"

namespace prefpol {

PolicyParams PolicyParams::init(int state_dim, int action_dim,
                                const PolicyConfig& cfg, Rng& rng) {
  if (state_dim < 1 || action_dim < 1)
    throw ConfigError("policy: dimensions must be positive");
  for (int h : cfg.hidden)
    if (h < 1) throw ConfigError("policy: hidden width must be positive");

  PolicyParams p;
  p.state_dim = state_dim;
  p.action_dim = action_dim;

  int in = state_dim;
  auto add_layer = [&](int out, double gain) {
    Mat w(out, in);
    const double s = gain / std::sqrt(static_cast<double>(in));
    for (auto& v : w.a) v = rng.uniform(-s, s);
    p.w.push_back(std::move(w));
    p.b.emplace_back(1, out);
    in = out;
  };
  for (int h : cfg.hidden) add_layer(h, 1.0);
  add_layer(action_dim, 0.01);  // near-zero initial mean

  p.log_std = Mat(1, action_dim, cfg.log_std_init);
  return p;
}

std::vector<double> PolicyParams::mean_action(
    std::span<const float> state) const {
  if (static_cast<int>(state.size()) != state_dim)
    throw ConfigError("mean_action: state dimension mismatch");
  std::vector<double> cur(state.begin(), state.end());
  std::vector<double> next;
  for (std::size_t layer = 0; layer < w.size(); ++layer) {
    const Mat& wl = w[layer];
    const Mat& bl = b[layer];
    next.assign(wl.rows, 0.0);
    for (int o = 0; o < wl.rows; ++o) {
      const double* wo = wl.data() + static_cast<std::size_t>(o) * wl.cols;
      double s = bl.a[o];
      for (int k = 0; k < wl.cols; ++k) s += wo[k] * cur[k];
      next[o] = layer + 1 < w.size() ? std::tanh(s) : s;
    }
    cur.swap(next);
  }
  return cur;
}

void PolicyParams::clamp_log_std(double lo, double hi) {
  for (auto& v : log_std.a) v = std::min(std::max(v, lo), hi);
}

bool PolicyParams::all_finite() const {
  for (const Mat* m : mats())
    if (!m->all_finite()) return false;
  return true;
}

double PolicyParams::param_norm() const {
  double s = 0;
  for (const Mat* m : mats()) s += m->sq_norm();
  return std::sqrt(s);
}

std::size_t PolicyParams::count() const {
  std::size_t n = 0;
  for (const Mat* m : mats()) n += m->size();
  return n;
}

std::vector<Mat*> PolicyParams::mats() {
  std::vector<Mat*> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.push_back(&w[i]);
    out.push_back(&b[i]);
  }
  out.push_back(&log_std);
  return out;
}

std::vector<const Mat*> PolicyParams::mats() const {
  std::vector<const Mat*> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.push_back(&w[i]);
    out.push_back(&b[i]);
  }
  out.push_back(&log_std);
  return out;
}

ParamGrads ParamGrads::zeros_like(const PolicyParams& p) {
  ParamGrads g;
  for (const auto& m : p.w) g.w.emplace_back(m.rows, m.cols);
  for (const auto& m : p.b) g.b.emplace_back(m.rows, m.cols);
  g.log_std = Mat(p.log_std.rows, p.log_std.cols);
  return g;
}

void ParamGrads::zero() {
  for (Mat* m : mats()) m->zero();
}

double ParamGrads::norm() const {
  double s = 0;
  for (const Mat* m : mats()) s += m->sq_norm();
  return std::sqrt(s);
}

std::vector<Mat*> ParamGrads::mats() {
  std::vector<Mat*> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.push_back(&w[i]);
    out.push_back(&b[i]);
  }
  out.push_back(&log_std);
  return out;
}

std::vector<const Mat*> ParamGrads::mats() const {
  std::vector<const Mat*> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.push_back(&w[i]);
    out.push_back(&b[i]);
  }
  out.push_back(&log_std);
  return out;
}

Tape::Ref policy_mean(Tape& tape, const PolicyParams& p, ParamGrads* g,
                      Tape::Ref x, double p_drop, Rng* rng) {
  Tape::Ref cur = x;
  const std::size_t layers = p.w.size();
  for (std::size_t i = 0; i < layers; ++i) {
    Mat* gw = g ? &g->w[i] : nullptr;
    Mat* gb = g ? &g->b[i] : nullptr;
    cur = tape.affine(cur, p.w[i], p.b[i], gw, gb);
    if (i + 1 < layers) {
      cur = tape.tanh_op(cur);
      if (p_drop > 0 && rng) cur = tape.dropout(cur, p_drop, *rng);
    }
  }
  return cur;
}

Tape::Ref gaussian_log_prob_batch(Tape& tape, const PolicyParams& p,
                                  ParamGrads* g, Mat states, Mat actions,
                                  double p_drop, Rng* rng) {
  if (states.cols != p.state_dim || actions.cols != p.action_dim ||
      states.rows != actions.rows)
    throw ConfigError("gaussian_log_prob: dimension mismatch");
  if (!states.all_finite() || !actions.all_finite())
    throw ConfigError("gaussian_log_prob: non-finite input");
  Tape::Ref x = tape.leaf(std::move(states));
  Tape::Ref mean = policy_mean(tape, p, g, x, p_drop, rng);
  Mat* gls = g ? &g->log_std : nullptr;
  return tape.gaussian_logprob(mean, p.log_std, gls, std::move(actions));
}

Tape::Ref gaussian_log_prob(Tape& tape, const PolicyParams& p, ParamGrads* g,
                            std::span<const float> state,
                            std::span<const float> action, double p_drop,
                            Rng* rng) {
  Mat s(1, p.state_dim), a(1, p.action_dim);
  if (static_cast<int>(state.size()) != p.state_dim ||
      static_cast<int>(action.size()) != p.action_dim)
    throw ConfigError("gaussian_log_prob: dimension mismatch");
  for (int j = 0; j < p.state_dim; ++j) s.a[j] = state[j];
  for (int j = 0; j < p.action_dim; ++j) a.a[j] = action[j];
  Tape::Ref lp =
      gaussian_log_prob_batch(tape, p, g, std::move(s), std::move(a), p_drop, rng);
  return tape.weighted_sum(lp, {1.0});
}

}  // namespace prefpol
