#include "prefpol/adam.hpp"

#include <cmath>

#include "prefpol/errors.hpp"

namespace prefpol {

AdamState AdamState::init(const PolicyParams& p, AdamConfig cfg) {
  AdamState s;
  s.cfg = cfg;
  for (const Mat* m : p.mats()) {
    s.m.emplace_back(m->rows, m->cols);
    s.v.emplace_back(m->rows, m->cols);
  }
  return s;
}

void adam_step(PolicyParams& params, const ParamGrads& grads,
               AdamState& state) {
  auto ps = params.mats();
  auto gs = grads.mats();
  if (ps.size() != gs.size() || ps.size() != state.m.size())
    throw TrainingError("adam_step: parameter/state count mismatch");

  const AdamConfig& c = state.cfg;
  const long t = ++state.step;
  const double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(t));

  for (std::size_t k = 0; k < ps.size(); ++k) {
    Mat& p = *ps[k];
    const Mat& g = *gs[k];
    Mat& m = state.m[k];
    Mat& v = state.v[k];
    if (!p.same_shape(g) || !p.same_shape(m))
      throw TrainingError("adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.a[i] = c.beta1 * m.a[i] + (1.0 - c.beta1) * g.a[i];
      v.a[i] = c.beta2 * v.a[i] + (1.0 - c.beta2) * g.a[i] * g.a[i];
      const double mh = m.a[i] / m_corr;
      const double vh = v.a[i] / v_corr;
      p.a[i] -= c.lr * mh / (std::sqrt(vh) + c.eps);
    }
  }
}

}  // namespace prefpol
