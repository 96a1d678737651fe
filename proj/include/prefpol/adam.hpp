#pragma once

#include <vector>

#include "prefpol/mat.hpp"
#include "prefpol/policy.hpp"

namespace prefpol {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig cfg;
  long step = 0;
  std::vector<Mat> m, v;  // aligned with PolicyParams::mats()

  static AdamState init(const PolicyParams& p, AdamConfig cfg);

  bool operator==(const AdamState&) const = default;
};

// Standard bias-corrected Adam update. Deterministic; shapes must agree.
void adam_step(PolicyParams& params, const ParamGrads& grads,
               AdamState& state);

}  // namespace prefpol
