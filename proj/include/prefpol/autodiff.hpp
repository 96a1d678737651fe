#pragma once

#include <functional>
#include <vector>

#include "prefpol/mat.hpp"
#include "prefpol/rng.hpp"

namespace prefpol {

// Reverse-mode tape over matrix-valued nodes. Ops only reference earlier
// nodes, so reverse creation order is a valid topological order. Parameter
// gradients accumulate into caller-owned Mats passed by pointer; callers
// zero them before building a tape.
class Tape {
 public:
  struct Ref {
    int i = -1;
  };

  Ref leaf(Mat v);
  Ref leaf(double v) { return leaf(Mat::scalar(v)); }

  const Mat& val(Ref r) const { return nodes_[r.i].v; }
  const Mat& grad(Ref r) const { return nodes_[r.i].g; }
  double scalar(Ref r) const;

  // y = x * w^T + b (b broadcast over rows). w is (out, in), b is (1, out).
  // gw/gb may be null to skip parameter gradients.
  Ref affine(Ref x, const Mat& w, const Mat& b, Mat* gw, Mat* gb);

  Ref tanh_op(Ref x);

  // Inverted dropout in train mode; p == 0 is the identity.
  Ref dropout(Ref x, double p, Rng& rng);

  // Row-wise diagonal-Gaussian log density: mean (B, d) vs actions (B, d)
  // with shared log_std (1, d). Returns (B, 1).
  Ref gaussian_logprob(Ref mean, const Mat& log_std, Mat* g_log_std,
                       Mat actions);

  // x is (B, 1); returns scalar sum_i w[i] * x[i].
  Ref weighted_sum(Ref x, std::vector<double> w);

  Ref mean_all(Ref x);
  Ref softplus(Ref x);
  Ref lincomb(double a, Ref x, double b, Ref y);
  Ref scale(Ref x, double a);

  // Seeds d(loss)/d(loss) = 1 and walks the tape backwards. The loss must
  // be a finite scalar.
  void backward(Ref loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat v, g;
    std::function<void(Tape&)> back;
  };

  Ref push(Mat v, std::function<void(Tape&)> back);

  std::vector<Node> nodes_;
  int cur_ = -1;  // node whose backward closure is running
};

}  // namespace prefpol
