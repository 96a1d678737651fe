#include "prefpol/autodiff.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "prefpol/errors.hpp"

namespace prefpol {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double stable_softplus(double x) {
  // log(1 + e^x) without overflow on either tail.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

Tape::Ref Tape::push(Mat v, std::function<void(Tape&)> back) {
  Node n;
  n.g = Mat(v.rows, v.cols);
  n.v = std::move(v);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Ref{static_cast<int>(nodes_.size()) - 1};
}

Tape::Ref Tape::leaf(Mat v) { return push(std::move(v), nullptr); }

double Tape::scalar(Ref r) const {
  const Mat& m = nodes_[r.i].v;
  if (m.rows != 1 || m.cols != 1)
    throw TrainingError("expected a scalar tape node");
  return m.a[0];
}

Tape::Ref Tape::affine(Ref x, const Mat& w, const Mat& b, Mat* gw, Mat* gb) {
  const Mat& xv = nodes_[x.i].v;
  const int batch = xv.rows, in = xv.cols, out = w.rows;
  if (w.cols != in || b.rows != 1 || b.cols != out)
    throw TrainingError("affine: shape mismatch");

  Mat y(batch, out);
  for (int i = 0; i < batch; ++i) {
    const double* xi = xv.data() + static_cast<std::size_t>(i) * in;
    double* yi = y.data() + static_cast<std::size_t>(i) * out;
    for (int o = 0; o < out; ++o) {
      const double* wo = w.data() + static_cast<std::size_t>(o) * in;
      double s = b.a[o];
      for (int k = 0; k < in; ++k) s += wo[k] * xi[k];
      yi[o] = s;
    }
  }

  // The layer owns no storage: w/b live in PolicyParams and outlive the
  // tape within a training step.
  const Mat* wp = &w;
  int xi_idx = x.i;
  return push(std::move(y), [xi_idx, wp, gw, gb, batch, in, out](Tape& t) {
    const Mat& gy = t.nodes_[t.cur_].g;
    const Mat& xv = t.nodes_[xi_idx].v;
    Mat& gx = t.nodes_[xi_idx].g;
    for (int i = 0; i < batch; ++i) {
      const double* gyi = gy.data() + static_cast<std::size_t>(i) * out;
      const double* xiv = xv.data() + static_cast<std::size_t>(i) * in;
      double* gxi = gx.data() + static_cast<std::size_t>(i) * in;
      for (int o = 0; o < out; ++o) {
        const double g = gyi[o];
        if (g == 0) continue;
        const double* wo = wp->data() + static_cast<std::size_t>(o) * in;
        for (int k = 0; k < in; ++k) gxi[k] += g * wo[k];
        if (gw) {
          double* gwo = gw->data() + static_cast<std::size_t>(o) * in;
          for (int k = 0; k < in; ++k) gwo[k] += g * xiv[k];
        }
        if (gb) gb->a[o] += g;
      }
    }
  });
}

Tape::Ref Tape::tanh_op(Ref x) {
  const Mat& xv = nodes_[x.i].v;
  Mat y(xv.rows, xv.cols);
  for (std::size_t i = 0; i < xv.size(); ++i) y.a[i] = std::tanh(xv.a[i]);
  int xi = x.i;
  return push(std::move(y), [xi](Tape& t) {
    const Mat& yv = t.nodes_[t.cur_].v;
    const Mat& gy = t.nodes_[t.cur_].g;
    Mat& gx = t.nodes_[xi].g;
    for (std::size_t i = 0; i < yv.size(); ++i)
      gx.a[i] += gy.a[i] * (1.0 - yv.a[i] * yv.a[i]);
  });
}

Tape::Ref Tape::dropout(Ref x, double p, Rng& rng) {
  if (p < 0 || p >= 1)
    throw ConfigError("dropout probability must be in [0, 1)");
  if (p == 0) return x;
  const Mat& xv = nodes_[x.i].v;
  auto mask = std::make_shared<std::vector<double>>(xv.size());
  const double keep_scale = 1.0 / (1.0 - p);
  for (auto& m : *mask) m = rng.uniform() < p ? 0.0 : keep_scale;

  Mat y(xv.rows, xv.cols);
  for (std::size_t i = 0; i < xv.size(); ++i) y.a[i] = xv.a[i] * (*mask)[i];
  int xi = x.i;
  return push(std::move(y), [xi, mask](Tape& t) {
    const Mat& gy = t.nodes_[t.cur_].g;
    Mat& gx = t.nodes_[xi].g;
    for (std::size_t i = 0; i < gy.size(); ++i)
      gx.a[i] += gy.a[i] * (*mask)[i];
  });
}

Tape::Ref Tape::gaussian_logprob(Ref mean, const Mat& log_std, Mat* g_log_std,
                                 Mat actions) {
  const Mat& mv = nodes_[mean.i].v;
  const int batch = mv.rows, dim = mv.cols;
  if (actions.rows != batch || actions.cols != dim || log_std.rows != 1 ||
      log_std.cols != dim)
    throw TrainingError("gaussian_logprob: shape mismatch");

  auto acts = std::make_shared<Mat>(std::move(actions));
  auto ls = std::make_shared<Mat>(log_std);
  Mat out(batch, 1);
  double log_std_sum = 0;
  for (int j = 0; j < dim; ++j) log_std_sum += ls->a[j];
  for (int i = 0; i < batch; ++i) {
    double q = 0;
    for (int j = 0; j < dim; ++j) {
      double z = (acts->operator()(i, j) - mv(i, j)) * std::exp(-ls->a[j]);
      q += z * z;
    }
    out(i, 0) = -0.5 * q - log_std_sum - 0.5 * dim * kLog2Pi;
  }
  int mi = mean.i;
  return push(std::move(out),
              [mi, acts, ls, g_log_std, batch, dim](Tape& t) {
                const Mat& g = t.nodes_[t.cur_].g;
                const Mat& mv = t.nodes_[mi].v;
                Mat& gm = t.nodes_[mi].g;
                for (int i = 0; i < batch; ++i) {
                  const double gi = g(i, 0);
                  if (gi == 0) continue;
                  for (int j = 0; j < dim; ++j) {
                    const double inv_std = std::exp(-ls->a[j]);
                    const double z =
                        (acts->operator()(i, j) - mv(i, j)) * inv_std;
                    gm(i, j) += gi * z * inv_std;
                    if (g_log_std) g_log_std->a[j] += gi * (z * z - 1.0);
                  }
                }
              });
}

Tape::Ref Tape::weighted_sum(Ref x, std::vector<double> w) {
  const Mat& xv = nodes_[x.i].v;
  if (xv.cols != 1 || static_cast<int>(w.size()) != xv.rows)
    throw TrainingError("weighted_sum: shape mismatch");
  double s = 0;
  for (int i = 0; i < xv.rows; ++i) s += w[i] * xv(i, 0);
  int xi = x.i;
  auto ws = std::make_shared<std::vector<double>>(std::move(w));
  return push(Mat::scalar(s), [xi, ws](Tape& t) {
    const double g = t.nodes_[t.cur_].g.a[0];
    Mat& gx = t.nodes_[xi].g;
    for (std::size_t i = 0; i < ws->size(); ++i) gx.a[i] += g * (*ws)[i];
  });
}

Tape::Ref Tape::mean_all(Ref x) {
  const Mat& xv = nodes_[x.i].v;
  double s = 0;
  for (double v : xv.a) s += v;
  const double inv = 1.0 / static_cast<double>(xv.size());
  int xi = x.i;
  return push(Mat::scalar(s * inv), [xi, inv](Tape& t) {
    const double g = t.nodes_[t.cur_].g.a[0] * inv;
    Mat& gx = t.nodes_[xi].g;
    for (auto& v : gx.a) v += g;
  });
}

Tape::Ref Tape::softplus(Ref x) {
  const Mat& xv = nodes_[x.i].v;
  Mat y(xv.rows, xv.cols);
  for (std::size_t i = 0; i < xv.size(); ++i)
    y.a[i] = stable_softplus(xv.a[i]);
  int xi = x.i;
  return push(std::move(y), [xi](Tape& t) {
    const Mat& gy = t.nodes_[t.cur_].g;
    const Mat& xv = t.nodes_[xi].v;
    Mat& gx = t.nodes_[xi].g;
    for (std::size_t i = 0; i < gy.size(); ++i)
      gx.a[i] += gy.a[i] * sigmoid(xv.a[i]);
  });
}

Tape::Ref Tape::lincomb(double a, Ref x, double b, Ref y) {
  const Mat& xv = nodes_[x.i].v;
  const Mat& yv = nodes_[y.i].v;
  if (!xv.same_shape(yv)) throw TrainingError("lincomb: shape mismatch");
  Mat out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.a[i] = a * xv.a[i] + b * yv.a[i];
  int xi = x.i, yi = y.i;
  return push(std::move(out), [xi, yi, a, b](Tape& t) {
    const Mat& g = t.nodes_[t.cur_].g;
    Mat& gx = t.nodes_[xi].g;
    Mat& gy = t.nodes_[yi].g;
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx.a[i] += a * g.a[i];
      gy.a[i] += b * g.a[i];
    }
  });
}

Tape::Ref Tape::scale(Ref x, double a) {
  const Mat& xv = nodes_[x.i].v;
  Mat out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.a[i] = a * xv.a[i];
  int xi = x.i;
  return push(std::move(out), [xi, a](Tape& t) {
    const Mat& g = t.nodes_[t.cur_].g;
    Mat& gx = t.nodes_[xi].g;
    for (std::size_t i = 0; i < g.size(); ++i) gx.a[i] += a * g.a[i];
  });
}

void Tape::backward(Ref loss) {
  if (loss.i < 0 || loss.i >= static_cast<int>(nodes_.size()))
    throw TrainingError("backward: invalid loss node");
  Mat& lv = nodes_[loss.i].v;
  if (lv.rows != 1 || lv.cols != 1)
    throw TrainingError("backward: loss is not a scalar");
  if (!std::isfinite(lv.a[0]))
    throw TrainingError("backward: loss is not finite");
  nodes_[loss.i].g.a[0] = 1.0;
  for (cur_ = loss.i; cur_ >= 0; --cur_) {
    if (nodes_[cur_].back) nodes_[cur_].back(*this);
  }
}

}  // namespace prefpol
