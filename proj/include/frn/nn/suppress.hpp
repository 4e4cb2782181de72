#pragma once

#include <vector>

#include "frn/image.hpp"
#include "frn/nn/conv.hpp"
#include "frn/nn/ops.hpp"

namespace frn {

enum class CorrelationAct { SIGMOID, TANH };

// Learned pairwise correlation phi(f_i, f_j) = D(<G(f_i), G(f_j)>) where G is
// a small two-layer perceptron C -> D -> D (tanh between layers) projecting
// features into a low-dimensional correlation space, and D is a bounded
// activation (sigmoid keeps the modulation a pure attenuation).
template <typename T>
struct CorrelationHead {
  using Mat = typename Tensor<T>::Mat;

  int in_c = 0, dim_d = 0;
  CorrelationAct act = CorrelationAct::SIGMOID;
  Param<T> w1, b1, w2, b2;  // w1: D x C, w2: D x D

  CorrelationHead() = default;
  CorrelationHead(int in_c_, int dim_d_, CorrelationAct act_ = CorrelationAct::SIGMOID)
      : in_c(in_c_), dim_d(dim_d_), act(act_) {
    w1.resize(dim_d, in_c);
    b1.resize(dim_d, 1);
    w2.resize(dim_d, dim_d);
    b2.resize(dim_d, 1);
  }

  void init(Rng& rng) {
    w1.init_normal(rng, std::sqrt(1.0 / in_c));
    w2.init_normal(rng, std::sqrt(1.0 / dim_d));
  }

  T activate(T s) const {
    if (act == CorrelationAct::SIGMOID) return T(1) / (T(1) + std::exp(-s));
    return std::tanh(s);
  }

  // derivative expressed through the activation value
  T activate_deriv(T phi) const {
    if (act == CorrelationAct::SIGMOID) return phi * (T(1) - phi);
    return T(1) - phi * phi;
  }

  // columnwise projection G(x); caches for backward
  const Mat& project(const Mat& x) {
    x_ = x;
    h_ = ((w1.v * x).colwise() + b1.v.col(0)).array().tanh().matrix();
    g_ = (w2.v * h_).colwise() + b2.v.col(0);
    return g_;
  }

  // same projection without touching the cache (single-vector probes)
  Mat project_const(const Mat& x) const {
    Mat h = ((w1.v * x).colwise() + b1.v.col(0)).array().tanh().matrix();
    return (w2.v * h).colwise() + b2.v.col(0);
  }

  Mat backward(const Mat& dg) {
    w2.g.noalias() += dg * h_.transpose();
    b2.g.col(0) += dg.rowwise().sum();
    Mat dpre = (w2.v.transpose() * dg).array() * (T(1) - h_.array().square());
    w1.g.noalias() += dpre * x_.transpose();
    b1.g.col(0) += dpre.rowwise().sum();
    return w1.v.transpose() * dpre;
  }

  const Mat& last_projection() const { return g_; }

  void collect(ParamList<T>& ps) {
    ps.push_back(&w1);
    ps.push_back(&b1);
    ps.push_back(&w2);
    ps.push_back(&b2);
  }

 private:
  Mat x_, h_, g_;
};

// phi for a single feature pair; symmetric by construction.
template <typename T>
T correlation_phi(const Eigen::Matrix<T, Eigen::Dynamic, 1>& fi,
                  const Eigen::Matrix<T, Eigen::Dynamic, 1>& fj,
                  const CorrelationHead<T>& head) {
  typename Tensor<T>::Mat pair(fi.rows(), 2);
  pair.col(0) = fi;
  pair.col(1) = fj;
  auto g = head.project_const(pair);
  return head.activate(g.col(0).dot(g.col(1)));
}

// Content-adaptive convolution: out_i = sum_{j in window} phi(f_j, f_i) *
// W_{dji} f_j + b. With use_phi = false this is exactly the content-agnostic
// convolution (the FixConv ablation path).
template <typename T>
struct SuppressionConv {
  using Mat = typename Tensor<T>::Mat;

  int in_c = 0, out_c = 0, k = 3;
  bool use_phi = true;
  Param<T> w, b;  // same layout as Conv2d
  CorrelationHead<T> head;

  SuppressionConv() = default;
  SuppressionConv(int in_c_, int out_c_, int k_, int dim_d,
                  CorrelationAct act = CorrelationAct::SIGMOID)
      : in_c(in_c_), out_c(out_c_), k(k_), head(in_c_, dim_d, act) {
    if (k % 2 == 0) throw std::invalid_argument("SuppressionConv: kernel size must be odd");
    w.resize(out_c, k * k * in_c);
    b.resize(out_c, 1);
  }

  void init(Rng& rng) {
    w.init_normal(rng, std::sqrt(2.0 / (k * k * in_c)));
    head.init(rng);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.c != in_c) throw std::invalid_argument("SuppressionConv: channel mismatch");
    const int k2 = k * k;
    int oh = 0, ow = 0;
    nbr_ = conv_neighbor_table(x.h, x.w, k, 1, oh, ow);
    in_h_ = x.h;
    in_w_ = x.w;
    im2col(x, nbr_, k2, cols_);
    x_ = x.m;

    Tensor<T> y(out_c, oh, ow);
    if (!use_phi) {
      y.m.noalias() = w.v * cols_;
      y.m.colwise() += b.v.col(0);
      return y;
    }

    const Mat& g = head.project(x.m);
    const int n = x.pixels();
    phi_.resize(k2, n);
    for (int p = 0; p < n; ++p) {
      const auto gi = g.col(p);
      for (int off = 0; off < k2; ++off)
        phi_(off, p) = head.activate(g.col(nbr_[p * k2 + off]).dot(gi));
    }

    cols_mod_ = cols_;
    for (int p = 0; p < n; ++p)
      for (int off = 0; off < k2; ++off)
        cols_mod_.col(p).segment(static_cast<long>(off) * in_c, in_c) *= phi_(off, p);

    y.m.noalias() = w.v * cols_mod_;
    y.m.colwise() += b.v.col(0);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int k2 = k * k;
    const Mat& cols_used = use_phi ? cols_mod_ : cols_;
    w.g.noalias() += dy.m * cols_used.transpose();
    b.g.col(0) += dy.m.rowwise().sum();

    Mat dcols = w.v.transpose() * dy.m;
    Tensor<T> dx(in_c, in_h_, in_w_);
    if (!use_phi) {
      col2im_add(dcols, nbr_, k2, dx);
      return dx;
    }

    const int n = in_h_ * in_w_;
    const Mat& g = head.last_projection();
    Mat dphi(k2, n);
    for (int p = 0; p < n; ++p) {
      for (int off = 0; off < k2; ++off) {
        const int j = nbr_[p * k2 + off];
        const auto v = dcols.col(p).segment(static_cast<long>(off) * in_c, in_c);
        dphi(off, p) = v.dot(x_.col(j));  // through the modulation scalar
        dx.m.col(j) += phi_(off, p) * v;  // direct path through f_j
      }
    }

    Mat dg = Mat::Zero(g.rows(), n);
    for (int p = 0; p < n; ++p) {
      for (int off = 0; off < k2; ++off) {
        const int j = nbr_[p * k2 + off];
        const T ds = dphi(off, p) * head.activate_deriv(phi_(off, p));
        dg.col(p) += ds * g.col(j);
        dg.col(j) += ds * g.col(p);
      }
    }
    dx.m += head.backward(dg);
    return dx;
  }

  void collect(ParamList<T>& ps) {
    ps.push_back(&w);
    ps.push_back(&b);
    if (use_phi) head.collect(ps);
  }

 private:
  Mat cols_, cols_mod_, phi_, x_;
  std::vector<int> nbr_;
  int in_h_ = 0, in_w_ = 0;
};

// One encoder stage: suppression conv, stride-2 decimation, leaky rectifier.
template <typename T>
struct SuppressionStage {
  SuppressionConv<T> conv;
  bool downsample = true;
  LeakyRelu<T> act;

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y = conv.forward(x);
    full_h_ = y.h;
    full_w_ = y.w;
    if (downsample) y = decimate2(y);
    return act.forward(y);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> d = act.backward(dy);
    if (downsample) d = decimate2_backward(d, full_h_, full_w_);
    return conv.backward(d);
  }

  void collect(ParamList<T>& ps) { conv.collect(ps); }

 private:
  int full_h_ = 0, full_w_ = 0;
};

inline int correlation_dim(int in_c) { return std::max(in_c / 8, 4); }

// Cascaded suppression modules emitting the layered guidance hierarchy.
// feature[s] has spatial dims H/2^(s+1) x W/2^(s+1) and stage_index = s.
template <typename T>
struct SuppressionEncoder {
  std::vector<SuppressionStage<T>> stages;

  static SuppressionEncoder make(int in_c, const std::vector<int>& channels,
                                 CorrelationAct act, Rng& rng) {
    SuppressionEncoder enc;
    int c = in_c;
    for (int out : channels) {
      SuppressionStage<T> st;
      st.conv = SuppressionConv<T>(c, out, 3, correlation_dim(c), act);
      st.conv.init(rng);
      st.downsample = true;
      enc.stages.push_back(std::move(st));
      c = out;
    }
    return enc;
  }

  void set_use_phi(bool on) {
    for (auto& st : stages) st.conv.use_phi = on;
  }

  std::vector<Tensor<T>> encode(const Tensor<T>& x) {
    std::vector<Tensor<T>> feats;
    feats.reserve(stages.size());
    Tensor<T> cur = x;
    for (size_t s = 0; s < stages.size(); ++s) {
      cur = stages[s].forward(cur);
      cur.stage_index = static_cast<int>(s);
      feats.push_back(cur);
    }
    return feats;
  }

  // dfeats[s] = gradient flowing into feature s from its consumers; may hold
  // empty tensors (treated as zero). Returns the input gradient.
  Tensor<T> backward(std::vector<Tensor<T>> dfeats) {
    Tensor<T> chain;
    for (int s = static_cast<int>(stages.size()) - 1; s >= 0; --s) {
      Tensor<T> d = std::move(dfeats[s]);
      if (chain.size() > 0) {
        if (d.size() == 0) d = std::move(chain);
        else d.m += chain.m;
      }
      if (d.size() == 0)
        throw std::logic_error("SuppressionEncoder::backward: no gradient for deepest stage");
      chain = stages[s].backward(d);
    }
    return chain;
  }

  void collect(ParamList<T>& ps) {
    for (auto& st : stages) st.collect(ps);
  }
};

// Spec-level operation: image in, guidance hierarchy out.
template <typename T>
std::vector<Tensor<T>> encode_hierarchy(const Image& img, SuppressionEncoder<T>& enc) {
  const int n = static_cast<int>(enc.stages.size());
  if (img.h < (1 << n) || img.w < (1 << n))
    throw std::invalid_argument("encode_hierarchy: image smaller than 2^N_stages");
  return enc.encode(image_to_feature<T>(img));
}

}  // namespace frn
