#pragma once

#include "frn/nn/conv.hpp"
#include "frn/nn/ops.hpp"

namespace frn {

// Spatial adaptive denormalization: per-channel parameter-free normalization
// over spatial dims, then a per-pixel scale/shift predicted from the guidance
// by two 3x3 convs: out = normalize(x) * (1 + gamma(g)) + beta(g).
// Guidance is nearest-resized to x's spatial dims when they differ.
template <typename T>
struct SpadeNorm {
  using Mat = typename Tensor<T>::Mat;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Conv2d<T> gamma_conv, beta_conv;
  T eps = static_cast<T>(1e-5);

  SpadeNorm() = default;
  SpadeNorm(int x_c, int guid_c)
      : gamma_conv(guid_c, x_c, 3), beta_conv(guid_c, x_c, 3) {}

  void init(Rng& rng) {
    gamma_conv.init(rng);
    beta_conv.init(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& guid) {
    guid_h_ = guid.h;
    guid_w_ = guid.w;
    resized_ = (guid.h != x.h || guid.w != x.w);
    const Tensor<T> g = resized_ ? nearest_resize(guid, x.h, x.w) : guid;
    if (g.c != gamma_conv.in_c)
      throw std::runtime_error("SpadeNorm: guidance channel mismatch");

    Tensor<T> gamma = gamma_conv.forward(g);
    Tensor<T> beta = beta_conv.forward(g);

    const int n = x.pixels();
    inv_std_.resize(x.c);
    xhat_ = Tensor<T>(x.c, x.h, x.w);
    for (int c = 0; c < x.c; ++c) {
      const T mu = x.m.row(c).mean();
      const T var = (x.m.row(c).array() - mu).square().sum() / static_cast<T>(n);
      inv_std_(c) = T(1) / std::sqrt(var + eps);
      xhat_.m.row(c) = (x.m.row(c).array() - mu) * inv_std_(c);
    }
    gamma_ = gamma.m;

    Tensor<T> y(x.c, x.h, x.w);
    y.m = xhat_.m.array() * (T(1) + gamma.m.array()) + beta.m.array();
    return y;
  }

  // returns (dx, dguid)
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& dy) {
    Tensor<T> dgamma(dy.c, dy.h, dy.w), dbeta = dy;
    dgamma.m = dy.m.array() * xhat_.m.array();
    Tensor<T> dg = gamma_conv.backward(dgamma);
    dg.m += beta_conv.backward(dbeta).m;
    Tensor<T> dguid = resized_ ? nearest_resize_backward(dg, guid_h_, guid_w_) : std::move(dg);

    const int n = dy.pixels();
    Tensor<T> dx(dy.c, dy.h, dy.w);
    for (int c = 0; c < dy.c; ++c) {
      const auto dxhat = (dy.m.row(c).array() * (T(1) + gamma_.row(c).array())).eval();
      const T mean_d = dxhat.sum() / static_cast<T>(n);
      const T mean_dx = (dxhat * xhat_.m.row(c).array()).sum() / static_cast<T>(n);
      dx.m.row(c) =
          (inv_std_(c) * (dxhat - mean_d - xhat_.m.row(c).array() * mean_dx)).matrix();
    }
    return {std::move(dx), std::move(dguid)};
  }

  void collect(ParamList<T>& ps) {
    gamma_conv.collect(ps);
    beta_conv.collect(ps);
  }

 private:
  Tensor<T> xhat_;
  Mat gamma_;
  Vec inv_std_;
  int guid_h_ = 0, guid_w_ = 0;
  bool resized_ = false;
};

// Guided residual unit followed by 2x nearest upsampling: two
// (spade -> leaky rectifier -> conv) legs plus a skip path.
template <typename T>
struct ReplenishBlock {
  int in_c = 0, out_c = 0, mid_c = 0, guid_c = 0;
  SpadeNorm<T> sp1, sp2;
  Conv2d<T> conv1, conv2, skip_conv;
  LeakyRelu<T> act1, act2;
  bool has_skip = false;

  ReplenishBlock() = default;
  ReplenishBlock(int in_c_, int out_c_, int guid_c_)
      : in_c(in_c_),
        out_c(out_c_),
        mid_c(std::min(in_c_, out_c_)),
        guid_c(guid_c_),
        sp1(in_c_, guid_c_),
        sp2(std::min(in_c_, out_c_), guid_c_),
        conv1(in_c_, std::min(in_c_, out_c_), 3),
        conv2(std::min(in_c_, out_c_), out_c_, 3),
        has_skip(in_c_ != out_c_) {
    if (has_skip) skip_conv = Conv2d<T>(in_c_, out_c_, 1);
  }

  void init(Rng& rng) {
    sp1.init(rng);
    sp2.init(rng);
    conv1.init(rng);
    conv2.init(rng);
    if (has_skip) skip_conv.init(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& guid) {
    Tensor<T> a = act1.forward(sp1.forward(x, guid));
    a = conv1.forward(a);
    Tensor<T> c = conv2.forward(act2.forward(sp2.forward(a, guid)));
    c.m += has_skip ? skip_conv.forward(x).m : x.m;
    return upsample2_nearest(c);
  }

  // returns (dx, dguid)
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& dout) {
    Tensor<T> dy = upsample2_backward(dout);
    auto [da, dguid2] = sp2.backward(act2.backward(conv2.backward(dy)));
    auto [dx, dguid1] = sp1.backward(act1.backward(conv1.backward(da)));
    dx.m += has_skip ? skip_conv.backward(dy).m : dy.m;
    dguid1.m += dguid2.m;
    return {std::move(dx), std::move(dguid1)};
  }

  void collect(ParamList<T>& ps) {
    sp1.collect(ps);
    conv1.collect(ps);
    sp2.collect(ps);
    conv2.collect(ps);
    if (has_skip) skip_conv.collect(ps);
  }
};

}  // namespace frn
