#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace frn {

// Dense C x H x W activation tensor. Storage is a (C x H*W) column-major
// matrix so that column p is the feature vector at pixel p (p = y*W + x);
// convolutions then reduce to GEMMs over im2col patch matrices.
template <typename T>
struct Tensor {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

  int c = 0, h = 0, w = 0;
  int stage_index = 0;
  Mat m;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), m(Mat::Zero(c_, h_ * w_)) {}

  static Tensor zeros(int c, int h, int w) { return Tensor(c, h, w); }

  static Tensor zeros_like(const Tensor& o) {
    Tensor t(o.c, o.h, o.w);
    t.stage_index = o.stage_index;
    return t;
  }

  int pixels() const { return h * w; }
  long size() const { return static_cast<long>(c) * h * w; }

  T& at(int ch, int y, int x) { return m(ch, y * w + x); }
  T at(int ch, int y, int x) const { return m(ch, y * w + x); }

  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t(c, h, w);
    t.stage_index = stage_index;
    t.m = m.template cast<U>();
    return t;
  }
};

template <typename T>
void require_shape(const Tensor<T>& t, int c, int h, int w, const char* what) {
  if (t.c != c || t.h != h || t.w != w)
    throw std::invalid_argument(std::string(what) + ": tensor shape mismatch");
}

// Mirror (symmetric, edge-inclusive: abc|cba) index fold into [0, n).
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace frn
