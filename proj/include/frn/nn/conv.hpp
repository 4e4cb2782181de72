#pragma once

#include <cmath>
#include <vector>

#include "frn/nn/param.hpp"
#include "frn/tensor.hpp"

namespace frn {

// Neighbor table for an S x S window with symmetric (reflect) padding.
// nbr[p * k2 + off] = source pixel index for output pixel p and window
// offset off = ky * k + kx. Output centers sit at (oy*stride, ox*stride).
inline std::vector<int> conv_neighbor_table(int h, int w, int k, int stride, int& out_h,
                                            int& out_w) {
  const int r = (k - 1) / 2;
  out_h = (h + stride - 1) / stride;
  out_w = (w + stride - 1) / stride;
  std::vector<int> nbr(static_cast<size_t>(out_h) * out_w * k * k);
  size_t q = 0;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const int cy = oy * stride, cx = ox * stride;
      for (int ky = 0; ky < k; ++ky) {
        const int sy = mirror_index(cy + ky - r, h);
        for (int kx = 0; kx < k; ++kx) {
          const int sx = mirror_index(cx + kx - r, w);
          nbr[q++] = sy * w + sx;
        }
      }
    }
  }
  return nbr;
}

// Patch matrix: (in_c * k2) x n_out, column p holds the window around output
// pixel p, rows ordered offset-major / channel-minor (row = off * in_c + c).
template <typename T>
void im2col(const Tensor<T>& x, const std::vector<int>& nbr, int k2,
            typename Tensor<T>::Mat& cols) {
  const int n = static_cast<int>(nbr.size()) / k2;
  cols.resize(static_cast<long>(x.c) * k2, n);
  for (int p = 0; p < n; ++p)
    for (int off = 0; off < k2; ++off)
      cols.col(p).segment(static_cast<long>(off) * x.c, x.c) = x.m.col(nbr[p * k2 + off]);
}

template <typename T>
void col2im_add(const typename Tensor<T>::Mat& dcols, const std::vector<int>& nbr, int k2,
                Tensor<T>& dx) {
  const int n = static_cast<int>(nbr.size()) / k2;
  for (int p = 0; p < n; ++p)
    for (int off = 0; off < k2; ++off)
      dx.m.col(nbr[p * k2 + off]) += dcols.col(p).segment(static_cast<long>(off) * dx.c, dx.c);
}

// Plain spatial convolution (Eqn-style content-agnostic path): shared kernel
// weights over the whole image, reflect padding, optional stride.
template <typename T>
struct Conv2d {
  using Mat = typename Tensor<T>::Mat;

  int in_c = 0, out_c = 0, k = 3, stride = 1;
  bool frozen = false;  // skip weight-gradient accumulation (fixed extractors)
  Param<T> w;           // out_c x (k*k*in_c), column = off * in_c + c
  Param<T> b;           // out_c x 1

  Conv2d() = default;
  Conv2d(int in_c_, int out_c_, int k_, int stride_ = 1)
      : in_c(in_c_), out_c(out_c_), k(k_), stride(stride_) {
    if (k % 2 == 0) throw std::invalid_argument("Conv2d: kernel size must be odd");
    w.resize(out_c, k * k * in_c);
    b.resize(out_c, 1);
  }

  void init(Rng& rng) { w.init_normal(rng, std::sqrt(2.0 / (k * k * in_c))); }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.c != in_c) throw std::invalid_argument("Conv2d: channel mismatch");
    in_h_ = x.h;
    in_w_ = x.w;
    nbr_ = conv_neighbor_table(x.h, x.w, k, stride, out_h_, out_w_);
    im2col(x, nbr_, k * k, cols_);
    Tensor<T> y(out_c, out_h_, out_w_);
    y.m.noalias() = w.v * cols_;
    y.m.colwise() += b.v.col(0);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!frozen) {
      w.g.noalias() += dy.m * cols_.transpose();
      b.g.col(0) += dy.m.rowwise().sum();
    }
    Mat dcols = w.v.transpose() * dy.m;
    Tensor<T> dx(in_c, in_h_, in_w_);
    col2im_add(dcols, nbr_, k * k, dx);
    return dx;
  }

  void collect(ParamList<T>& ps) {
    ps.push_back(&w);
    ps.push_back(&b);
  }

 private:
  Mat cols_;
  std::vector<int> nbr_;
  int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
};

}  // namespace frn
