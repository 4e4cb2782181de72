#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "frn/tensor.hpp"

namespace frn {

// H x W x C raster with values in [0, 1]. Same storage convention as Tensor:
// (C x H*W) matrix, column p = pixel p = y*W + x. C is 1 (GRAY) or 3 (RGB).
struct Image {
  enum class ColorSpace { RGB, GRAY };

  int h = 0, w = 0;
  ColorSpace cs = ColorSpace::RGB;
  Eigen::MatrixXd px;

  Image() = default;
  Image(int h_, int w_, ColorSpace cs_)
      : h(h_), w(w_), cs(cs_), px(Eigen::MatrixXd::Zero(cs_ == ColorSpace::GRAY ? 1 : 3, h_ * w_)) {}

  int channels() const { return cs == ColorSpace::GRAY ? 1 : 3; }
  int pixels() const { return h * w; }

  double& at(int c, int y, int x) { return px(c, y * w + x); }
  double at(int c, int y, int x) const { return px(c, y * w + x); }

  bool same_dims(const Image& o) const {
    return h == o.h && w == o.w && channels() == o.channels();
  }
};

inline void check_image(const Image& img, const char* what) {
  if (img.h < 1 || img.w < 1) throw std::invalid_argument(std::string(what) + ": empty image");
  if (!img.px.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite pixel values");
}

inline Image clamp01(Image img) {
  img.px = img.px.cwiseMax(0.0).cwiseMin(1.0);
  return img;
}

// ITU-R 601 luma, [0,1] range. GRAY images pass through.
inline Eigen::VectorXd luma(const Image& img) {
  if (img.cs == Image::ColorSpace::GRAY) return img.px.row(0).transpose();
  return (0.299 * img.px.row(0) + 0.587 * img.px.row(1) + 0.114 * img.px.row(2)).transpose();
}

inline Image to_gray(const Image& img) {
  Image g(img.h, img.w, Image::ColorSpace::GRAY);
  g.px.row(0) = luma(img).transpose();
  return g;
}

// [0,1] image -> [-1,1] model feature. GRAY images are replicated to 3 channels.
template <typename T>
Tensor<T> image_to_feature(const Image& img) {
  Tensor<T> t(3, img.h, img.w);
  for (int c = 0; c < 3; ++c) {
    const int src = img.cs == Image::ColorSpace::GRAY ? 0 : c;
    t.m.row(c) = (2.0 * img.px.row(src).array() - 1.0).matrix().template cast<T>();
  }
  return t;
}

template <typename T>
Image feature_to_image(const Tensor<T>& t) {
  if (t.c != 3) throw std::invalid_argument("feature_to_image: expected 3 channels");
  Image img(t.h, t.w, Image::ColorSpace::RGB);
  img.px = ((t.m.template cast<double>().array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0);
  return img;
}

namespace detail {
// Catmull-Rom cubic kernel (a = -0.5), support |t| < 2.
inline double cubic_weight(double t) {
  t = std::fabs(t);
  if (t < 1.0) return ((1.5 * t - 2.5) * t) * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

// One separable bicubic pass along a row-major axis of length n -> on.
// src/dst are (C x n) pixel blocks accessed through a sampler lambda.
struct CubicTaps {
  int idx[4];
  double w[4];
};

inline CubicTaps cubic_taps(int d, int n, int on) {
  CubicTaps taps;
  const double s = (static_cast<double>(d) + 0.5) * n / on - 0.5;
  const int base = static_cast<int>(std::floor(s));
  const double frac = s - base;
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) {
    taps.idx[j] = std::clamp(base - 1 + j, 0, n - 1);
    taps.w[j] = cubic_weight(frac + 1.0 - j);
    sum += taps.w[j];
  }
  for (double& x : taps.w) x /= sum;  // constants map to constants exactly
  return taps;
}
}  // namespace detail

// Catmull-Rom bicubic resampling to explicit output dimensions, clamped to [0,1].
inline Image resize_bicubic_to(const Image& img, int oh, int ow) {
  check_image(img, "resize_bicubic");
  if (oh < 1 || ow < 1) throw std::invalid_argument("resize_bicubic: output dimensions must be >= 1");
  const int c = img.channels();

  // horizontal pass: (h x w) -> (h x ow)
  Eigen::MatrixXd mid(c, img.h * ow);
  for (int x = 0; x < ow; ++x) {
    const auto taps = detail::cubic_taps(x, img.w, ow);
    for (int y = 0; y < img.h; ++y) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += taps.w[j] * img.px(ch, y * img.w + taps.idx[j]);
        mid(ch, y * ow + x) = acc;
      }
    }
  }

  // vertical pass: (h x ow) -> (oh x ow)
  Image out(oh, ow, img.cs);
  for (int y = 0; y < oh; ++y) {
    const auto taps = detail::cubic_taps(y, img.h, oh);
    for (int x = 0; x < ow; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += taps.w[j] * mid(ch, taps.idx[j] * ow + x);
        out.px(ch, y * ow + x) = acc;
      }
    }
  }
  return clamp01(std::move(out));
}

inline Image resize_bicubic(const Image& img, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("resize_bicubic: scale must be positive");
  const int oh = static_cast<int>(std::floor(img.h * scale));
  const int ow = static_cast<int>(std::floor(img.w * scale));
  if (oh < 1 || ow < 1) throw std::invalid_argument("resize_bicubic: output dimensions must be >= 1");
  if (oh == img.h && ow == img.w && scale == 1.0) return img;
  return resize_bicubic_to(img, oh, ow);
}

// Panel grid for side-by-side comparisons; all panels must share dims.
// Layout is rows x cols row-major; missing trailing panels stay black.
inline Image image_grid(const std::vector<Image>& panels, int cols) {
  if (panels.empty()) throw std::invalid_argument("image_grid: no panels");
  if (cols < 1) throw std::invalid_argument("image_grid: cols must be >= 1");
  const int ph = panels[0].h, pw = panels[0].w;
  const int rows = (static_cast<int>(panels.size()) + cols - 1) / cols;
  Image out(rows * ph, cols * pw, Image::ColorSpace::RGB);
  for (size_t i = 0; i < panels.size(); ++i) {
    const Image& p = panels[i];
    if (p.h != ph || p.w != pw) throw std::invalid_argument("image_grid: panel dims differ");
    const int oy = static_cast<int>(i) / cols * ph;
    const int ox = static_cast<int>(i) % cols * pw;
    for (int c = 0; c < 3; ++c) {
      const int src = p.cs == Image::ColorSpace::GRAY ? 0 : c;
      for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) out.at(c, oy + y, ox + x) = p.at(src, y, x);
    }
  }
  return out;
}

// Center crop to square followed by bicubic resize; dataset preprocessing.
inline Image center_crop_resize(const Image& img, int res) {
  const int side = std::min(img.h, img.w);
  const int y0 = (img.h - side) / 2;
  const int x0 = (img.w - side) / 2;
  Image crop(side, side, img.cs);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) crop.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  if (side == res) return crop;
  return resize_bicubic_to(crop, res, res);
}

}  // namespace frn
