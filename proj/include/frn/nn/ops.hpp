#pragma once

#include "frn/tensor.hpp"

namespace frn {

template <typename T>
struct LeakyRelu {
  T slope = static_cast<T>(0.2);

  Tensor<T> forward(const Tensor<T>& x) {
    x_ = x.m;
    Tensor<T> y = x;
    y.m = x.m.array().max(x.m.array() * slope).matrix();
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = dy;
    dx.m = (x_.array() > 0).select(dy.m, dy.m * slope);
    return dx;
  }

 private:
  typename Tensor<T>::Mat x_;
};

template <typename T>
struct Tanh {
  Tensor<T> forward(const Tensor<T>& x) {
    y_ = x;
    y_.m = x.m.array().tanh().matrix();
    return y_;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = dy;
    dx.m = dy.m.array() * (T(1) - y_.m.array().square());
    return dx;
  }

 private:
  Tensor<T> y_;
};

// stride-2 decimation (keep even-index pixels)
template <typename T>
Tensor<T> decimate2(const Tensor<T>& x) {
  Tensor<T> y(x.c, (x.h + 1) / 2, (x.w + 1) / 2);
  for (int oy = 0; oy < y.h; ++oy)
    for (int ox = 0; ox < y.w; ++ox) y.m.col(oy * y.w + ox) = x.m.col(2 * oy * x.w + 2 * ox);
  return y;
}

template <typename T>
Tensor<T> decimate2_backward(const Tensor<T>& dy, int in_h, int in_w) {
  Tensor<T> dx(dy.c, in_h, in_w);
  for (int oy = 0; oy < dy.h; ++oy)
    for (int ox = 0; ox < dy.w; ++ox) dx.m.col(2 * oy * in_w + 2 * ox) = dy.m.col(oy * dy.w + ox);
  return dx;
}

template <typename T>
Tensor<T> upsample2_nearest(const Tensor<T>& x) {
  Tensor<T> y(x.c, 2 * x.h, 2 * x.w);
  for (int y0 = 0; y0 < x.h; ++y0)
    for (int x0 = 0; x0 < x.w; ++x0) {
      const auto col = x.m.col(y0 * x.w + x0);
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) y.m.col((2 * y0 + dy) * y.w + (2 * x0 + dx)) = col;
    }
  return y;
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& dy) {
  Tensor<T> dx(dy.c, dy.h / 2, dy.w / 2);
  for (int y0 = 0; y0 < dx.h; ++y0)
    for (int x0 = 0; x0 < dx.w; ++x0) {
      auto col = dx.m.col(y0 * dx.w + x0);
      for (int oy = 0; oy < 2; ++oy)
        for (int ox = 0; ox < 2; ++ox) col += dy.m.col((2 * y0 + oy) * dy.w + (2 * x0 + ox));
    }
  return dx;
}

// 2x2 average pooling; requires even dims
template <typename T>
Tensor<T> avgpool2(const Tensor<T>& x) {
  if (x.h % 2 != 0 || x.w % 2 != 0)
    throw std::invalid_argument("avgpool2: dims must be even");
  Tensor<T> y(x.c, x.h / 2, x.w / 2);
  for (int oy = 0; oy < y.h; ++oy)
    for (int ox = 0; ox < y.w; ++ox) {
      y.m.col(oy * y.w + ox) =
          (x.m.col(2 * oy * x.w + 2 * ox) + x.m.col(2 * oy * x.w + 2 * ox + 1) +
           x.m.col((2 * oy + 1) * x.w + 2 * ox) + x.m.col((2 * oy + 1) * x.w + 2 * ox + 1)) *
          static_cast<T>(0.25);
    }
  return y;
}

template <typename T>
Tensor<T> avgpool2_backward(const Tensor<T>& dy) {
  Tensor<T> dx(dy.c, dy.h * 2, dy.w * 2);
  for (int oy = 0; oy < dy.h; ++oy)
    for (int ox = 0; ox < dy.w; ++ox) {
      const auto col = (dy.m.col(oy * dy.w + ox) * static_cast<T>(0.25)).eval();
      dx.m.col(2 * oy * dx.w + 2 * ox) = col;
      dx.m.col(2 * oy * dx.w + 2 * ox + 1) = col;
      dx.m.col((2 * oy + 1) * dx.w + 2 * ox) = col;
      dx.m.col((2 * oy + 1) * dx.w + 2 * ox + 1) = col;
    }
  return dx;
}

// nearest-neighbor resize to explicit dims; mapping index table reusable by
// the backward scatter
inline std::vector<int> nearest_map(int in_h, int in_w, int oh, int ow) {
  std::vector<int> map(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    const int sy = std::min(in_h - 1, static_cast<int>((y + 0.5) * in_h / oh));
    for (int x = 0; x < ow; ++x) {
      const int sx = std::min(in_w - 1, static_cast<int>((x + 0.5) * in_w / ow));
      map[static_cast<size_t>(y) * ow + x] = sy * in_w + sx;
    }
  }
  return map;
}

template <typename T>
Tensor<T> nearest_resize(const Tensor<T>& x, int oh, int ow) {
  Tensor<T> y(x.c, oh, ow);
  const auto map = nearest_map(x.h, x.w, oh, ow);
  for (int p = 0; p < y.pixels(); ++p) y.m.col(p) = x.m.col(map[p]);
  return y;
}

template <typename T>
Tensor<T> nearest_resize_backward(const Tensor<T>& dy, int in_h, int in_w) {
  Tensor<T> dx(dy.c, in_h, in_w);
  const auto map = nearest_map(in_h, in_w, dy.h, dy.w);
  for (int p = 0; p < dy.pixels(); ++p) dx.m.col(map[p]) += dy.m.col(p);
  return dx;
}

}  // namespace frn
