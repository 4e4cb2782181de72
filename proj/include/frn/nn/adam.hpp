#pragma once

#include <cmath>
#include <vector>

#include "frn/nn/param.hpp"

namespace frn {

// Adaptive-moment optimizer. Two-time-scale defaults (lr_d = 4 * lr_g,
// betas (0, 0.9)) live in the training config, not here.
template <typename T>
struct Adam {
  using Mat = typename Param<T>::Mat;

  T lr = static_cast<T>(1e-4);
  T beta1 = static_cast<T>(0.0);
  T beta2 = static_cast<T>(0.9);
  T eps = static_cast<T>(1e-8);
  long t = 0;

  std::vector<Param<T>*> params;
  std::vector<Mat> m, v;

  void attach(const ParamList<T>& ps) {
    params = ps;
    m.clear();
    v.clear();
    for (auto* p : params) {
      m.push_back(Mat::Zero(p->v.rows(), p->v.cols()));
      v.push_back(Mat::Zero(p->v.rows(), p->v.cols()));
    }
  }

  void step() {
    ++t;
    const T bc1 = T(1) - std::pow(beta1, static_cast<T>(t));
    const T bc2 = T(1) - std::pow(beta2, static_cast<T>(t));
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      m[i] = beta1 * m[i] + (T(1) - beta1) * p.g;
      v[i] = (beta2 * v[i].array() + (T(1) - beta2) * p.g.array().square()).matrix();
      p.v.array() -= lr * (m[i].array() / bc1) / ((v[i].array() / bc2).sqrt() + eps);
    }
  }

  void zero_grad() {
    for (auto* p : params) p->g.setZero();
  }
};

}  // namespace frn
