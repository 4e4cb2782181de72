#pragma once

#include <Eigen/Dense>
#include <vector>

#include "frn/rng.hpp"

namespace frn {

// Trainable parameter: value + accumulated gradient, always same shape.
template <typename T>
struct Param {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Mat v, g;

  void resize(int rows, int cols) {
    v.setZero(rows, cols);
    g.setZero(rows, cols);
  }

  void init_normal(Rng& rng, double stddev) {
    for (int c = 0; c < v.cols(); ++c)
      for (int r = 0; r < v.rows(); ++r) v(r, c) = static_cast<T>(rng.normal(0.0, stddev));
    g.setZero();
  }

  long size() const { return v.size(); }
};

template <typename T>
using ParamList = std::vector<Param<T>*>;

template <typename T>
long param_count(const ParamList<T>& ps) {
  long n = 0;
  for (auto* p : ps) n += p->size();
  return n;
}

template <typename T>
void zero_grads(const ParamList<T>& ps) {
  for (auto* p : ps) p->g.setZero();
}

}  // namespace frn
