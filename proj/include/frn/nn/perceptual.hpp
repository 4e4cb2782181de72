#pragma once

#include <string>
#include <vector>

#include "frn/image.hpp"
#include "frn/nn/conv.hpp"
#include "frn/nn/ops.hpp"

namespace frn {

// Fixed (non-trained) convolutional feature stack with a tap after each
// block. Default weights are seeded random — a hermetic stand-in for a
// pretrained backbone that still defines a valid perceptual metric space;
// externally trained weights can be loaded instead.
template <typename T>
struct PerceptualExtractor {
  std::vector<Conv2d<T>> convs;
  std::vector<LeakyRelu<T>> acts;

  PerceptualExtractor() = default;
  explicit PerceptualExtractor(Seed seed, std::vector<int> channels = {16, 32, 64, 64}) {
    Rng rng(seed);
    int c = 3;
    for (int oc : channels) {
      convs.emplace_back(c, oc, 3, 1);
      convs.back().init(rng);
      convs.back().frozen = true;
      c = oc;
    }
    acts.resize(convs.size());
  }

  int tap_count() const { return static_cast<int>(convs.size()); }
  int feature_dim() const { return convs.back().out_c; }

  // taps after each block's activation; blocks are separated by 2x average
  // pooling. Input is a [0,1] tensor, converted to [-1,1] inside.
  std::vector<Tensor<T>> forward_taps(const Tensor<T>& img01) {
    Tensor<T> x = img01;
    x.m = (img01.m.array() * T(2) - T(1)).matrix();
    std::vector<Tensor<T>> taps;
    for (size_t l = 0; l < convs.size(); ++l) {
      if (l > 0) x = avgpool2(x);
      x = acts[l].forward(convs[l].forward(x));
      taps.push_back(x);
    }
    return taps;
  }

  // gradient w.r.t. the [0,1] input; weights stay frozen
  Tensor<T> backward(const std::vector<Tensor<T>>& dtaps) {
    Tensor<T> d;
    for (int l = tap_count() - 1; l >= 0; --l) {
      if (d.size() == 0) d = dtaps[l];
      else d.m += dtaps[l].m;
      d = convs[l].backward(acts[l].backward(d));
      if (l > 0) d = avgpool2_backward(d);
    }
    d.m *= T(2);
    return d;
  }

  // spatially pooled deepest tap; the Frechet feature embedding
  Eigen::VectorXd embed(const Image& img) {
    Tensor<T> t(3, img.h, img.w);
    if (img.cs == Image::ColorSpace::GRAY)
      for (int c = 0; c < 3; ++c) t.m.row(c) = img.px.row(0).template cast<T>();
    else
      t.m = img.px.template cast<T>();
    auto taps = forward_taps(t);
    return taps.back().m.rowwise().mean().template cast<double>();
  }

  void collect(ParamList<T>& ps) {
    for (auto& c : convs) c.collect(ps);
  }
};

}  // namespace frn
