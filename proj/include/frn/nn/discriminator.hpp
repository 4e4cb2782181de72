#pragma once

#include <vector>

#include "frn/image.hpp"
#include "frn/nn/conv.hpp"
#include "frn/nn/ops.hpp"

namespace frn {

// One patch discriminator: n_layers stride-2 convs with leaky rectifiers,
// then a stride-1 conv to a single-channel logit map (raw, no sigmoid —
// the least-squares objective consumes unbounded logits).
template <typename T>
struct PatchDiscriminator {
  std::vector<Conv2d<T>> convs;
  std::vector<LeakyRelu<T>> acts;

  PatchDiscriminator() = default;
  PatchDiscriminator(int in_c, int base_c, int n_layers, Rng& rng) {
    int c = in_c;
    int oc = base_c;
    for (int l = 0; l < n_layers; ++l) {
      convs.emplace_back(c, oc, 3, 2);
      convs.back().init(rng);
      c = oc;
      oc = std::min(oc * 2, base_c * 8);
    }
    convs.emplace_back(c, 1, 3, 1);
    convs.back().init(rng);
    acts.resize(convs.size() - 1);
  }

  int layer_count() const { return static_cast<int>(convs.size()); }

  // returns every layer activation; back() is the logit map
  std::vector<Tensor<T>> forward(const Tensor<T>& x) {
    std::vector<Tensor<T>> feats;
    feats.reserve(convs.size());
    Tensor<T> cur = x;
    for (size_t l = 0; l + 1 < convs.size(); ++l) {
      cur = acts[l].forward(convs[l].forward(cur));
      feats.push_back(cur);
    }
    feats.push_back(convs.back().forward(cur));
    return feats;
  }

  // dfeats aligned with forward's outputs; empty tensors mean zero gradient
  Tensor<T> backward(const std::vector<Tensor<T>>& dfeats) {
    const int L = layer_count();
    Tensor<T> d;
    if (dfeats[L - 1].size() > 0) d = convs[L - 1].backward(dfeats[L - 1]);
    for (int l = L - 2; l >= 0; --l) {
      if (dfeats[l].size() > 0) {
        if (d.size() == 0) d = dfeats[l];
        else d.m += dfeats[l].m;
      }
      d = convs[l].backward(acts[l].backward(d));
    }
    return d;
  }

  void collect(ParamList<T>& ps) {
    for (auto& c : convs) c.collect(ps);
  }
};

// Per-scale forward results: feats[k] holds every activation of scale k,
// feats[k].back() is that scale's logit map.
template <typename T>
using DiscriminatorFeatures = std::vector<std::vector<Tensor<T>>>;

template <typename T>
std::vector<Tensor<T>> logits_of(const DiscriminatorFeatures<T>& feats) {
  std::vector<Tensor<T>> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(f.back());
  return out;
}

// Multi-scale patch discriminator; scale k sees the input average-pooled
// k times. Input is a [0,1] tensor; conversion to [-1,1] happens inside.
template <typename T>
struct MultiScaleDiscriminator {
  std::vector<PatchDiscriminator<T>> scales;
  int n_layers = 0;

  MultiScaleDiscriminator() = default;
  MultiScaleDiscriminator(int n_scales, int base_c, int n_layers_, Rng& rng)
      : n_layers(n_layers_) {
    for (int k = 0; k < n_scales; ++k) scales.emplace_back(3, base_c, n_layers_, rng);
  }

  DiscriminatorFeatures<T> forward(const Tensor<T>& img01) {
    const int min_side = std::min(img01.h, img01.w) >> (static_cast<int>(scales.size()) - 1);
    if (min_side < (1 << n_layers))
      throw std::invalid_argument("discriminator: resolution too small for stack depth");
    Tensor<T> x = img01;
    x.m = (img01.m.array() * T(2) - T(1)).matrix();
    DiscriminatorFeatures<T> feats;
    for (size_t k = 0; k < scales.size(); ++k) {
      if (k > 0) x = avgpool2(x);
      feats.push_back(scales[k].forward(x));
    }
    return feats;
  }

  // dfeats nested like forward's result; returns gradient w.r.t. img01
  Tensor<T> backward(const DiscriminatorFeatures<T>& dfeats) {
    Tensor<T> dimg;
    for (int k = static_cast<int>(scales.size()) - 1; k >= 0; --k) {
      Tensor<T> d = scales[k].backward(dfeats[k]);
      if (dimg.size() == 0) dimg = std::move(d);
      else dimg.m += d.m;
      if (k > 0) dimg = avgpool2_backward(dimg);
    }
    dimg.m *= T(2);  // through the [0,1] -> [-1,1] conversion
    return dimg;
  }

  void collect(ParamList<T>& ps) {
    for (auto& s : scales) s.collect(ps);
  }
};

// Spec-level operation: per scale, (logit map, every intermediate activation).
template <typename T>
std::vector<std::pair<Tensor<T>, std::vector<Tensor<T>>>> discriminate(
    const Image& img, MultiScaleDiscriminator<T>& d) {
  Tensor<T> t(3, img.h, img.w);
  if (img.cs == Image::ColorSpace::GRAY)
    for (int c = 0; c < 3; ++c) t.m.row(c) = img.px.row(0).template cast<T>();
  else t.m = img.px.template cast<T>();
  auto feats = d.forward(t);
  std::vector<std::pair<Tensor<T>, std::vector<Tensor<T>>>> out;
  for (auto& f : feats) out.emplace_back(f.back(), f);
  return out;
}

}  // namespace frn
