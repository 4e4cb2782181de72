#pragma once

#include <vector>

#include "frn/nn/discriminator.hpp"
#include "frn/nn/perceptual.hpp"

namespace frn {

// ---- least-squares adversarial objective (raw logits vs targets) ----

template <typename T>
T lsgan_mean_sq(const std::vector<Tensor<T>>& logits, T target) {
  if (logits.empty()) throw std::invalid_argument("lsgan loss: empty logit list");
  T acc = 0;
  for (const auto& l : logits)
    acc += (l.m.array() - target).square().sum() / static_cast<T>(l.size());
  return acc / static_cast<T>(logits.size());
}

// loss plus d/dlogits, mean over scales and pixels
template <typename T>
std::pair<T, std::vector<Tensor<T>>> lsgan_mean_sq_grad(const std::vector<Tensor<T>>& logits,
                                                        T target) {
  const T loss = lsgan_mean_sq(logits, target);
  std::vector<Tensor<T>> grads;
  grads.reserve(logits.size());
  const T k = static_cast<T>(logits.size());
  for (const auto& l : logits) {
    Tensor<T> g = l;
    g.m = ((l.m.array() - target) * T(2) / (k * static_cast<T>(l.size()))).matrix();
    grads.push_back(std::move(g));
  }
  return {loss, std::move(grads)};
}

template <typename T>
T lsgan_d_loss(const std::vector<Tensor<T>>& logits_real,
               const std::vector<Tensor<T>>& logits_fake) {
  return lsgan_mean_sq(logits_real, T(1)) + lsgan_mean_sq(logits_fake, T(0));
}

template <typename T>
T lsgan_g_loss(const std::vector<Tensor<T>>& logits_fake) {
  return lsgan_mean_sq(logits_fake, T(1));
}

// ---- multi-scale feature matching: sum over scales and layers of the
// dimension-normalized squared distance ----

template <typename T>
T feature_matching_loss(const DiscriminatorFeatures<T>& feats_real,
                        const DiscriminatorFeatures<T>& feats_fake) {
  if (feats_real.size() != feats_fake.size())
    throw std::invalid_argument("feature_matching_loss: scale count mismatch");
  T acc = 0;
  for (size_t k = 0; k < feats_real.size(); ++k) {
    if (feats_real[k].size() != feats_fake[k].size())
      throw std::invalid_argument("feature_matching_loss: layer count mismatch");
    for (size_t l = 0; l < feats_real[k].size(); ++l) {
      const auto& a = feats_real[k][l];
      const auto& b = feats_fake[k][l];
      if (!a.same_shape(b))
        throw std::invalid_argument("feature_matching_loss: feature shape mismatch");
      acc += (a.m - b.m).squaredNorm() / static_cast<T>(a.size());
    }
  }
  return acc;
}

// loss plus d/dfeats_fake (real features are targets)
template <typename T>
std::pair<T, DiscriminatorFeatures<T>> feature_matching_grad(
    const DiscriminatorFeatures<T>& feats_real, const DiscriminatorFeatures<T>& feats_fake) {
  const T loss = feature_matching_loss(feats_real, feats_fake);
  DiscriminatorFeatures<T> grads(feats_fake.size());
  for (size_t k = 0; k < feats_fake.size(); ++k) {
    for (size_t l = 0; l < feats_fake[k].size(); ++l) {
      Tensor<T> g = feats_fake[k][l];
      g.m = (feats_fake[k][l].m - feats_real[k][l].m) * (T(2) / static_cast<T>(g.size()));
      grads[k].push_back(std::move(g));
    }
  }
  return {loss, std::move(grads)};
}

// ---- perceptual loss over the fixed extractor's taps ----

template <typename T>
T tap_distance(const std::vector<Tensor<T>>& taps_a, const std::vector<Tensor<T>>& taps_b) {
  T acc = 0;
  for (size_t l = 0; l < taps_a.size(); ++l)
    acc += (taps_a[l].m - taps_b[l].m).squaredNorm() / static_cast<T>(taps_a[l].size());
  return acc;
}

template <typename T>
T perceptual_loss(const Image& gt, const Image& gen, PerceptualExtractor<T>& p) {
  if (!gt.same_dims(gen)) throw std::invalid_argument("perceptual_loss: dim mismatch");
  Tensor<T> a(3, gt.h, gt.w), b(3, gen.h, gen.w);
  a.m = gt.px.template cast<T>();
  b.m = gen.px.template cast<T>();
  auto ta = p.forward_taps(a);
  auto tb = p.forward_taps(b);
  return tap_distance(ta, tb);
}

// loss plus d/d gen01 (a [0,1] tensor on the training path)
template <typename T>
std::pair<T, Tensor<T>> perceptual_loss_grad(const Tensor<T>& gt01, const Tensor<T>& gen01,
                                             PerceptualExtractor<T>& p) {
  auto taps_gt = p.forward_taps(gt01);
  auto taps_gen = p.forward_taps(gen01);  // cached forward is the gen pass
  const T loss = tap_distance(taps_gt, taps_gen);
  std::vector<Tensor<T>> dtaps;
  dtaps.reserve(taps_gen.size());
  for (size_t l = 0; l < taps_gen.size(); ++l) {
    Tensor<T> d = taps_gen[l];
    d.m = (taps_gen[l].m - taps_gt[l].m) * (T(2) / static_cast<T>(d.size()));
    dtaps.push_back(std::move(d));
  }
  return {loss, p.backward(dtaps)};
}

// ---- L1 term of the statistical ablation ----

template <typename T>
std::pair<T, Tensor<T>> l1_loss_grad(const Tensor<T>& gt01, const Tensor<T>& gen01) {
  const T n = static_cast<T>(gen01.size());
  Tensor<T> d = gen01;
  d.m = ((gen01.m.array() - gt01.m.array()) > T(0))
            .select(Tensor<T>::Mat::Constant(d.m.rows(), d.m.cols(), T(1) / n),
                    Tensor<T>::Mat::Constant(d.m.rows(), d.m.cols(), -T(1) / n));
  d.m = ((gen01.m.array() == gt01.m.array()).select(Tensor<T>::Mat::Zero(d.m.rows(), d.m.cols()), d.m));
  const T loss = (gen01.m - gt01.m).array().abs().sum() / n;
  return {loss, std::move(d)};
}

// ---- Eqn-6 composition ----

struct GLossParts {
  double adv = 0, fm = 0, perc = 0, l1 = 0;
};

struct LossWeights {
  double lambda_fm = 10.0;
  double lambda_perc = 10.0;
};

inline double total_g_loss(const GLossParts& parts, const LossWeights& w, double l1_weight) {
  if (w.lambda_fm < 0 || w.lambda_perc < 0 || l1_weight < 0)
    throw std::invalid_argument("total_g_loss: weights must be non-negative");
  return parts.adv + w.lambda_fm * parts.fm + w.lambda_perc * parts.perc + l1_weight * parts.l1;
}

}  // namespace frn
