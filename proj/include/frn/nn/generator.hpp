#pragma once

#include <set>
#include <vector>

#include "frn/nn/spade.hpp"
#include "frn/nn/suppress.hpp"

namespace frn {

enum class GuidanceMode {
  ENCODER,   // suppression hierarchy (default architecture)
  LQ_IMAGE,  // degraded input resized per stage (16xFace-style ablation)
};

// Nested multi-stage generator: suppression encoder + cascaded replenishment
// decoder starting from a learned constant tensor. The decoder consumes the
// guidance hierarchy deepest-first, doubling resolution per block.
template <typename T>
struct Generator {
  int n_stages = 0;
  int resolution = 0;
  int base_res = 0;  // head_const spatial side = resolution / 2^n_stages
  std::vector<int> enc_channels;
  GuidanceMode guidance_mode = GuidanceMode::ENCODER;

  SuppressionEncoder<T> encoder;
  Param<T> head_const;  // C_top x (base_res^2)
  std::vector<ReplenishBlock<T>> blocks;  // blocks[s] consumes guidance s
  Conv2d<T> to_rgb;
  Tanh<T> out_act;

  Generator() = default;

  Generator(int resolution_, const std::vector<int>& channels, CorrelationAct act, Rng& rng,
            GuidanceMode mode = GuidanceMode::ENCODER)
      : n_stages(static_cast<int>(channels.size())),
        resolution(resolution_),
        enc_channels(channels),
        guidance_mode(mode) {
    if (resolution % (1 << n_stages) != 0)
      throw std::invalid_argument("Generator: resolution must be divisible by 2^n_stages");
    base_res = resolution >> n_stages;

    if (guidance_mode == GuidanceMode::ENCODER)
      encoder = SuppressionEncoder<T>::make(3, channels, act, rng);

    head_const.resize(channels.back(), base_res * base_res);
    head_const.init_normal(rng, 1.0);

    for (int s = 0; s < n_stages; ++s) {
      const int in_c = (s == n_stages - 1) ? channels.back() : dec_channels(s + 1);
      const int guid_c = guidance_mode == GuidanceMode::ENCODER ? channels[s] : 3;
      blocks.emplace_back(in_c, dec_channels(s), guid_c);
      blocks.back().init(rng);
    }
    to_rgb = Conv2d<T>(dec_channels(0), 3, 3);
    to_rgb.init(rng);
  }

  int dec_channels(int s) const { return enc_channels[std::max(s - 1, 0)]; }

  // generator output in [0,1] as a tensor; Image conversion is separate so
  // the training loss path stays differentiable end to end
  Tensor<T> forward_t(const Image& lq) {
    if (lq.h != resolution || lq.w != resolution)
      throw std::invalid_argument("generator: input resolution mismatch");
    feats_ = make_guidance(lq);
    Tensor<T> d(head_const.v.rows(), base_res, base_res);
    d.m = head_const.v;
    for (int s = n_stages - 1; s >= 0; --s) d = blocks[s].forward(d, feats_[s]);
    Tensor<T> y = out_act.forward(to_rgb.forward(d));
    y.m = ((y.m.array() + T(1)) * T(0.5)).matrix();
    return y;
  }

  Image forward(const Image& lq) { return tensor01_to_image(forward_t(lq)); }

  // Fig.4-style probe: guidance at inactive stages replaced by zeros.
  Image ablate_forward(const Image& lq, const std::set<int>& active) {
    for (int s : active)
      if (s < 0 || s >= n_stages)
        throw std::invalid_argument("ablate: stage index out of range [0," +
                                    std::to_string(n_stages - 1) + "]");
    std::vector<Tensor<T>> feats = make_guidance(lq);
    Tensor<T> d(head_const.v.rows(), base_res, base_res);
    d.m = head_const.v;
    for (int s = n_stages - 1; s >= 0; --s) {
      const Tensor<T>& g = feats[s];
      if (active.count(s)) {
        d = blocks[s].forward(d, g);
      } else {
        Tensor<T> zero = Tensor<T>::zeros(g.c, g.h, g.w);
        d = blocks[s].forward(d, zero);
      }
    }
    Tensor<T> y = out_act.forward(to_rgb.forward(d));
    y.m = ((y.m.array() + T(1)) * T(0.5)).matrix();
    return tensor01_to_image(y);
  }

  // d_out01: gradient w.r.t. the [0,1] output tensor of the last forward_t
  void backward(const Tensor<T>& d_out01) {
    Tensor<T> d = d_out01;
    d.m *= T(0.5);  // through the [-1,1] -> [0,1] rescale
    d = to_rgb.backward(out_act.backward(d));

    std::vector<Tensor<T>> dfeats(n_stages);
    for (int s = 0; s < n_stages; ++s) {
      auto [dx, dguid] = blocks[s].backward(d);
      dfeats[s] = std::move(dguid);
      d = std::move(dx);
    }
    head_const.g += d.m;
    if (guidance_mode == GuidanceMode::ENCODER) encoder.backward(std::move(dfeats));
    // LQ_IMAGE guidance is input data; its gradient is discarded
  }

  void collect(ParamList<T>& ps) {
    if (guidance_mode == GuidanceMode::ENCODER) encoder.collect(ps);
    ps.push_back(&head_const);
    for (auto& blk : blocks) blk.collect(ps);
    to_rgb.collect(ps);
  }

  static Image tensor01_to_image(const Tensor<T>& t) {
    Image img(t.h, t.w, Image::ColorSpace::RGB);
    img.px = t.m.template cast<double>().cwiseMax(0.0).cwiseMin(1.0);
    return img;
  }

 private:
  std::vector<Tensor<T>> make_guidance(const Image& lq) {
    if (guidance_mode == GuidanceMode::ENCODER) return encode_hierarchy(lq, encoder);
    // 16xFace-style: the degraded input itself, resized per stage
    std::vector<Tensor<T>> feats;
    Tensor<T> t = image_to_feature<T>(lq);
    for (int s = 0; s < n_stages; ++s) {
      const int side = resolution >> (s + 1);
      Tensor<T> g = nearest_resize(t, side, side);
      g.stage_index = s;
      feats.push_back(std::move(g));
    }
    return feats;
  }

  std::vector<Tensor<T>> feats_;
};

}  // namespace frn
