#include "frn/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "frn/io.hpp"

namespace frn {

namespace {

// separable convolution along one axis with symmetric padding
void convolve_axis(Eigen::MatrixXd& px, int h, int w, const std::vector<double>& k, bool vertical) {
  const int r = static_cast<int>(k.size() - 1) / 2;
  const int c = static_cast<int>(px.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, h * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int t = -r; t <= r; ++t) {
        const int sy = vertical ? mirror_index(y + t, h) : y;
        const int sx = vertical ? x : mirror_index(x + t, w);
        out.col(y * w + x) += k[t + r] * px.col(sy * w + sx);
      }
    }
  }
  px = std::move(out);
}

void convolve2d(Eigen::MatrixXd& px, int h, int w, const Eigen::MatrixXd& kernel) {
  const int kh = static_cast<int>(kernel.rows());
  const int kw = static_cast<int>(kernel.cols());
  const int ry = (kh - 1) / 2, rx = (kw - 1) / 2;
  const int c = static_cast<int>(px.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, h * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const double kv = kernel(ky, kx);
          if (kv == 0.0) continue;
          const int sy = mirror_index(y + ky - ry, h);
          const int sx = mirror_index(x + kx - rx, w);
          out.col(y * w + x) += kv * px.col(sy * w + sx);
        }
      }
    }
  }
  px = std::move(out);
}

int map_int(double u, int lo, int hi) {
  return lo + static_cast<int>(std::lround(u * (hi - lo)));
}

}  // namespace

std::string kind_name(DegradationKind k) {
  switch (k) {
    case DegradationKind::GAUSS_BLUR: return "gauss_blur";
    case DegradationKind::MOTION_BLUR: return "motion_blur";
    case DegradationKind::DOWNSAMPLE: return "downsample";
    case DegradationKind::MOSAIC: return "mosaic";
    case DegradationKind::NOISE_GAUSS: return "noise_gauss";
    case DegradationKind::NOISE_POISSON: return "noise_poisson";
    case DegradationKind::NOISE_LAPLACE: return "noise_laplace";
    case DegradationKind::JPEG: return "jpeg";
  }
  throw std::invalid_argument("unknown degradation kind");
}

DegradationKind kind_from_name(const std::string& name) {
  static const std::map<std::string, DegradationKind> table = {
      {"gauss_blur", DegradationKind::GAUSS_BLUR},
      {"motion_blur", DegradationKind::MOTION_BLUR},
      {"downsample", DegradationKind::DOWNSAMPLE},
      {"mosaic", DegradationKind::MOSAIC},
      {"noise_gauss", DegradationKind::NOISE_GAUSS},
      {"noise_poisson", DegradationKind::NOISE_POISSON},
      {"noise_laplace", DegradationKind::NOISE_LAPLACE},
      {"jpeg", DegradationKind::JPEG},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown degradation kind: " + name);
  return it->second;
}

Image gaussian_blur(const Image& img, double sigma) {
  check_image(img, "gaussian_blur");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be positive");
  // radius 4 sigma keeps the semigroup property below 1e-4
  const int r = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;

  Image out = img;
  convolve_axis(out.px, out.h, out.w, k, false);
  convolve_axis(out.px, out.h, out.w, k, true);
  return clamp01(std::move(out));
}

Image motion_blur(const Image& img, int length, double angle, Seed /*seed*/) {
  check_image(img, "motion_blur");
  if (length < 1) throw std::invalid_argument("motion_blur: length must be >= 1");
  if (length > std::min(img.h, img.w) / 2)
    throw std::invalid_argument("motion_blur: length exceeds min(H,W)/2");
  if (length == 1) return img;

  // bilinear splat of a length-L line through the kernel center
  const int r = (length - 1 + 1) / 2;  // ceil((L-1)/2)
  const int ks = 2 * r + 1;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(ks, ks);
  const double cx = r, cy = r;
  const double dx = std::cos(angle), dy = std::sin(angle);
  for (int t = 0; t < length; ++t) {
    const double s = t - (length - 1) / 2.0;
    const double px = cx + s * dx;
    const double py = cy + s * dy;
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0, fy = py - y0;
    const double wgt = 1.0 / length;
    auto splat = [&](int yy, int xx, double v) {
      if (yy >= 0 && yy < ks && xx >= 0 && xx < ks) kernel(yy, xx) += v;
    };
    splat(y0, x0, wgt * (1 - fx) * (1 - fy));
    splat(y0, x0 + 1, wgt * fx * (1 - fy));
    splat(y0 + 1, x0, wgt * (1 - fx) * fy);
    splat(y0 + 1, x0 + 1, wgt * fx * fy);
  }
  kernel /= kernel.sum();

  Image out = img;
  convolve2d(out.px, out.h, out.w, kernel);
  return clamp01(std::move(out));
}

Image mosaic(const Image& img, int block) {
  check_image(img, "mosaic");
  if (block < 1) throw std::invalid_argument("mosaic: block must be >= 1");
  if (block > std::min(img.h, img.w))
    throw std::invalid_argument("mosaic: block exceeds min(H,W)");
  if (block == 1) return img;

  Image out = img;
  const int c = img.channels();
  for (int ty = 0; ty < img.h; ty += block) {
    for (int tx = 0; tx < img.w; tx += block) {
      const int bh = std::min(block, img.h - ty);
      const int bw = std::min(block, img.w - tx);
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(c);
      for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) mean += img.px.col((ty + y) * img.w + (tx + x));
      mean /= static_cast<double>(bh * bw);
      for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) out.px.col((ty + y) * img.w + (tx + x)) = mean;
    }
  }
  return out;
}

Image downsample(const Image& img, int factor) {
  check_image(img, "downsample");
  if (factor < 2) throw std::invalid_argument("downsample: factor must be >= 2");
  if (factor > std::min(img.h, img.w))
    throw std::invalid_argument("downsample: factor exceeds min(H,W)");
  return resize_bicubic_to(img, img.h / factor, img.w / factor);
}

Image add_noise(const Image& img, NoiseFamily family, double level, Seed seed) {
  check_image(img, "add_noise");
  if (!(level > 0.0)) throw std::invalid_argument("add_noise: level must be positive");

  Rng rng(seed);
  Image out = img;
  const int n = static_cast<int>(img.px.cols());
  const int c = static_cast<int>(img.px.rows());
  for (int ch = 0; ch < c; ++ch) {
    for (int p = 0; p < n; ++p) {
      const double v = img.px(ch, p);
      double nv = v;
      switch (family) {
        case NoiseFamily::GAUSS:
          nv = v + level * rng.normal();
          break;
        case NoiseFamily::LAPLACE:
          nv = v + rng.laplace(level / std::sqrt(2.0));
          break;
        case NoiseFamily::POISSON:
          nv = static_cast<double>(rng.poisson(v / level)) * level;
          break;
      }
      out.px(ch, p) = std::clamp(nv, 0.0, 1.0);
    }
  }
  return out;
}

Image jpeg_compress(const Image& img, int quality) {
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg_compress: quality must be in 1..100");
  return jpeg_roundtrip(img, quality);
}

DegradationSpec derive_spec(DegradationKind kind, double intensity, Seed seed,
                            const DegradeRanges& r) {
  if (intensity < 0.0 || intensity > 1.0)
    throw std::invalid_argument("derive_spec: intensity must be in [0,1]");
  DegradationSpec s;
  s.kind = kind;
  s.intensity = intensity;
  s.seed = seed;
  switch (kind) {
    case DegradationKind::GAUSS_BLUR:
      s.sigma = r.blur_sigma_min + intensity * (r.blur_sigma_max - r.blur_sigma_min);
      break;
    case DegradationKind::MOTION_BLUR: {
      s.length = map_int(intensity, r.motion_len_min, r.motion_len_max);
      Rng rng(derive_seed(seed, 0x616e676cULL));  // angle stream
      s.angle = rng.uniform(0.0, M_PI);
      break;
    }
    case DegradationKind::DOWNSAMPLE: {
      const int n = static_cast<int>(r.down_factors.size());
      const int idx = std::min(static_cast<int>(intensity * n), n - 1);
      s.factor = r.down_factors[idx];
      break;
    }
    case DegradationKind::MOSAIC:
      s.block = map_int(intensity, r.mosaic_block_min, r.mosaic_block_max);
      break;
    case DegradationKind::NOISE_GAUSS:
    case DegradationKind::NOISE_POISSON:
    case DegradationKind::NOISE_LAPLACE:
      s.level = r.noise_level_min + intensity * (r.noise_level_max - r.noise_level_min);
      break;
    case DegradationKind::JPEG:
      s.quality = map_int(intensity, r.jpeg_q_min, r.jpeg_q_max);
      break;
  }
  return s;
}

DegradationPipeline plan_full_degradation(Seed seed, const DegradeRanges& ranges) {
  Rng rng(seed);

  // one member per family, intensities uniform
  const DegradationKind blur = rng.uniform() < 0.5 ? DegradationKind::GAUSS_BLUR
                                                   : DegradationKind::MOTION_BLUR;
  const double noise_pick = rng.uniform();
  const DegradationKind noise = noise_pick < 1.0 / 3.0   ? DegradationKind::NOISE_GAUSS
                                : noise_pick < 2.0 / 3.0 ? DegradationKind::NOISE_POISSON
                                                         : DegradationKind::NOISE_LAPLACE;

  std::vector<DegradationKind> kinds = {blur, DegradationKind::DOWNSAMPLE, noise,
                                        DegradationKind::JPEG};
  std::vector<double> intensities(4);
  for (double& u : intensities) u = rng.uniform();

  DegradationPipeline p;
  p.order_seed = seed;
  for (int i = 0; i < 4; ++i) {
    auto s = derive_spec(kinds[i], intensities[i], derive_seed(seed, 100 + i), ranges);
    if (s.kind == DegradationKind::DOWNSAMPLE) s.reup = true;  // all stages share one resolution
    p.specs.push_back(s);
  }

  // Fisher-Yates over the four family slots
  for (int i = 3; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(p.specs[i], p.specs[j]);
  }
  return p;
}

Image apply_spec(const Image& img, const DegradationSpec& s) {
  switch (s.kind) {
    case DegradationKind::GAUSS_BLUR:
      return gaussian_blur(img, s.sigma);
    case DegradationKind::MOTION_BLUR:
      return motion_blur(img, s.length, s.angle, s.seed);
    case DegradationKind::DOWNSAMPLE: {
      Image low = downsample(img, s.factor);
      return s.reup ? resize_bicubic_to(low, img.h, img.w) : low;
    }
    case DegradationKind::MOSAIC:
      return mosaic(img, s.block);
    case DegradationKind::NOISE_GAUSS:
      return add_noise(img, NoiseFamily::GAUSS, s.level, s.seed);
    case DegradationKind::NOISE_POISSON:
      return add_noise(img, NoiseFamily::POISSON, s.level, s.seed);
    case DegradationKind::NOISE_LAPLACE:
      return add_noise(img, NoiseFamily::LAPLACE, s.level, s.seed);
    case DegradationKind::JPEG:
      return jpeg_compress(img, s.quality);
  }
  throw std::invalid_argument("apply_spec: unknown kind");
}

Image apply_pipeline(const Image& img, const DegradationPipeline& p) {
  Image out = img;
  for (const auto& s : p.specs) out = apply_spec(out, s);
  return out;
}

std::pair<Image, DegradationPipeline> compose_full_degradation(const Image& img, Seed seed,
                                                               const DegradeRanges& ranges) {
  DegradationPipeline p = plan_full_degradation(seed, ranges);
  return {apply_pipeline(img, p), p};
}

nlohmann::json pipeline_to_json(const DegradationPipeline& p) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : p.specs) {
    nlohmann::json j{{"kind", kind_name(s.kind)}, {"intensity", s.intensity}, {"seed", s.seed.value}};
    switch (s.kind) {
      case DegradationKind::GAUSS_BLUR: j["sigma"] = s.sigma; break;
      case DegradationKind::MOTION_BLUR:
        j["length"] = s.length;
        j["angle"] = s.angle;
        break;
      case DegradationKind::DOWNSAMPLE:
        j["factor"] = s.factor;
        j["reup"] = s.reup;
        break;
      case DegradationKind::MOSAIC: j["block"] = s.block; break;
      case DegradationKind::NOISE_GAUSS:
      case DegradationKind::NOISE_POISSON:
      case DegradationKind::NOISE_LAPLACE: j["level"] = s.level; break;
      case DegradationKind::JPEG: j["quality"] = s.quality; break;
    }
    stages.push_back(std::move(j));
  }
  return nlohmann::json{{"order_seed", p.order_seed.value}, {"stages", std::move(stages)}};
}

DegradationPipeline pipeline_from_json(const nlohmann::json& j) {
  DegradationPipeline p;
  p.order_seed.value = j.at("order_seed").get<std::uint64_t>();
  for (const auto& js : j.at("stages")) {
    DegradationSpec s;
    s.kind = kind_from_name(js.at("kind").get<std::string>());
    s.intensity = js.at("intensity").get<double>();
    s.seed.value = js.at("seed").get<std::uint64_t>();
    switch (s.kind) {
      case DegradationKind::GAUSS_BLUR: s.sigma = js.at("sigma").get<double>(); break;
      case DegradationKind::MOTION_BLUR:
        s.length = js.at("length").get<int>();
        s.angle = js.at("angle").get<double>();
        break;
      case DegradationKind::DOWNSAMPLE:
        s.factor = js.at("factor").get<int>();
        s.reup = js.at("reup").get<bool>();
        break;
      case DegradationKind::MOSAIC: s.block = js.at("block").get<int>(); break;
      case DegradationKind::NOISE_GAUSS:
      case DegradationKind::NOISE_POISSON:
      case DegradationKind::NOISE_LAPLACE: s.level = js.at("level").get<double>(); break;
      case DegradationKind::JPEG: s.quality = js.at("quality").get<int>(); break;
    }
    p.specs.push_back(s);
  }
  return p;
}

}  // namespace frn
