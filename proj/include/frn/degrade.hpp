#pragma once

#include <string>
#include <vector>

#include "frn/image.hpp"
#include "frn/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace frn {

enum class DegradationKind {
  GAUSS_BLUR,
  MOTION_BLUR,
  DOWNSAMPLE,
  MOSAIC,
  NOISE_GAUSS,
  NOISE_POISSON,
  NOISE_LAPLACE,
  JPEG,
};

enum class NoiseFamily { GAUSS, POISSON, LAPLACE };

std::string kind_name(DegradationKind k);
DegradationKind kind_from_name(const std::string& name);

// Intensity -> operator parameter maps. The paper gives no ranges; these
// defaults span a visually plausible severity range at 64x64 working scale
// and are config-exposed.
struct DegradeRanges {
  double blur_sigma_min = 0.5, blur_sigma_max = 3.0;
  int motion_len_min = 3, motion_len_max = 9;
  double noise_level_min = 0.02, noise_level_max = 0.12;
  int jpeg_q_min = 10, jpeg_q_max = 60;
  std::vector<int> down_factors = {2, 4};
  int mosaic_block_min = 2, mosaic_block_max = 16;
};

// One degradation operator with its sampled intensity plus the concrete
// parameters derived from it. Replay uses the concrete parameters so a
// stored pipeline reproduces its output exactly even if ranges are retuned.
struct DegradationSpec {
  DegradationKind kind = DegradationKind::GAUSS_BLUR;
  double intensity = 0.0;  // [0,1]
  Seed seed;               // consumed by stochastic operators only

  double sigma = 0.0;   // GAUSS_BLUR
  int length = 0;       // MOTION_BLUR
  double angle = 0.0;   // MOTION_BLUR, radians
  int factor = 0;       // DOWNSAMPLE
  bool reup = false;    // DOWNSAMPLE: bicubic re-upsample to input size
  int block = 0;        // MOSAIC
  double level = 0.0;   // NOISE_*
  int quality = 0;      // JPEG
};

struct DegradationPipeline {
  std::vector<DegradationSpec> specs;  // applied in order
  Seed order_seed;
};

// ---- individual operators ----

Image gaussian_blur(const Image& img, double sigma);
Image motion_blur(const Image& img, int length, double angle, Seed seed);
Image mosaic(const Image& img, int block);
Image downsample(const Image& img, int factor);
Image add_noise(const Image& img, NoiseFamily family, double level, Seed seed);
Image jpeg_compress(const Image& img, int quality);

// ---- composition ----

// Fills in the concrete parameter for a (kind, intensity) pair.
DegradationSpec derive_spec(DegradationKind kind, double intensity, Seed seed,
                            const DegradeRanges& ranges);

// Samples the full-degradation plan: one operator from each of the
// blur / downsample / noise / jpeg families, shuffled into random order
// with uniform intensities. Never contains MOSAIC. Pure (no image work).
DegradationPipeline plan_full_degradation(Seed seed, const DegradeRanges& ranges);

Image apply_spec(const Image& img, const DegradationSpec& spec);
Image apply_pipeline(const Image& img, const DegradationPipeline& p);

std::pair<Image, DegradationPipeline> compose_full_degradation(const Image& img, Seed seed,
                                                               const DegradeRanges& ranges);

// ---- serialization (structured text record per stage) ----

nlohmann::json pipeline_to_json(const DegradationPipeline& p);
DegradationPipeline pipeline_from_json(const nlohmann::json& j);

}  // namespace frn
