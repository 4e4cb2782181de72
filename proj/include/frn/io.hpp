#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frn/image.hpp"

namespace frn {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decodes a PNG or JPEG file to an Image normalized to [0,1].
// RGB unless the source is single-channel.
Image load_image(const std::string& path);

// Writes an 8-bit PNG, values quantized by round(v * 255) after clamping.
void save_image(const Image& img, const std::string& path);

// Encodes to baseline JPEG (4:4:4, quality 1..100) in memory and decodes back.
Image jpeg_roundtrip(const Image& img, int quality);

// 8-bit quantization used by save_image; exposed for tests.
inline std::uint8_t quantize8(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace frn
