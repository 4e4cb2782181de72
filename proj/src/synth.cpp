#include "frn/synth.hpp"

#include <cmath>
#include <filesystem>

#include "frn/degrade.hpp"
#include "frn/io.hpp"

namespace frn {

namespace {

struct Rgb {
  double r, g, b;
};

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// soft coverage of an axis-aligned ellipse, ~1 inside, 0 outside
double ellipse_mask(double x, double y, double cx, double cy, double ax, double ay,
                    double soft) {
  const double d = std::hypot((x - cx) / ax, (y - cy) / ay);
  return 1.0 - smoothstep(1.0 - soft, 1.0 + soft, d);
}

void blend(Image& img, int y, int x, const Rgb& c, double a) {
  if (a <= 0) return;
  img.at(0, y, x) = (1 - a) * img.at(0, y, x) + a * c.r;
  img.at(1, y, x) = (1 - a) * img.at(1, y, x) + a * c.g;
  img.at(2, y, x) = (1 - a) * img.at(2, y, x) + a * c.b;
}

}  // namespace

Image synth_face(Seed seed, int size) {
  Rng rng(seed);
  const double s = size;
  Image img(size, size, Image::ColorSpace::RGB);

  // background: diagonal gradient between two muted colors
  const Rgb bg0{rng.uniform(0.15, 0.7), rng.uniform(0.15, 0.7), rng.uniform(0.2, 0.8)};
  const Rgb bg1{rng.uniform(0.15, 0.7), rng.uniform(0.15, 0.7), rng.uniform(0.2, 0.8)};
  const double gdir = rng.uniform(0, 2 * M_PI);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double t =
          0.5 + 0.5 * ((x / s - 0.5) * std::cos(gdir) + (y / s - 0.5) * std::sin(gdir));
      img.at(0, y, x) = bg0.r + t * (bg1.r - bg0.r);
      img.at(1, y, x) = bg0.g + t * (bg1.g - bg0.g);
      img.at(2, y, x) = bg0.b + t * (bg1.b - bg0.b);
    }

  // head geometry
  const double cx = s * rng.uniform(0.44, 0.56);
  const double cy = s * rng.uniform(0.5, 0.6);
  const double ax = s * rng.uniform(0.26, 0.34);
  const double ay = s * rng.uniform(0.33, 0.42);
  const double skin_r = rng.uniform(0.55, 0.92);
  const Rgb skin{skin_r, skin_r * rng.uniform(0.72, 0.88), skin_r * rng.uniform(0.5, 0.72)};
  const double lx = std::cos(rng.uniform(0, 2 * M_PI)), ly = -std::fabs(std::sin(rng.uniform(0, M_PI)));

  const Rgb hair{rng.uniform(0.02, 0.45), rng.uniform(0.02, 0.35), rng.uniform(0.02, 0.3)};
  const double hair_top = cy - ay * rng.uniform(0.45, 0.75);

  const double eye_dx = ax * rng.uniform(0.38, 0.5);
  const double eye_y = cy - ay * rng.uniform(0.12, 0.22);
  const double eye_w = ax * rng.uniform(0.16, 0.22), eye_h = ay * rng.uniform(0.07, 0.1);
  const Rgb iris{rng.uniform(0.05, 0.5), rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.6)};
  const double mouth_y = cy + ay * rng.uniform(0.42, 0.55);
  const double mouth_w = ax * rng.uniform(0.35, 0.5), mouth_h = ay * rng.uniform(0.06, 0.1);
  const Rgb mouth{rng.uniform(0.5, 0.8), rng.uniform(0.15, 0.3), rng.uniform(0.15, 0.3)};

  const double soft = 2.5 / s;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double fx = x + 0.5, fy = y + 0.5;

      // head with lambert-ish shading
      const double head = ellipse_mask(fx, fy, cx, cy, ax, ay, soft * 2);
      if (head > 0) {
        const double nx = (fx - cx) / ax, ny = (fy - cy) / ay;
        const double shade = 0.82 + 0.25 * std::max(0.0, nx * lx + ny * ly);
        blend(img, y, x, {skin.r * shade, skin.g * shade, skin.b * shade}, head);
      }

      // hair: upper cap of a slightly larger ellipse
      const double hm = ellipse_mask(fx, fy, cx, cy - ay * 0.12, ax * 1.06, ay * 1.05, soft * 2);
      if (hm > 0 && fy < hair_top) blend(img, y, x, hair, hm);

      // eyes: sclera, iris, pupil
      for (int side = -1; side <= 1; side += 2) {
        const double ex = cx + side * eye_dx;
        const double sc = ellipse_mask(fx, fy, ex, eye_y, eye_w, eye_h, soft * 3);
        if (sc > 0) blend(img, y, x, {0.93, 0.93, 0.9}, sc);
        const double ir = ellipse_mask(fx, fy, ex, eye_y, eye_w * 0.45, eye_h * 0.85, soft * 3);
        if (ir > 0) blend(img, y, x, iris, ir);
        const double pu = ellipse_mask(fx, fy, ex, eye_y, eye_w * 0.18, eye_h * 0.4, soft * 3);
        if (pu > 0) blend(img, y, x, {0.04, 0.04, 0.05}, pu);
        // brow
        const double br =
            ellipse_mask(fx, fy, ex, eye_y - eye_h * 2.2, eye_w * 1.1, eye_h * 0.45, soft * 3);
        if (br > 0) blend(img, y, x, hair, br * 0.85);
      }

      // nose shadow
      const double no =
          ellipse_mask(fx, fy, cx, cy + ay * 0.12, ax * 0.07, ay * 0.18, soft * 3);
      if (no > 0)
        blend(img, y, x, {skin.r * 0.75, skin.g * 0.75, skin.b * 0.75}, no * 0.6);

      // mouth
      const double mo = ellipse_mask(fx, fy, cx, mouth_y, mouth_w, mouth_h, soft * 3);
      if (mo > 0) blend(img, y, x, mouth, mo);
    }
  }

  // low-amplitude smooth texture so local statistics are not degenerate
  Image noise(size, size, Image::ColorSpace::RGB);
  Rng nrng(derive_seed(seed, 0x746578ULL));
  for (int p = 0; p < size * size; ++p) {
    const double v = nrng.uniform(-1.0, 1.0);
    for (int c = 0; c < 3; ++c) noise.px(c, p) = 0.5 + v * 0.5;
  }
  noise = gaussian_blur(noise, 1.0);
  img.px += 0.05 * (noise.px.array() - 0.5).matrix() * 2.0;

  return clamp01(std::move(img));
}

void synth_face_dir(const std::string& dir, int count, int size, Seed seed) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", i);
    save_image(synth_face(derive_seed(seed, i), size), dir + "/" + buf + ".png");
  }
}

}  // namespace frn
