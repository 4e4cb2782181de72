#include "frn/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace frn {

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

Eigen::MatrixXd ssim_window() {
  Eigen::VectorXd g(kWin);
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    g(i) = std::exp(-0.5 * d * d / (kSigma * kSigma));
  }
  Eigen::MatrixXd w = g * g.transpose();
  return w / w.sum();
}

// byte-space luma as an h x w matrix
Eigen::MatrixXd luma_bytes(const Image& img) {
  Eigen::VectorXd l = luma(img) * 255.0;
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
             l.data(), img.h, img.w)
      .eval();
}

struct SsimSums {
  double ssim = 0, cs = 0;
};

// means of the local SSIM and contrast-structure maps (valid windows only)
SsimSums ssim_maps(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  static const Eigen::MatrixXd w = ssim_window();
  const int h = static_cast<int>(x.rows()), wd = static_cast<int>(x.cols());
  if (h < kWin || wd < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  double acc_ssim = 0, acc_cs = 0;
  long count = 0;
  for (int cy = 0; cy + kWin <= h; ++cy) {
    for (int cx = 0; cx + kWin <= wd; ++cx) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int u = 0; u < kWin; ++u) {
        for (int v = 0; v < kWin; ++v) {
          const double wv = w(u, v);
          const double a = x(cy + u, cx + v);
          const double b = y(cy + u, cx + v);
          mx += wv * a;
          my += wv * b;
          xx += wv * a * a;
          yy += wv * b * b;
          xy += wv * a * b;
        }
      }
      const double sx = xx - mx * mx;
      const double sy = yy - my * my;
      const double sxy = xy - mx * my;
      const double cs = (2 * sxy + kC2) / (sx + sy + kC2);
      const double lum = (2 * mx * my + kC1) / (mx * mx + my * my + kC1);
      acc_ssim += lum * cs;
      acc_cs += cs;
      ++count;
    }
  }
  return {acc_ssim / count, acc_cs / count};
}

Eigen::MatrixXd halve(const Eigen::MatrixXd& x) {
  const int h = static_cast<int>(x.rows()) / 2, w = static_cast<int>(x.cols()) / 2;
  Eigen::MatrixXd y(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      y(i, j) = 0.25 * (x(2 * i, 2 * j) + x(2 * i, 2 * j + 1) + x(2 * i + 1, 2 * j) +
                        x(2 * i + 1, 2 * j + 1));
  return y;
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("psnr: dimension mismatch");
  const double mse = (a.px - b.px).array().square().mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double ssim(const Image& a, const Image& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("ssim: dimension mismatch");
  return ssim_maps(luma_bytes(a), luma_bytes(b)).ssim;
}

double ms_ssim(const Image& a, const Image& b, int scales) {
  if (!a.same_dims(b)) throw std::invalid_argument("ms_ssim: dimension mismatch");
  static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

  const int side = std::min(a.h, a.w);
  int max_scales = 0;
  for (int s = side; s >= kWin && max_scales < 5; s /= 2) ++max_scales;
  if (max_scales == 0)
    throw std::invalid_argument("ms_ssim: image too small for even one scale");
  const int m = scales > 0 ? scales : max_scales;
  if (m > max_scales)
    throw std::invalid_argument("ms_ssim: requested more scales than the image supports");

  double wsum = 0;
  for (int j = 0; j < m; ++j) wsum += kWeights[j];

  Eigen::MatrixXd x = luma_bytes(a), y = luma_bytes(b);
  double result = 1.0;
  for (int j = 0; j < m; ++j) {
    const SsimSums s = ssim_maps(x, y);
    const double weight = kWeights[j] / wsum;
    const double term = j + 1 == m ? s.ssim : s.cs;
    result *= std::pow(std::max(term, 0.0), weight);
    if (j + 1 < m) {
      x = halve(x);
      y = halve(y);
    }
  }
  return result;
}

double frechet_from_stats(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a,
                          const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& cov_b) {
  const Eigen::MatrixXd ra = sqrt_psd(cov_a);
  const Eigen::MatrixXd inner = ra * cov_b * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()));
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d =
      (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt;
  return std::max(d, 0.0);
}

double frechet_from_features(const Eigen::MatrixXd& fa, const Eigen::MatrixXd& fb) {
  if (fa.rows() == 0 || fb.rows() == 0)
    throw std::invalid_argument("frechet_from_features: empty feature set");
  if (fa.cols() != fb.cols())
    throw std::invalid_argument("frechet_from_features: feature dim mismatch");
  auto stats = [](const Eigen::MatrixXd& f) {
    const Eigen::VectorXd mu = f.colwise().mean().transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(f.cols(), f.cols());
    if (f.rows() > 1) {
      const Eigen::MatrixXd centered = f.rowwise() - mu.transpose();
      cov = centered.transpose() * centered / static_cast<double>(f.rows() - 1);
    }
    return std::make_pair(mu, cov);
  };
  const auto [mu_a, cov_a] = stats(fa);
  const auto [mu_b, cov_b] = stats(fb);
  return frechet_from_stats(mu_a, cov_a, mu_b, cov_b);
}

}  // namespace frn
