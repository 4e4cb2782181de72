#include <cmath>
#include <iostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "frn/metrics.hpp"

namespace frn {

namespace {

constexpr int kFeatDim = 36;  // 18 NSS features x 2 scales

// gamma-grid lookup tables for (A)GGD shape estimation
struct GammaGrid {
  std::vector<double> gam, r_ggd, r_aggd;
  GammaGrid() {
    for (double g = 0.2; g <= 10.0 + 1e-12; g += 0.001) {
      gam.push_back(g);
      const double g1 = std::tgamma(1.0 / g);
      const double g2 = std::tgamma(2.0 / g);
      const double g3 = std::tgamma(3.0 / g);
      r_ggd.push_back(g1 * g3 / (g2 * g2));
      r_aggd.push_back(g2 * g2 / (g1 * g3));
    }
  }
};

const GammaGrid& grid() {
  static GammaGrid g;
  return g;
}

double ggd_alpha(double rho) {
  const auto& g = grid();
  double best = g.gam[0], bestd = std::abs(rho - g.r_ggd[0]);
  for (size_t i = 1; i < g.gam.size(); ++i) {
    const double d = std::abs(rho - g.r_ggd[i]);
    if (d < bestd) {
      bestd = d;
      best = g.gam[i];
    }
  }
  return best;
}

double aggd_alpha(double rhat_norm) {
  const auto& g = grid();
  double best = g.gam[0], bestd = std::abs(rhat_norm - g.r_aggd[0]);
  for (size_t i = 1; i < g.gam.size(); ++i) {
    const double d = std::abs(rhat_norm - g.r_aggd[i]);
    if (d < bestd) {
      bestd = d;
      best = g.gam[i];
    }
  }
  return best;
}

// 7x7 Gaussian window, sigma = 7/6, used for the local MSCN statistics
const Eigen::MatrixXd& mscn_window() {
  static const Eigen::MatrixXd w = [] {
    Eigen::VectorXd g(7);
    for (int i = 0; i < 7; ++i) {
      const double d = i - 3.0;
      g(i) = std::exp(-0.5 * d * d / ((7.0 / 6.0) * (7.0 / 6.0)));
    }
    Eigen::MatrixXd w2 = g * g.transpose();
    return (w2 / w2.sum()).eval();
  }();
  return w;
}

Eigen::MatrixXd filter_sym(const Eigen::MatrixXd& x, const Eigen::MatrixXd& k) {
  const int h = static_cast<int>(x.rows()), w = static_cast<int>(x.cols());
  const int ry = static_cast<int>(k.rows()) / 2, rx = static_cast<int>(k.cols()) / 2;
  Eigen::MatrixXd y(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double acc = 0;
      for (int u = -ry; u <= ry; ++u)
        for (int v = -rx; v <= rx; ++v)
          acc += k(u + ry, v + rx) * x(mirror_index(i + u, h), mirror_index(j + v, w));
      y(i, j) = acc;
    }
  return y;
}

struct MscnMaps {
  Eigen::MatrixXd mscn, sigma;
};

MscnMaps mscn_of(const Eigen::MatrixXd& y, double c) {
  const auto& w = mscn_window();
  const Eigen::MatrixXd mu = filter_sym(y, w);
  const Eigen::MatrixXd mu2 = filter_sym(y.array().square().matrix(), w);
  MscnMaps maps;
  maps.sigma = (mu2 - mu.array().square().matrix()).cwiseMax(0.0).cwiseSqrt();
  maps.mscn = (y - mu).array() / (maps.sigma.array() + c);
  return maps;
}

void ggd_features(const Eigen::MatrixXd& block, std::vector<double>& out) {
  const double e2 = block.array().square().mean();
  const double e1 = block.array().abs().mean();
  const double rho = e2 / std::max(e1 * e1, 1e-12);
  out.push_back(ggd_alpha(rho));
  out.push_back(e2);
}

void aggd_features(const Eigen::MatrixXd& pair, std::vector<double>& out) {
  double neg_sq = 0, pos_sq = 0, abs_sum = 0;
  long neg_n = 0, pos_n = 0;
  const long n = pair.size();
  for (long i = 0; i < n; ++i) {
    const double v = pair(i);
    abs_sum += std::abs(v);
    if (v < 0) {
      neg_sq += v * v;
      ++neg_n;
    } else if (v > 0) {
      pos_sq += v * v;
      ++pos_n;
    }
  }
  const double lsig = std::sqrt(neg_n > 0 ? neg_sq / neg_n : 1e-12);
  const double rsig = std::sqrt(pos_n > 0 ? pos_sq / pos_n : 1e-12);
  const double gammahat = lsig / rsig;
  const double e2 = (neg_sq + pos_sq) / n;
  const double rhat = (abs_sum / n) * (abs_sum / n) / std::max(e2, 1e-12);
  const double rhatnorm = rhat * (gammahat * gammahat * gammahat + 1) * (gammahat + 1) /
                          std::pow(gammahat * gammahat + 1, 2.0);
  const double alpha = aggd_alpha(rhatnorm);
  const double g1 = std::tgamma(1.0 / alpha);
  const double g2 = std::tgamma(2.0 / alpha);
  const double g3 = std::tgamma(3.0 / alpha);
  const double mean = (rsig - lsig) * (g2 / g1) * std::sqrt(g1 / g3);
  out.push_back(alpha);
  out.push_back(mean);
  out.push_back(lsig * lsig);
  out.push_back(rsig * rsig);
}

// 18 features of one MSCN patch: GGD of the coefficients plus AGGD of the
// four orientation products (H, V, D1, D2)
void patch_features(const Eigen::MatrixXd& p, std::vector<double>& out) {
  ggd_features(p, out);
  const int h = static_cast<int>(p.rows()), w = static_cast<int>(p.cols());
  static const int shifts[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  for (const auto& s : shifts) {
    const int dy = s[0], dx = s[1];
    const int y0 = std::max(0, -dy), y1 = h - std::max(0, dy);
    const int x0 = std::max(0, -dx), x1 = w - std::max(0, dx);
    Eigen::MatrixXd prod(y1 - y0, x1 - x0);
    for (int i = y0; i < y1; ++i)
      for (int j = x0; j < x1; ++j) prod(i - y0, j - x0) = p(i, j) * p(i + dy, j + dx);
    aggd_features(prod, out);
  }
}

Eigen::MatrixXd luma_matrix(const Image& img) {
  Eigen::VectorXd l = luma(img);
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
             l.data(), img.h, img.w)
      .eval();
}

}  // namespace

Eigen::MatrixXd niqe_features(const Image& img, const NiqeParams& params) {
  const int p = params.patch;
  if (p < 8) throw std::invalid_argument("niqe: patch size too small");
  const Eigen::MatrixXd y = luma_matrix(img);
  const int ny = img.h / p, nx = img.w / p;
  if (ny < 1 || nx < 1) return Eigen::MatrixXd(0, kFeatDim);

  const MscnMaps full = mscn_of(y, params.c);
  const Eigen::MatrixXd half_y = [&] {
    const int h2 = img.h / 2, w2 = img.w / 2;
    Eigen::MatrixXd out(h2, w2);
    for (int i = 0; i < h2; ++i)
      for (int j = 0; j < w2; ++j)
        out(i, j) = 0.25 * (y(2 * i, 2 * j) + y(2 * i, 2 * j + 1) + y(2 * i + 1, 2 * j) +
                            y(2 * i + 1, 2 * j + 1));
    return out;
  }();
  const MscnMaps half = mscn_of(half_y, params.c);

  // sharpness per patch (mean local std at full scale), then keep the top
  // params.sharp_keep fraction; all-constant patches (zero std) drop out
  std::vector<double> sharp(static_cast<size_t>(ny) * nx);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j)
      sharp[static_cast<size_t>(i) * nx + j] = full.sigma.block(i * p, j * p, p, p).mean();
  std::vector<double> sorted = sharp;
  std::sort(sorted.begin(), sorted.end());
  const size_t cut = static_cast<size_t>(std::floor((1.0 - params.sharp_keep) * sorted.size()));
  const double thresh = sorted[std::min(cut, sorted.size() - 1)];

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const double s = sharp[static_cast<size_t>(i) * nx + j];
      if (s < thresh || s <= 0.0) continue;
      std::vector<double> feat;
      feat.reserve(kFeatDim);
      patch_features(full.mscn.block(i * p, j * p, p, p), feat);
      const int hp = p / 2;
      patch_features(half.mscn.block(i * hp, j * hp, hp, hp), feat);
      rows.push_back(std::move(feat));
    }
  }

  Eigen::MatrixXd f(rows.size(), kFeatDim);
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < kFeatDim; ++c) f(static_cast<long>(r), c) = rows[r][c];
  return f;
}

NiqeModel niqe_fit(const std::vector<Image>& pristine, const NiqeParams& params) {
  if (pristine.size() < 100)
    throw std::invalid_argument("niqe_fit: needs at least 100 pristine images");

  std::vector<Eigen::MatrixXd> all;
  long total = 0;
  for (const auto& img : pristine) {
    Eigen::MatrixXd f = niqe_features(img, params);
    total += f.rows();
    if (f.rows() > 0) all.push_back(std::move(f));
  }
  if (total < kFeatDim)
    throw std::runtime_error("niqe_fit: too few valid patches in the pristine set");

  Eigen::MatrixXd feats(total, kFeatDim);
  long at = 0;
  for (const auto& f : all) {
    feats.middleRows(at, f.rows()) = f;
    at += f.rows();
  }

  NiqeModel m;
  m.params = params;
  m.mean = feats.colwise().mean().transpose();
  const Eigen::MatrixXd centered = feats.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / static_cast<double>(total - 1);
  m.cov = 0.5 * (m.cov + m.cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.cov);
  if (es.eigenvalues().minCoeff() < 1e-12) {
    std::cerr << "niqe_fit: near-degenerate covariance, regularizing with 1e-6 I\n";
    m.cov += 1e-6 * Eigen::MatrixXd::Identity(kFeatDim, kFeatDim);
  }
  return m;
}

double niqe_score(const Image& img, const NiqeModel& m) {
  const Eigen::MatrixXd f = niqe_features(img, m.params);
  if (f.rows() == 0) throw std::runtime_error("niqe_score: no valid patches in image");

  const Eigen::VectorXd mu = f.colwise().mean().transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(kFeatDim, kFeatDim);
  if (f.rows() > 1) {
    const Eigen::MatrixXd centered = f.rowwise() - mu.transpose();
    cov = centered.transpose() * centered / static_cast<double>(f.rows() - 1);
  }

  Eigen::MatrixXd pooled = 0.5 * (m.cov + cov);
  pooled = 0.5 * (pooled + pooled.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    pooled += 1e-6 * Eigen::MatrixXd::Identity(kFeatDim, kFeatDim);
    ldlt.compute(pooled);
  }
  const Eigen::VectorXd d = m.mean - mu;
  const double q = d.dot(ldlt.solve(d));
  return std::sqrt(std::max(q, 0.0));
}

nlohmann::json niqe_model_to_json(const NiqeModel& m) {
  std::vector<double> cov(m.cov.data(), m.cov.data() + m.cov.size());
  std::vector<double> mean(m.mean.data(), m.mean.data() + m.mean.size());
  return nlohmann::json{{"mean", mean},
                        {"cov", cov},
                        {"patch", m.params.patch},
                        {"c", m.params.c},
                        {"sharp_keep", m.params.sharp_keep}};
}

NiqeModel niqe_model_from_json(const nlohmann::json& j) {
  NiqeModel m;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto cov = j.at("cov").get<std::vector<double>>();
  if (mean.size() != kFeatDim || cov.size() != kFeatDim * kFeatDim)
    throw std::runtime_error("niqe model: bad dimensions");
  m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), kFeatDim);
  m.cov = Eigen::Map<const Eigen::MatrixXd>(cov.data(), kFeatDim, kFeatDim);
  m.params.patch = j.at("patch").get<int>();
  m.params.c = j.at("c").get<double>();
  m.params.sharp_keep = j.at("sharp_keep").get<double>();
  return m;
}

}  // namespace frn
