#pragma once

#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frn/image.hpp"
#include "frn/nn/perceptual.hpp"

namespace frn {

// Peak signal-to-noise ratio in dB, peak = 1.0 in [0,1] space.
// Identical images return +infinity (the report sentinel).
double psnr(const Image& a, const Image& b);

// Structural similarity: ITU-R 601 luma, 11x11 Gaussian window sigma 1.5,
// K1 = 0.01, K2 = 0.03, byte-space dynamic range.
double ssim(const Image& a, const Image& b);

// Multi-scale SSIM with the standard exponent weights. scales = 0 picks the
// largest count the image supports (up to 5, window 11 at the last scale);
// weights are renormalized when fewer than 5 scales are used.
double ms_ssim(const Image& a, const Image& b, int scales = 0);

// ---- Frechet feature distance ----

// ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^(1/2)), square root taken via
// the symmetric PSD form with negative-eigenvalue clamping.
double frechet_from_stats(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a,
                          const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& cov_b);

// rows = samples, cols = feature dims
double frechet_from_features(const Eigen::MatrixXd& fa, const Eigen::MatrixXd& fb);

template <typename T>
double frechet_feature_distance(const std::vector<Image>& set_a, const std::vector<Image>& set_b,
                                PerceptualExtractor<T>& p) {
  if (set_a.empty() || set_b.empty())
    throw std::invalid_argument("frechet_feature_distance: empty image set");
  Eigen::MatrixXd fa(set_a.size(), p.feature_dim()), fb(set_b.size(), p.feature_dim());
  for (size_t i = 0; i < set_a.size(); ++i) fa.row(i) = p.embed(set_a[i]).transpose();
  for (size_t i = 0; i < set_b.size(); ++i) fb.row(i) = p.embed(set_b[i]).transpose();
  return frechet_from_features(fa, fb);
}

// ---- NIQE ----

struct NiqeParams {
  int patch = 96;            // patch side at full scale
  double c = 1.0 / 255.0;    // MSCN stabilizer in [0,1] units
  double sharp_keep = 0.75;  // keep this fraction of patches, top by local std
};

// Gaussian model of natural-scene statistics fitted on pristine patches:
// 18 features per patch per scale x 2 scales = 36 dims.
struct NiqeModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  NiqeParams params;
};

NiqeModel niqe_fit(const std::vector<Image>& pristine, const NiqeParams& params = {});
double niqe_score(const Image& img, const NiqeModel& m);

nlohmann::json niqe_model_to_json(const NiqeModel& m);
NiqeModel niqe_model_from_json(const nlohmann::json& j);

// per-image NSS feature matrix (rows = selected patches); exposed for tests
Eigen::MatrixXd niqe_features(const Image& img, const NiqeParams& params);

// ---- reporting ----

struct MetricReport {
  // ordered per-image results: id -> metric name -> value
  std::vector<std::pair<std::string, std::map<std::string, double>>> per_image;
  // metric name -> (mean, std); set-level metrics appear only here
  std::map<std::string, std::pair<double, double>> aggregate;

  std::string to_jsonl() const;
  std::string table() const;  // human-readable aligned table
  static MetricReport from_jsonl(const std::string& text);
};

// full-reference + no-reference metrics over aligned image lists; the
// Frechet feature distance is set-level and lands in the aggregate only.
// fed / lle columns are reserved (external embedding providers) and stay NaN.
template <typename T>
MetricReport evaluate_images(const std::vector<std::string>& ids, const std::vector<Image>& gt,
                             const std::vector<Image>& out, PerceptualExtractor<T>& perc,
                             const NiqeModel& niqe) {
  if (ids.size() != gt.size() || ids.size() != out.size())
    throw std::invalid_argument("evaluate_images: list size mismatch");
  MetricReport r;
  static const char* names[] = {"psnr", "ssim", "ms_ssim", "niqe"};
  std::map<std::string, std::vector<double>> cols;
  for (size_t i = 0; i < ids.size(); ++i) {
    std::map<std::string, double> m;
    m["psnr"] = psnr(gt[i], out[i]);
    m["ssim"] = ssim(gt[i], out[i]);
    m["ms_ssim"] = ms_ssim(gt[i], out[i]);
    m["niqe"] = niqe_score(out[i], niqe);
    for (const char* n : names) cols[n].push_back(m[n]);
    r.per_image.emplace_back(ids[i], std::move(m));
  }
  for (const char* n : names) {
    const auto& v = cols[n];
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    r.aggregate[n] = {mean, sd};
  }
  r.aggregate["frechet_fd"] = {frechet_feature_distance(out, gt, perc), 0.0};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.aggregate["fed"] = {nan, nan};
  r.aggregate["lle"] = {nan, nan};
  return r;
}

}  // namespace frn
