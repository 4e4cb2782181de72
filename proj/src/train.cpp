#include "frn/train.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "frn/io.hpp"

namespace fs = std::filesystem;

namespace frn {

namespace {

constexpr std::uint64_t kTagGInit = 0x67696e69ULL;
constexpr std::uint64_t kTagDInit = 0x64696e69ULL;
constexpr std::uint64_t kTagBatch = 0x62617463ULL;

Tensor<real> tensor01_from_image(const Image& img) {
  Tensor<real> t(3, img.h, img.w);
  if (img.cs == Image::ColorSpace::GRAY)
    for (int c = 0; c < 3; ++c) t.m.row(c) = img.px.row(0).cast<real>();
  else
    t.m = img.px.cast<real>();
  return t;
}

// nested gradient structure with only the logit slots populated
DiscriminatorFeatures<real> logit_only_grads(const DiscriminatorFeatures<real>& like,
                                             std::vector<Tensor<real>> dlogits, real scale) {
  DiscriminatorFeatures<real> out(like.size());
  for (size_t k = 0; k < like.size(); ++k) {
    out[k].resize(like[k].size());
    dlogits[k].m *= scale;
    out[k].back() = std::move(dlogits[k]);
  }
  return out;
}

double grad_norm(const ParamList<real>& ps) {
  double acc = 0;
  for (auto* p : ps) acc += static_cast<double>(p->g.template cast<double>().squaredNorm());
  return std::sqrt(acc);
}

void scale_grads(const ParamList<real>& ps, real s) {
  for (auto* p : ps) p->g *= s;
}

nlohmann::json losses_to_json(const StepLosses& l) {
  return nlohmann::json{{"step", l.step},   {"d_loss", l.d_loss}, {"g_adv", l.g_adv},
                        {"g_fm", l.g_fm},   {"g_perc", l.g_perc}, {"g_l1", l.g_l1},
                        {"g_total", l.g_total}};
}

struct RunLock {
  std::string path;
  explicit RunLock(const std::string& dir) : path(dir + "/.lock") {
    if (fs::exists(path))
      throw TrainError("run directory is locked by another writer: " + dir);
    std::ofstream(path) << "locked\n";
  }
  ~RunLock() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TrainModels TrainModels::build(const TrainConfig& cfg) {
  cfg.validate();
  Rng g_rng(derive_seed(Seed{cfg.seed}, kTagGInit));
  Rng d_rng(derive_seed(Seed{cfg.seed}, kTagDInit));
  const CorrelationAct act =
      cfg.corr_activation == "tanh" ? CorrelationAct::TANH : CorrelationAct::SIGMOID;
  const GuidanceMode mode = cfg.ablation == Ablation::GUIDANCE_16XFACE
                                ? GuidanceMode::LQ_IMAGE
                                : GuidanceMode::ENCODER;

  TrainModels m{cfg,
                Generator<real>(cfg.resolution, cfg.channels, act, g_rng, mode),
                MultiScaleDiscriminator<real>(cfg.d_scales, cfg.d_base_channels, cfg.d_layers,
                                              d_rng),
                PerceptualExtractor<real>(Seed{cfg.perc_seed}, cfg.perc_channels),
                {}, {}, {}, {}};
  if (cfg.ablation == Ablation::FIXCONV && mode == GuidanceMode::ENCODER)
    m.g.encoder.set_use_phi(false);
  if (!cfg.perc_weights.empty()) {
    ParamList<real> pp;
    m.perc.collect(pp);
    load_param_blob(cfg.perc_weights, pp);
  }

  m.g.collect(m.g_params);
  m.d.collect(m.d_params);
  m.adam_g.lr = static_cast<real>(cfg.lr_g);
  m.adam_g.beta1 = static_cast<real>(cfg.adam_beta1);
  m.adam_g.beta2 = static_cast<real>(cfg.adam_beta2);
  m.adam_g.attach(m.g_params);
  m.adam_d.lr = static_cast<real>(cfg.lr_d);
  m.adam_d.beta1 = static_cast<real>(cfg.adam_beta1);
  m.adam_d.beta2 = static_cast<real>(cfg.adam_beta2);
  m.adam_d.attach(m.d_params);
  return m;
}

StepLosses train_step(const std::vector<std::pair<Image, Image>>& batch, TrainModels& m) {
  if (batch.empty()) throw TrainError("train_step: empty batch");
  const auto& cfg = m.cfg;
  const real inv_b = real(1) / static_cast<real>(batch.size());
  const real lam_fm = static_cast<real>(cfg.lambda_fm);
  const real lam_perc = static_cast<real>(cfg.lambda_perc);
  const real l1w = static_cast<real>(cfg.effective_l1_weight());
  StepLosses L;

  // ---- discriminator update ----
  zero_grads(m.d_params);
  for (const auto& [lq, hq] : batch) {
    const Tensor<real> fake01 = m.g.forward_t(lq);  // generator treated as fixed
    const Tensor<real> hq01 = tensor01_from_image(hq);

    auto feats_real = m.d.forward(hq01);
    auto [loss_real, dlog_real] = lsgan_mean_sq_grad(logits_of(feats_real), real(1));
    m.d.backward(logit_only_grads(feats_real, std::move(dlog_real), inv_b));

    auto feats_fake = m.d.forward(fake01);
    auto [loss_fake, dlog_fake] = lsgan_mean_sq_grad(logits_of(feats_fake), real(0));
    m.d.backward(logit_only_grads(feats_fake, std::move(dlog_fake), inv_b));

    L.d_loss += static_cast<double>(loss_real + loss_fake);
  }
  m.adam_d.step();

  // ---- generator update (against the updated discriminator) ----
  zero_grads(m.g_params);
  for (const auto& [lq, hq] : batch) {
    const Tensor<real> hq01 = tensor01_from_image(hq);
    const Tensor<real> fake01 = m.g.forward_t(lq);

    const auto feats_real = m.d.forward(hq01);   // feature-matching targets
    const auto feats_fake = m.d.forward(fake01); // caches stay on the fake pass

    auto [adv, dlogits] = lsgan_mean_sq_grad(logits_of(feats_fake), real(1));
    auto [fm, dfeats] = feature_matching_grad(feats_real, feats_fake);

    for (size_t k = 0; k < dfeats.size(); ++k) {
      for (auto& t : dfeats[k]) t.m *= lam_fm * inv_b;
      dfeats[k].back().m += dlogits[k].m * inv_b;
    }
    Tensor<real> dimg = m.d.backward(dfeats);

    auto [perc, dimg_perc] = perceptual_loss_grad(hq01, fake01, m.perc);
    dimg.m += dimg_perc.m * (lam_perc * inv_b);
    double l1v = 0;
    if (l1w > 0) {
      auto [l1, dimg_l1] = l1_loss_grad(hq01, fake01);
      dimg.m += dimg_l1.m * (l1w * inv_b);
      l1v = static_cast<double>(l1);
    }
    m.g.backward(dimg);

    L.g_adv += static_cast<double>(adv);
    L.g_fm += static_cast<double>(fm);
    L.g_perc += static_cast<double>(perc);
    L.g_l1 += l1v;
  }
  m.adam_g.step();

  const double b = static_cast<double>(batch.size());
  L.d_loss /= b;
  L.g_adv /= b;
  L.g_fm /= b;
  L.g_perc /= b;
  L.g_l1 /= b;
  L.g_total = L.g_adv + cfg.lambda_fm * L.g_fm + cfg.lambda_perc * L.g_perc +
              cfg.effective_l1_weight() * L.g_l1;

  if (!std::isfinite(L.g_total) || !std::isfinite(L.d_loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << L.step << ": d=" << L.d_loss << " adv=" << L.g_adv
        << " fm=" << L.g_fm << " perc=" << L.g_perc << " l1=" << L.g_l1
        << " |grad_g|=" << grad_norm(m.g_params) << " |grad_d|=" << grad_norm(m.d_params);
    throw TrainError(msg.str());
  }
  return L;
}

FitResult fit(const TrainConfig& cfg, const PairedDataset& ds, const std::string& run_dir,
              bool resume) {
  cfg.validate();
  fs::create_directories(run_dir);
  RunLock lock(run_dir);
  save_config(cfg, run_dir + "/config.echo.json");

  TrainModels m = TrainModels::build(cfg);
  const std::string ckpt_path = run_dir + "/ckpt_latest.bin";
  long start_step = 0;
  if (resume) {
    if (!fs::exists(ckpt_path)) throw TrainError("resume requested but no checkpoint in " + run_dir);
    start_step = checkpoint_load(ckpt_path, cfg, m.g, m.d, &m.adam_g, &m.adam_d);
  }

  const auto train_idx = ds.split_indices(Split::TRAIN);
  const auto val_idx = ds.split_indices(Split::VAL);
  if (train_idx.empty()) throw TrainError("dataset has no TRAIN records");

  // the whole toy-scale training set fits in memory
  std::vector<std::pair<Image, Image>> pairs;
  pairs.reserve(train_idx.size());
  for (int i : train_idx) pairs.push_back(ds.load_pair(i));

  std::ofstream curves(run_dir + "/curves.jsonl", resume ? std::ios::app : std::ios::trunc);
  if (!curves) throw TrainError("cannot write curves.jsonl in " + run_dir);

  FitResult result;
  for (long step = start_step; step < cfg.steps; ++step) {
    Rng brng(derive_seed(Seed{cfg.seed}, kTagBatch, static_cast<std::uint64_t>(step)));
    std::vector<std::pair<Image, Image>> batch;
    batch.reserve(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i)
      batch.push_back(pairs[brng.uniform_int(pairs.size())]);

    StepLosses l = train_step(batch, m);
    l.step = step;
    nlohmann::json line = losses_to_json(l);

    if (cfg.val_interval > 0 && (step + 1) % cfg.val_interval == 0 && !val_idx.empty()) {
      double vpsnr = 0, vssim = 0;
      for (int i : val_idx) {
        auto [lq, hq] = ds.load_pair(i);
        const Image out = m.g.forward(lq);
        vpsnr += psnr(hq, out);
        vssim += ssim(hq, out);
      }
      line["val_psnr"] = vpsnr / static_cast<double>(val_idx.size());
      line["val_ssim"] = vssim / static_cast<double>(val_idx.size());
    }
    curves << line.dump() << "\n";
    curves.flush();
    result.curve.push_back(l);

    if (cfg.checkpoint_interval > 0 && (step + 1) % cfg.checkpoint_interval == 0)
      checkpoint_save(ckpt_path, cfg, step + 1, m.g, m.d, m.adam_g, m.adam_d);
  }

  checkpoint_save(ckpt_path, cfg, cfg.steps, m.g, m.d, m.adam_g, m.adam_d);
  result.checkpoint_path = ckpt_path;
  result.final_step = cfg.steps;
  return result;
}

void render_split(TrainModels& m, const PairedDataset& ds, Split split,
                  const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (int i : ds.split_indices(split)) {
    auto [lq, hq] = ds.load_pair(i);
    save_image(m.g.forward(lq), out_dir + "/" + ds.records[i].id + ".png");
  }
}

NiqeModel dataset_niqe_model(const PairedDataset& ds, const TrainConfig& cfg) {
  const std::string cache = ds.root + "/niqe_model.json";
  NiqeParams params;
  params.patch = cfg.niqe_patch;
  if (fs::exists(cache)) {
    std::ifstream in(cache);
    nlohmann::json j;
    in >> j;
    NiqeModel m = niqe_model_from_json(j);
    if (m.params.patch == params.patch && m.params.c == params.c &&
        m.params.sharp_keep == params.sharp_keep)
      return m;
  }
  std::vector<Image> pristine;
  for (int i : ds.split_indices(Split::TRAIN)) pristine.push_back(ds.load_hq(i));
  NiqeModel m = niqe_fit(pristine, params);
  std::ofstream out(cache);
  out << niqe_model_to_json(m).dump() << "\n";
  return m;
}

namespace {

MetricReport evaluate_lists(const PairedDataset& ds, Split split,
                            const std::vector<Image>& outs, const TrainConfig& cfg) {
  const auto idx = ds.split_indices(split);
  std::vector<std::string> ids;
  std::vector<Image> gt;
  for (int i : idx) {
    ids.push_back(ds.records[i].id);
    gt.push_back(ds.load_hq(i));
  }
  PerceptualExtractor<real> perc(Seed{cfg.perc_seed}, cfg.perc_channels);
  const NiqeModel niqe = dataset_niqe_model(ds, cfg);
  return evaluate_images(ids, gt, outs, perc, niqe);
}

}  // namespace

MetricReport evaluate_outputs(const PairedDataset& ds, Split split, const std::string& out_dir,
                              const TrainConfig& cfg) {
  const auto idx = ds.split_indices(split);
  std::vector<std::string> missing;
  std::vector<Image> outs;
  for (int i : idx) {
    const std::string path = out_dir + "/" + ds.records[i].id + ".png";
    if (!fs::exists(path)) {
      missing.push_back(ds.records[i].id);
      continue;
    }
    outs.push_back(load_image(path));
  }
  if (!missing.empty()) {
    std::string msg = "missing generated outputs for:";
    for (const auto& id : missing) msg += " " + id;
    throw TrainError(msg);
  }
  return evaluate_lists(ds, split, outs, cfg);
}

MetricReport evaluate_degraded(const PairedDataset& ds, Split split, const TrainConfig& cfg) {
  std::vector<Image> outs;
  for (int i : ds.split_indices(split)) outs.push_back(ds.load_lq(i));
  return evaluate_lists(ds, split, outs, cfg);
}

AblationResult run_ablation(const TrainConfig& base, const std::vector<Ablation>& variants,
                            const PairedDataset& ds, const std::string& out_root) {
  fs::create_directories(out_root);
  AblationResult res;
  for (Ablation v : variants) {
    TrainConfig cfg = base;
    cfg.ablation = v;
    const std::string name = ablation_name(v);
    const std::string run_dir = out_root + "/" + name;
    fit(cfg, ds, run_dir, false);

    TrainModels m = TrainModels::build(cfg);
    checkpoint_load(run_dir + "/ckpt_latest.bin", cfg, m.g, m.d, nullptr, nullptr);
    render_split(m, ds, Split::TEST, run_dir + "/test_out");

    MetricReport report = evaluate_outputs(ds, Split::TEST, run_dir + "/test_out", cfg);
    std::ofstream(run_dir + "/report.jsonl") << report.to_jsonl();
    res.variants.push_back(name);
    res.reports[name] = std::move(report);
  }

  // Table-2 shape: one row per metric, one column per variant
  static const char* rows[] = {"psnr", "ssim", "ms_ssim", "fed", "lle", "frechet_fd", "niqe"};
  std::ostringstream t;
  t << std::left << std::setw(12) << "metric";
  for (const auto& v : res.variants) t << std::setw(14) << v;
  t << "\n";
  for (const char* r : rows) {
    t << std::left << std::setw(12) << r;
    for (const auto& v : res.variants) {
      const auto& agg = res.reports[v].aggregate;
      std::ostringstream cell;
      if (agg.count(r) && std::isfinite(agg.at(r).first))
        cell << std::fixed << std::setprecision(4) << agg.at(r).first;
      else
        cell << "-";
      t << std::setw(14) << cell.str();
    }
    t << "\n";
  }
  res.table = t.str();
  std::ofstream(out_root + "/ablation_table.txt") << res.table;
  return res;
}

}  // namespace frn
