#pragma once

#include <map>
#include <string>
#include <vector>

#include "frn/checkpoint.hpp"
#include "frn/dataset.hpp"
#include "frn/metrics.hpp"
#include "frn/nn/losses.hpp"
#include "frn/nn/perceptual.hpp"

namespace frn {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generator + discriminator + frozen perceptual extractor + optimizers,
// wired from one config.
struct TrainModels {
  TrainConfig cfg;
  Generator<real> g;
  MultiScaleDiscriminator<real> d;
  PerceptualExtractor<real> perc;
  ParamList<real> g_params, d_params;
  Adam<real> adam_g, adam_d;

  static TrainModels build(const TrainConfig& cfg);
};

struct StepLosses {
  long step = 0;
  double d_loss = 0, g_adv = 0, g_fm = 0, g_perc = 0, g_l1 = 0, g_total = 0;
};

// One discriminator update followed by one generator update over the batch.
// Throws TrainError with a diagnostic dump when a loss goes non-finite.
StepLosses train_step(const std::vector<std::pair<Image, Image>>& batch, TrainModels& m);

struct FitResult {
  std::string checkpoint_path;
  long final_step = 0;
  std::vector<StepLosses> curve;  // steps executed in this call
};

// Runs cfg.steps training steps with periodic validation and checkpointing.
// resume = true continues from run_dir's latest checkpoint; the subsequent
// loss sequence matches an uninterrupted run bit for bit.
FitResult fit(const TrainConfig& cfg, const PairedDataset& ds, const std::string& run_dir,
              bool resume);

// batch inference: writes <id>.png for every record of the split
void render_split(TrainModels& m, const PairedDataset& ds, Split split,
                  const std::string& out_dir);

// fits (or loads a cached) pristine NIQE model on the TRAIN HQ images
NiqeModel dataset_niqe_model(const PairedDataset& ds, const TrainConfig& cfg);

// metrics of <id>.png outputs in out_dir against the split's ground truth
MetricReport evaluate_outputs(const PairedDataset& ds, Split split, const std::string& out_dir,
                              const TrainConfig& cfg);

// metrics of the degraded inputs themselves (the Table-1 "Degraded Input" row)
MetricReport evaluate_degraded(const PairedDataset& ds, Split split, const TrainConfig& cfg);

struct AblationResult {
  std::vector<std::string> variants;                // column order
  std::map<std::string, MetricReport> reports;      // per variant
  std::string table;                                // Table-2-shaped text
};

// Trains each variant identically on the same dataset and evaluates the TEST
// split. Writes per-variant run dirs, reports and the combined table under
// out_root.
AblationResult run_ablation(const TrainConfig& base, const std::vector<Ablation>& variants,
                            const PairedDataset& ds, const std::string& out_root);

}  // namespace frn
