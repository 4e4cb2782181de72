#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frn/degrade.hpp"
#include "frn/nn/losses.hpp"

namespace frn {

enum class Task { SR4X, HALLUC16X, DENOISE, DEBLUR, JPEG, RENOVATION };
enum class Ablation { DEFAULT, FIXCONV, L1, GUIDANCE_16XFACE };

std::string task_name(Task t);
Task task_from_name(const std::string& s);
std::string ablation_name(Ablation a);
Ablation ablation_from_name(const std::string& s);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every knob of the pipeline as a flat typed-key record. Serialized as a
// flat JSON object; unknown keys are rejected.
struct TrainConfig {
  Task task = Task::RENOVATION;
  int resolution = 64;
  std::vector<int> channels = {64, 128, 256, 512};  // encoder schedule; n_stages = size
  int batch_size = 4;
  long steps = 2000;
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  std::uint64_t seed = 1;
  double lambda_fm = 10.0;
  double lambda_perc = 10.0;
  double l1_weight = 0.0;
  Ablation ablation = Ablation::DEFAULT;

  int d_scales = 2;
  int d_layers = 4;
  int d_base_channels = 64;
  std::string corr_activation = "sigmoid";  // or "tanh"

  std::vector<int> perc_channels = {16, 32, 64, 64};
  std::uint64_t perc_seed = 77;
  std::string perc_weights;  // optional path to externally trained weights

  double train_frac = 0.8;
  double val_frac = 0.1;
  long val_interval = 200;
  long checkpoint_interval = 1000;

  int niqe_patch = 32;
  int mosaic_block = 0;  // 0 = resolution / 32 (the 16x-at-512 geometry)

  DegradeRanges ranges;

  int n_stages() const { return static_cast<int>(channels.size()); }
  int effective_mosaic_block() const {
    return mosaic_block > 0 ? mosaic_block : std::max(resolution / 32, 2);
  }
  LossWeights loss_weights() const { return {lambda_fm, lambda_perc}; }
  double effective_l1_weight() const {
    if (ablation == Ablation::L1) return l1_weight > 0 ? l1_weight : 10.0;
    return l1_weight;
  }
  void validate() const;
};

nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);  // rejects unknown keys
TrainConfig load_config(const std::string& path);
void save_config(const TrainConfig& cfg, const std::string& path);

// hash of the architecture-relevant subset; embedded in checkpoints
std::uint64_t config_arch_hash(const TrainConfig& cfg);

}  // namespace frn
