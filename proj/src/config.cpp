#include "frn/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace frn {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task",           "resolution",      "channels",       "batch_size",
      "steps",          "lr_g",            "lr_d",           "adam_beta1",
      "adam_beta2",     "seed",            "lambda_fm",      "lambda_perc",
      "l1_weight",      "ablation",        "d_scales",       "d_layers",
      "d_base_channels", "corr_activation", "perc_channels", "perc_seed",
      "perc_weights",   "train_frac",      "val_frac",       "val_interval",
      "checkpoint_interval", "niqe_patch", "mosaic_block",   "blur_sigma_min",
      "blur_sigma_max", "motion_len_min",  "motion_len_max", "noise_level_min",
      "noise_level_max", "jpeg_q_min",     "jpeg_q_max",     "down_factors",
      "mosaic_block_min", "mosaic_block_max",
  };
  return keys;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string task_name(Task t) {
  switch (t) {
    case Task::SR4X: return "sr4x";
    case Task::HALLUC16X: return "halluc16x";
    case Task::DENOISE: return "denoise";
    case Task::DEBLUR: return "deblur";
    case Task::JPEG: return "jpeg";
    case Task::RENOVATION: return "renovation";
  }
  throw ConfigError("unknown task");
}

Task task_from_name(const std::string& s) {
  if (s == "sr4x") return Task::SR4X;
  if (s == "halluc16x") return Task::HALLUC16X;
  if (s == "denoise") return Task::DENOISE;
  if (s == "deblur") return Task::DEBLUR;
  if (s == "jpeg") return Task::JPEG;
  if (s == "renovation") return Task::RENOVATION;
  throw ConfigError("unknown task: " + s);
}

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::DEFAULT: return "default";
    case Ablation::FIXCONV: return "fixconv";
    case Ablation::L1: return "l1";
    case Ablation::GUIDANCE_16XFACE: return "guidance_16xface";
  }
  throw ConfigError("unknown ablation");
}

Ablation ablation_from_name(const std::string& s) {
  if (s == "default") return Ablation::DEFAULT;
  if (s == "fixconv") return Ablation::FIXCONV;
  if (s == "l1") return Ablation::L1;
  if (s == "guidance_16xface") return Ablation::GUIDANCE_16XFACE;
  throw ConfigError("unknown ablation: " + s);
}

void TrainConfig::validate() const {
  if (resolution < 1) throw ConfigError("resolution must be positive");
  if (channels.empty()) throw ConfigError("channels must be non-empty");
  if (resolution % (1 << n_stages()) != 0)
    throw ConfigError("resolution must be divisible by 2^n_stages");
  if (lr_g <= 0 || lr_d <= 0) throw ConfigError("learning rates must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (lambda_fm < 0 || lambda_perc < 0 || l1_weight < 0)
    throw ConfigError("loss weights must be non-negative");
  if (train_frac <= 0 || val_frac < 0 || train_frac + val_frac >= 1.0)
    throw ConfigError("split fractions must satisfy 0 < train, 0 <= val, train+val < 1");
  if (corr_activation != "sigmoid" && corr_activation != "tanh")
    throw ConfigError("corr_activation must be sigmoid or tanh");
  if (d_scales < 1 || d_layers < 3) throw ConfigError("need >= 1 scale and >= 3 conv layers");
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{
      {"task", task_name(c.task)},
      {"resolution", c.resolution},
      {"channels", c.channels},
      {"batch_size", c.batch_size},
      {"steps", c.steps},
      {"lr_g", c.lr_g},
      {"lr_d", c.lr_d},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"seed", c.seed},
      {"lambda_fm", c.lambda_fm},
      {"lambda_perc", c.lambda_perc},
      {"l1_weight", c.l1_weight},
      {"ablation", ablation_name(c.ablation)},
      {"d_scales", c.d_scales},
      {"d_layers", c.d_layers},
      {"d_base_channels", c.d_base_channels},
      {"corr_activation", c.corr_activation},
      {"perc_channels", c.perc_channels},
      {"perc_seed", c.perc_seed},
      {"perc_weights", c.perc_weights},
      {"train_frac", c.train_frac},
      {"val_frac", c.val_frac},
      {"val_interval", c.val_interval},
      {"checkpoint_interval", c.checkpoint_interval},
      {"niqe_patch", c.niqe_patch},
      {"mosaic_block", c.mosaic_block},
      {"blur_sigma_min", c.ranges.blur_sigma_min},
      {"blur_sigma_max", c.ranges.blur_sigma_max},
      {"motion_len_min", c.ranges.motion_len_min},
      {"motion_len_max", c.ranges.motion_len_max},
      {"noise_level_min", c.ranges.noise_level_min},
      {"noise_level_max", c.ranges.noise_level_max},
      {"jpeg_q_min", c.ranges.jpeg_q_min},
      {"jpeg_q_max", c.ranges.jpeg_q_max},
      {"down_factors", c.ranges.down_factors},
      {"mosaic_block_min", c.ranges.mosaic_block_min},
      {"mosaic_block_max", c.ranges.mosaic_block_max},
  };
}

TrainConfig config_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items())
    if (!known_keys().count(key)) throw ConfigError("unknown config key: " + key);

  TrainConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  if (j.contains("task")) c.task = task_from_name(j.at("task").get<std::string>());
  if (j.contains("ablation")) c.ablation = ablation_from_name(j.at("ablation").get<std::string>());
  get("resolution", c.resolution);
  get("channels", c.channels);
  get("batch_size", c.batch_size);
  get("steps", c.steps);
  get("lr_g", c.lr_g);
  get("lr_d", c.lr_d);
  get("adam_beta1", c.adam_beta1);
  get("adam_beta2", c.adam_beta2);
  get("seed", c.seed);
  get("lambda_fm", c.lambda_fm);
  get("lambda_perc", c.lambda_perc);
  get("l1_weight", c.l1_weight);
  get("d_scales", c.d_scales);
  get("d_layers", c.d_layers);
  get("d_base_channels", c.d_base_channels);
  get("corr_activation", c.corr_activation);
  get("perc_channels", c.perc_channels);
  get("perc_seed", c.perc_seed);
  get("perc_weights", c.perc_weights);
  get("train_frac", c.train_frac);
  get("val_frac", c.val_frac);
  get("val_interval", c.val_interval);
  get("checkpoint_interval", c.checkpoint_interval);
  get("niqe_patch", c.niqe_patch);
  get("mosaic_block", c.mosaic_block);
  get("blur_sigma_min", c.ranges.blur_sigma_min);
  get("blur_sigma_max", c.ranges.blur_sigma_max);
  get("motion_len_min", c.ranges.motion_len_min);
  get("motion_len_max", c.ranges.motion_len_max);
  get("noise_level_min", c.ranges.noise_level_min);
  get("noise_level_max", c.ranges.noise_level_max);
  get("jpeg_q_min", c.ranges.jpeg_q_min);
  get("jpeg_q_max", c.ranges.jpeg_q_max);
  get("down_factors", c.ranges.down_factors);
  get("mosaic_block_min", c.ranges.mosaic_block_min);
  get("mosaic_block_max", c.ranges.mosaic_block_max);
  c.validate();
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const TrainConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << config_to_json(cfg).dump(2) << "\n";
}

std::uint64_t config_arch_hash(const TrainConfig& c) {
  nlohmann::json arch{
      {"resolution", c.resolution},       {"channels", c.channels},
      {"d_scales", c.d_scales},           {"d_layers", c.d_layers},
      {"d_base_channels", c.d_base_channels}, {"corr_activation", c.corr_activation},
      {"perc_channels", c.perc_channels}, {"ablation", ablation_name(c.ablation)},
  };
  return fnv1a(arch.dump());
}

}  // namespace frn
