#pragma once

#include <string>

#include "frn/config.hpp"
#include "frn/nn/adam.hpp"
#include "frn/nn/discriminator.hpp"
#include "frn/nn/generator.hpp"

namespace frn {

// training scalar; gradient-check suites instantiate the layer templates
// with double instead
using real = float;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointHeader {
  std::uint32_t version = 1;
  std::uint64_t arch_hash = 0;
  TrainConfig cfg;
  long step = 0;
};

// Single-file binary blob: header, generator/discriminator parameters and
// optimizer moments, in deterministic collection order. save -> load -> save
// is byte-identical.
void checkpoint_save(const std::string& path, const TrainConfig& cfg, long step,
                     Generator<real>& g, MultiScaleDiscriminator<real>& d, Adam<real>& adam_g,
                     Adam<real>& adam_d);

CheckpointHeader checkpoint_header(const std::string& path);

// models and optimizers must already be built from the checkpoint's config;
// throws CheckpointError on version or architecture-hash mismatch
long checkpoint_load(const std::string& path, const TrainConfig& expect_cfg, Generator<real>& g,
                     MultiScaleDiscriminator<real>& d, Adam<real>* adam_g, Adam<real>* adam_d);

// standalone parameter blob (externally trained perceptual weights etc.)
void save_param_blob(const std::string& path, const ParamList<real>& ps);
void load_param_blob(const std::string& path, const ParamList<real>& ps);

}  // namespace frn
