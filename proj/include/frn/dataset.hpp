#pragma once

#include <string>
#include <vector>

#include "frn/config.hpp"
#include "frn/degrade.hpp"

namespace frn {

enum class Split { TRAIN, VAL, TEST };

std::string split_name(Split s);
Split split_from_name(const std::string& s);

struct PairRecord {
  std::string id;
  std::string hq_path, lq_path;  // relative to the dataset root
  Split split = Split::TRAIN;
  DegradationPipeline pipeline;
};

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PairedDataset {
  std::string root;
  std::vector<PairRecord> records;

  std::vector<int> split_indices(Split s) const;
  Image load_hq(int i) const;
  // LQ at working resolution: low-resolution files (the SR task) are
  // bicubic-upsampled back to the HQ size on load
  Image load_lq(int i) const;
  std::pair<Image, Image> load_pair(int i) const;  // (lq, hq)
};

// Task-specific degradation plan for one image; pure, cheap, testable.
DegradationPipeline plan_task_degradation(Task task, Seed seed, const DegradeRanges& ranges,
                                          int mosaic_block);

// Reads hq_dir (PNG/JPEG), center-crops/resizes to cfg.resolution, applies
// the task degradation with per-image derived seeds and writes hq/, lq/ and
// manifest.jsonl under out_dir. Per-image work is independent, so workers > 1
// fans it out without changing any output byte.
PairedDataset build_dataset(const std::string& hq_dir, const std::string& out_dir,
                            const TrainConfig& cfg, int workers = 1);

PairedDataset load_dataset(const std::string& dir);
void save_manifest(const PairedDataset& ds);

}  // namespace frn
