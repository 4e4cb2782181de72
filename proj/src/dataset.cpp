#include "frn/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "frn/io.hpp"

namespace fs = std::filesystem;

namespace frn {

std::string split_name(Split s) {
  switch (s) {
    case Split::TRAIN: return "train";
    case Split::VAL: return "val";
    case Split::TEST: return "test";
  }
  throw std::invalid_argument("unknown split");
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::TRAIN;
  if (s == "val") return Split::VAL;
  if (s == "test") return Split::TEST;
  throw std::invalid_argument("unknown split: " + s);
}

std::vector<int> PairedDataset::split_indices(Split s) const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(records.size()); ++i)
    if (records[i].split == s) idx.push_back(i);
  return idx;
}

Image PairedDataset::load_hq(int i) const { return load_image(root + "/" + records[i].hq_path); }

Image PairedDataset::load_lq(int i) const { return load_pair(i).first; }

std::pair<Image, Image> PairedDataset::load_pair(int i) const {
  Image hq = load_hq(i);
  Image lq = load_image(root + "/" + records[i].lq_path);
  if (lq.h != hq.h || lq.w != hq.w) lq = resize_bicubic_to(lq, hq.h, hq.w);
  return {std::move(lq), std::move(hq)};
}

DegradationPipeline plan_task_degradation(Task task, Seed seed, const DegradeRanges& ranges,
                                          int mosaic_block) {
  Rng rng(seed);
  DegradationPipeline p;
  p.order_seed = seed;
  const Seed stage_seed = derive_seed(seed, 7);
  switch (task) {
    case Task::SR4X: {
      DegradationSpec s;
      s.kind = DegradationKind::DOWNSAMPLE;
      s.intensity = 1.0;
      s.seed = stage_seed;
      s.factor = 4;
      s.reup = false;  // the stored LQ stays low-resolution
      p.specs.push_back(s);
      break;
    }
    case Task::HALLUC16X: {
      DegradationSpec s;
      s.kind = DegradationKind::MOSAIC;
      s.intensity = 1.0;
      s.seed = stage_seed;
      s.block = mosaic_block;
      p.specs.push_back(s);
      break;
    }
    case Task::DENOISE: {
      const double u = rng.uniform();
      const DegradationKind kind = u < 1.0 / 3.0   ? DegradationKind::NOISE_GAUSS
                                   : u < 2.0 / 3.0 ? DegradationKind::NOISE_POISSON
                                                   : DegradationKind::NOISE_LAPLACE;
      p.specs.push_back(derive_spec(kind, rng.uniform(), stage_seed, ranges));
      break;
    }
    case Task::DEBLUR: {
      const DegradationKind kind = rng.uniform() < 0.5 ? DegradationKind::MOTION_BLUR
                                                       : DegradationKind::GAUSS_BLUR;
      p.specs.push_back(derive_spec(kind, rng.uniform(), stage_seed, ranges));
      break;
    }
    case Task::JPEG:
      p.specs.push_back(
          derive_spec(DegradationKind::JPEG, rng.uniform(), stage_seed, ranges));
      break;
    case Task::RENOVATION:
      return plan_full_degradation(seed, ranges);
  }
  return p;
}

PairedDataset build_dataset(const std::string& hq_dir, const std::string& out_dir,
                            const TrainConfig& cfg, int workers) {
  std::vector<std::string> files;
  if (!fs::is_directory(hq_dir)) throw DatasetError("not a directory: " + hq_dir);
  for (const auto& e : fs::directory_iterator(hq_dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".PNG" || ext == ".JPG")
      files.push_back(e.path().string());
  }
  if (files.empty()) throw DatasetError("no decodable images in " + hq_dir);
  std::sort(files.begin(), files.end());

  // seeded shuffle decides the split assignment
  const int n = static_cast<int>(files.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(Seed{cfg.seed}, 0x73706c69ULL));  // split stream
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[shuffle_rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);

  const int n_train = std::max(1, static_cast<int>(cfg.train_frac * n));
  const int n_val = std::max(n > 2 ? 1 : 0, static_cast<int>(cfg.val_frac * n));
  std::vector<Split> split_of(n, Split::TEST);
  for (int r = 0; r < n; ++r) {
    if (r < n_train) split_of[order[r]] = Split::TRAIN;
    else if (r < n_train + n_val) split_of[order[r]] = Split::VAL;
  }

  fs::create_directories(fs::path(out_dir) / "hq");
  fs::create_directories(fs::path(out_dir) / "lq");

  PairedDataset ds;
  ds.root = out_dir;
  ds.records.resize(n);
  auto make_one = [&](int i) {
    const std::string stem = fs::path(files[i]).stem().string();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", i);
    PairRecord rec;
    rec.id = std::string(buf) + "_" + stem;
    rec.split = split_of[i];
    rec.hq_path = "hq/" + rec.id + ".png";
    rec.lq_path = "lq/" + rec.id + ".png";

    const Image hq = center_crop_resize(load_image(files[i]), cfg.resolution);
    rec.pipeline = plan_task_degradation(cfg.task, derive_seed(Seed{cfg.seed}, i),
                                         cfg.ranges, cfg.effective_mosaic_block());
    const Image lq = apply_pipeline(hq, rec.pipeline);

    save_image(hq, out_dir + "/" + rec.hq_path);
    save_image(lq, out_dir + "/" + rec.lq_path);
    ds.records[i] = std::move(rec);
  };

  if (workers <= 1) {
    for (int i = 0; i < n; ++i) make_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    for (int w = 0; w < std::min(workers, n); ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            make_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!err) err = std::current_exception();
            return;
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  save_manifest(ds);
  return ds;
}

void save_manifest(const PairedDataset& ds) {
  std::ofstream out(ds.root + "/manifest.jsonl");
  if (!out) throw DatasetError("cannot write manifest in " + ds.root);
  for (const auto& r : ds.records) {
    nlohmann::json j{{"id", r.id},
                     {"split", split_name(r.split)},
                     {"hq", r.hq_path},
                     {"lq", r.lq_path},
                     {"pipeline", pipeline_to_json(r.pipeline)}};
    out << j.dump() << "\n";
  }
}

PairedDataset load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.jsonl");
  if (!in) throw DatasetError("no manifest.jsonl in " + dir);
  PairedDataset ds;
  ds.root = dir;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    PairRecord r;
    r.id = j.at("id").get<std::string>();
    r.split = split_from_name(j.at("split").get<std::string>());
    r.hq_path = j.at("hq").get<std::string>();
    r.lq_path = j.at("lq").get<std::string>();
    r.pipeline = pipeline_from_json(j.at("pipeline"));
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw DatasetError("empty manifest in " + dir);
  return ds;
}

}  // namespace frn
