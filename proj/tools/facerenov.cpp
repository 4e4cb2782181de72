// Command-line surface of the face-renovation toolkit.
// Exit codes: 0 success, 1 usage/config error, 2 runtime/data error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "frn/io.hpp"
#include "frn/synth.hpp"
#include "frn/train.hpp"

namespace fs = std::filesystem;
using namespace frn;

namespace {

TrainConfig config_with_overrides(const std::string& config_path, const CLI::App* cmd) {
  TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_config(config_path);
  auto opt = [&](const char* flag) -> const CLI::Option* {
    const CLI::Option* o = cmd->get_option_no_throw(flag);
    return o && o->count() > 0 ? o : nullptr;
  };
  if (auto* o = opt("--seed")) cfg.seed = o->as<std::uint64_t>();
  if (auto* o = opt("--steps")) cfg.steps = o->as<long>();
  if (auto* o = opt("--task")) cfg.task = task_from_name(o->as<std::string>());
  if (auto* o = opt("--resolution")) cfg.resolution = o->as<int>();
  cfg.validate();
  return cfg;
}

std::vector<std::string> list_images(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<std::set<int>> parse_stage_sets(const std::string& spec, int n_stages) {
  std::vector<std::set<int>> sets;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part == "all") {
      std::set<int> s;
      for (int i = 0; i < n_stages; ++i) s.insert(i);
      sets.push_back(std::move(s));
    } else if (part == "none") {
      sets.emplace_back();
    } else if (part == "prefixes") {
      // deepest-first accumulation: {}, {N-1}, {N-1,N-2}, ..., all
      std::set<int> s;
      sets.push_back(s);
      for (int i = n_stages - 1; i >= 0; --i) {
        s.insert(i);
        sets.push_back(s);
      }
    } else {
      std::set<int> s;
      std::stringstream ps(part);
      std::string tok;
      while (std::getline(ps, tok, ',')) {
        const int v = std::stoi(tok);
        if (v < 0 || v >= n_stages)
          throw std::invalid_argument("stage index " + tok + " out of range [0," +
                                      std::to_string(n_stages - 1) + "]");
        s.insert(v);
      }
      sets.push_back(std::move(s));
    }
  }
  if (sets.empty()) throw std::invalid_argument("empty stages spec");
  return sets;
}

TrainModels models_from_checkpoint(const std::string& ckpt) {
  const CheckpointHeader h = checkpoint_header(ckpt);
  TrainModels m = TrainModels::build(h.cfg);
  checkpoint_load(ckpt, h.cfg, m.g, m.d, nullptr, nullptr);
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"face renovation toolkit: degradation simulation, CSR generator training, "
               "renovation and evaluation"};
  app.require_subcommand(1);

  std::string config_path, device = "cpu";
  int workers = 1;
  app.add_option("--config", config_path, "config file (flat JSON)")->envname("FRN_CONFIG");
  app.add_option("--device", device, "compute device (cpu only)")->envname("FRN_DEVICE");
  app.add_option("--workers", workers, "worker threads for batch image work")
      ->envname("FRN_WORKERS");

  // ---- synth ----
  auto* c_synth = app.add_subcommand("synth", "generate procedural face-like sample images");
  std::string sy_out;
  int sy_count = 200, sy_size = 64;
  std::uint64_t sy_seed = 1;
  c_synth->add_option("--out", sy_out, "output directory")->required();
  c_synth->add_option("--count", sy_count, "number of images");
  c_synth->add_option("--size", sy_size, "image side length");
  c_synth->add_option("--seed", sy_seed, "seed")->envname("FRN_SEED");

  // ---- degrade ----
  auto* c_degrade = app.add_subcommand("degrade", "build a paired dataset with the task's "
                                                  "degradation and a reproducibility manifest");
  std::string dg_in, dg_out, dg_task = "renovation";
  std::uint64_t dg_seed = 1;
  int dg_res = 64;
  long dg_steps = 0;  // unused; keeps config_with_overrides generic
  c_degrade->add_option("--in", dg_in, "directory of clean images")->required();
  c_degrade->add_option("--out", dg_out, "dataset output directory")->required();
  c_degrade->add_option("--task", dg_task, "sr4x|halluc16x|denoise|deblur|jpeg|renovation");
  c_degrade->add_option("--seed", dg_seed, "dataset seed")->envname("FRN_SEED");
  c_degrade->add_option("--resolution", dg_res, "working resolution");
  c_degrade->add_option("--steps", dg_steps)->group("");  // hidden

  // ---- train ----
  auto* c_train = app.add_subcommand("train", "train on a built dataset");
  std::string tr_data, tr_out;
  bool tr_resume = false;
  std::uint64_t tr_seed = 0;
  long tr_steps = 0;
  std::string tr_task, tr_res;
  c_train->add_option("--data", tr_data, "dataset directory (from degrade)")->required();
  c_train->add_option("--out", tr_out, "run directory")->required();
  c_train->add_flag("--resume", tr_resume, "continue from the run's latest checkpoint");
  c_train->add_option("--seed", tr_seed, "override config seed")->envname("FRN_SEED");
  c_train->add_option("--steps", tr_steps, "override config steps");
  c_train->add_option("--task", tr_task)->group("");
  c_train->add_option("--resolution", tr_res)->group("");

  // ---- renovate ----
  auto* c_renov = app.add_subcommand("renovate", "batch inference from a checkpoint");
  std::string rn_ckpt, rn_in, rn_out, rn_grid;
  c_renov->add_option("--checkpoint", rn_ckpt, "checkpoint file")->required();
  c_renov->add_option("--in", rn_in, "input image directory")->required();
  c_renov->add_option("--out", rn_out, "output directory")->required();
  c_renov->add_option("--grid", rn_grid, "also write a before/after grid PNG");

  // ---- evaluate ----
  auto* c_eval = app.add_subcommand("evaluate", "metric report over a dataset split");
  std::string ev_data, ev_ckpt, ev_outputs, ev_report, ev_split = "test";
  c_eval->add_option("--data", ev_data, "dataset directory")->required();
  c_eval->add_option("--checkpoint", ev_ckpt, "checkpoint (renders the split first)");
  c_eval->add_option("--outputs", ev_outputs, "directory of pre-rendered <id>.png outputs");
  c_eval->add_option("--report", ev_report, "report path (.jsonl)");
  c_eval->add_option("--split", ev_split, "train|val|test");
  c_eval->add_flag("--degraded", "evaluate the degraded inputs instead of outputs");

  // ---- ablate ----
  auto* c_abl = app.add_subcommand("ablate", "stage-masking probe: render with selected "
                                             "guidance stages active");
  std::string ab_ckpt, ab_image, ab_stages = "prefixes", ab_out;
  c_abl->add_option("--checkpoint", ab_ckpt, "checkpoint file")->required();
  c_abl->add_option("--image", ab_image, "input image")->required();
  c_abl->add_option("--stages", ab_stages,
                    "active-set spec: 'all', 'none', 'prefixes' or ';'-separated "
                    "comma lists, e.g. '3;2,3;all'");
  c_abl->add_option("--out", ab_out, "output grid PNG")->required();

  // ---- ablation-suite ----
  auto* c_suite = app.add_subcommand("ablation-suite", "train + evaluate ablation variants "
                                                       "and emit the metric table");
  std::string su_data, su_out, su_variants = "default,fixconv,l1,guidance_16xface";
  c_suite->add_option("--data", su_data, "dataset directory")->required();
  c_suite->add_option("--out", su_out, "output root")->required();
  c_suite->add_option("--variants", su_variants, "comma-separated variant list");

  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (device != "cpu") {
      std::cerr << "error: only --device cpu is supported\n";
      return 1;
    }

    if (*c_synth) {
      synth_face_dir(sy_out, sy_count, sy_size, Seed{sy_seed});
      std::cout << "wrote " << sy_count << " images to " << sy_out << "\n";
    } else if (*c_degrade) {
      const TrainConfig cfg = config_with_overrides(config_path, c_degrade);
      const PairedDataset ds = build_dataset(dg_in, dg_out, cfg, workers);
      std::cout << "dataset: " << ds.records.size() << " pairs, manifest " << dg_out
                << "/manifest.jsonl\n";
    } else if (*c_train) {
      TrainConfig cfg = config_with_overrides(config_path, c_train);
      const PairedDataset ds = load_dataset(tr_data);
      const FitResult r = fit(cfg, ds, tr_out, tr_resume);
      std::cout << "trained to step " << r.final_step << ", checkpoint " << r.checkpoint_path
                << "\n";
    } else if (*c_renov) {
      TrainModels m = models_from_checkpoint(rn_ckpt);
      fs::create_directories(rn_out);
      const auto files = list_images(rn_in);
      std::vector<Image> panels;
      for (const auto& f : files) {
        const Image in = center_crop_resize(load_image(f), m.cfg.resolution);
        const Image out = m.g.forward(in);
        save_image(out, rn_out + "/" + fs::path(f).stem().string() + ".png");
        if (!rn_grid.empty()) {
          panels.push_back(in);
          panels.push_back(out);
        }
      }
      if (!rn_grid.empty()) save_image(image_grid(panels, 2), rn_grid);
      std::cout << "renovated " << files.size() << " images into " << rn_out << "\n";
    } else if (*c_eval) {
      const Split split = split_from_name(ev_split);
      TrainConfig cfg;
      std::string outputs = ev_outputs;
      if (!ev_ckpt.empty()) {
        TrainModels m = models_from_checkpoint(ev_ckpt);
        cfg = m.cfg;
        if (outputs.empty()) outputs = ev_data + "/eval_out_" + ev_split;
        render_split(m, load_dataset(ev_data), split, outputs);
      } else {
        cfg = config_with_overrides(config_path, c_eval);
      }
      const PairedDataset ds = load_dataset(ev_data);
      const MetricReport report = c_eval->count("--degraded")
                                      ? evaluate_degraded(ds, split, cfg)
                                      : evaluate_outputs(ds, split, outputs, cfg);
      if (!ev_report.empty()) std::ofstream(ev_report) << report.to_jsonl();
      std::cout << report.table();
    } else if (*c_abl) {
      TrainModels m = models_from_checkpoint(ab_ckpt);
      const auto sets = parse_stage_sets(ab_stages, m.cfg.n_stages());
      const Image in = center_crop_resize(load_image(ab_image), m.cfg.resolution);
      std::vector<Image> panels;
      for (const auto& s : sets) panels.push_back(m.g.ablate_forward(in, s));
      save_image(image_grid(panels, static_cast<int>(panels.size())), ab_out);
      std::cout << "wrote " << panels.size() << "-panel ablation grid to " << ab_out << "\n";
    } else if (*c_suite) {
      TrainConfig cfg = config_with_overrides(config_path, c_suite);
      std::vector<Ablation> variants;
      std::stringstream ss(su_variants);
      std::string tok;
      while (std::getline(ss, tok, ',')) variants.push_back(ablation_from_name(tok));
      const PairedDataset ds = load_dataset(su_data);
      const AblationResult res = run_ablation(cfg, variants, ds, su_out);
      std::cout << res.table;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
