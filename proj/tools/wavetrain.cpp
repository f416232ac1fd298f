// Copyright 2026 The wavetrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wavetrain/config.hpp"
#include "wavetrain/diagnostics.hpp"
#include "wavetrain/error.hpp"
#include "wavetrain/experiment.hpp"
#include "wavetrain/io.hpp"
#include "wavetrain/parallel.hpp"

#ifndef WAVETRAIN_VERSION
#define WAVETRAIN_VERSION "v0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wavetrain;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::UnknownOp:
    case ErrorCode::MissingFile:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// Options shared by the config-driven commands. Unset values keep the
/// config file's value (or the built-in default).
struct Overrides {
  std::string config;
  std::optional<std::string> output_dir, data_dir;
  std::optional<std::size_t> num_source, num_heldout, samples_per_domain;
  std::optional<double> perturb_scale;
  std::optional<std::uint64_t> data_seed;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> augs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size, iterations, eval_interval, checkpoint_interval, steps_per_cycle, eval_samples;
  std::optional<std::string> optimizer, batch_mode;
  bool ascend = false;
};

void add_data_options(CLI::App* cmd, Overrides& o) {
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("-c,--config", o.config, "experiment config (JSON)");
  cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
  cmd->add_option("--data-dir", o.data_dir, "dataset directory (default <output-dir>/data)");
  cmd->add_option("--num-source", o.num_source, "number of source domains");
  cmd->add_option("--num-heldout", o.num_heldout, "number of held-out domains");
  cmd->add_option("--samples-per-domain", o.samples_per_domain, "samples generated per domain");
  cmd->add_option("--perturb-scale", o.perturb_scale, "stain matrix perturbation in [0, 0.3]");
  cmd->add_option("--data-seed", o.data_seed, "seed for domain generation");
}

void add_trainer_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seeds", o.seeds, "training seeds (one run each)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd->add_option("--aug", o.augs, "augmentation spec per trajectory; repeat for A > 1")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd->add_option("--lr", o.learning_rate, "learning rate");
  cmd->add_option("--batch-size", o.batch_size, "batch size");
  cmd->add_option("--iterations", o.iterations, "averaging cycles T");
  cmd->add_option("--optimizer", o.optimizer, "sgd or adam");
  cmd->add_option("--batch-mode", o.batch_mode, "shared or distinct");
  cmd->add_option("--steps-per-cycle", o.steps_per_cycle, "local steps between averages");
  cmd->add_option("--eval-interval", o.eval_interval, "metrics cadence in cycles");
  cmd->add_option("--checkpoint-interval", o.checkpoint_interval, "checkpoint cadence in cycles (0 = final only)");
  cmd->add_option("--eval-samples", o.eval_samples, "cap on pooled samples for training metrics (0 = all)");
  cmd->add_flag("--ascend", o.ascend, "step along +gradient (literal sign)");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.data_dir) cfg.data_dir = *o.data_dir;
  if (o.num_source) cfg.domains.num_source = *o.num_source;
  if (o.num_heldout) cfg.domains.num_heldout = *o.num_heldout;
  if (o.samples_per_domain) cfg.domains.samples_per_domain = *o.samples_per_domain;
  if (o.perturb_scale) cfg.domains.perturb_scale = *o.perturb_scale;
  if (o.data_seed) cfg.domains.data_seed = *o.data_seed;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  TrainerConfig& t = cfg.trainer;
  if (!o.augs.empty()) {
    t.aug_specs.clear();
    for (const auto& s : o.augs) t.aug_specs.push_back(parse_aug_spec(s));
    t.num_trajectories = t.aug_specs.size();
    t.trajectory_tags.clear();
  }
  if (o.learning_rate) t.learning_rate = *o.learning_rate;
  if (o.batch_size) t.batch_size = *o.batch_size;
  if (o.iterations) t.iterations = *o.iterations;
  if (o.optimizer) t.optimizer = parse_optimizer(*o.optimizer);
  if (o.batch_mode) t.batch_mode = parse_batch_mode(*o.batch_mode);
  if (o.steps_per_cycle) t.steps_per_cycle = *o.steps_per_cycle;
  if (o.eval_interval) t.eval_interval = *o.eval_interval;
  if (o.checkpoint_interval) t.checkpoint_interval = *o.checkpoint_interval;
  if (o.eval_samples) t.eval_samples = *o.eval_samples;
  if (o.ascend) t.ascend = true;
  cfg.validate();
  return cfg;
}

fs::path seed_dir(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.output_dir / ("seed_" + std::to_string(seed));
}

std::string domain_cell(const MetricsRecord& r) { return r.domain_id ? std::to_string(*r.domain_id) : "pooled"; }

void print_table(const std::vector<MetricsRecord>& rows) {
  std::printf("%-8s %-8s %-10s %-10s\n", "split", "domain", "loss", "accuracy");
  for (const auto& r : rows)
    std::printf("%-8s %-8s %-10s %-10s\n", r.split.c_str(), domain_cell(r).c_str(), fixed6(r.loss).c_str(),
                fixed6(r.accuracy).c_str());
}

// ---- gen-data -----------------------------------------------------------

int cmd_gen_data(const Overrides& o) {
  const ExperimentConfig cfg = resolve(o);
  const ExperimentData data = make_experiment_data(cfg.domains);
  const fs::path dir = cfg.resolved_data_dir();
  write_experiment_data(data, dir);

  json specs = json::array();
  std::printf("%-10s %-6s %-3s %-11s %-9s %-6s %-7s %-7s\n", "folder", "role", "id", "brightness", "contrast",
              "noise", "samples", "label1");
  auto report = [&](const DomainSpec& s, const DomainDataset& ds, const std::string& name, const char* role) {
    std::size_t ones = 0;
    for (int y : ds.labels) ones += y == 1;
    const double frac = static_cast<double>(ones) / static_cast<double>(ds.size());
    std::printf("%-10s %-6s %-3d %-11s %-9s %-6s %-7zu %-7s\n", name.c_str(), role, s.domain_id,
                fixed6(s.brightness_shift).c_str(), fixed6(s.contrast_factor).c_str(), fixed6(s.noise_sigma).c_str(),
                ds.size(), fixed6(frac).c_str());
    json rows = json::array();
    for (const auto& r : s.stain_matrix.rows()) rows.push_back({r[0], r[1], r[2]});
    specs.push_back({{"folder", name},
                     {"role", role},
                     {"domain_id", s.domain_id},
                     {"stain_matrix", rows},
                     {"brightness_shift", s.brightness_shift},
                     {"contrast_factor", s.contrast_factor},
                     {"noise_sigma", s.noise_sigma},
                     {"samples", ds.size()},
                     {"label1_fraction", frac}});
  };
  for (std::size_t i = 0; i < data.sources.size(); ++i)
    report(data.source_specs[i], data.sources[i], source_dir_name(i), "source");
  for (std::size_t i = 0; i < data.heldout.size(); ++i)
    report(data.heldout_specs[i], data.heldout[i], heldout_dir_name(i), heldout_split_name(i).c_str());
  write_text_file(dir / "domains.json",
                  json{{"data_seed", cfg.domains.data_seed},
                       {"perturb_scale", cfg.domains.perturb_scale},
                       {"domains", specs}}
                          .dump(2) +
                      "\n");
  std::printf("wrote %s\n", dir.string().c_str());
  return kExitOk;
}

// ---- train --------------------------------------------------------------

int cmd_train(const Overrides& o) {
  const ExperimentConfig cfg = resolve(o);
  const ExperimentData data = load_experiment_data(cfg.resolved_data_dir());
  std::vector<std::string> summary;
  for (std::uint64_t seed : cfg.seeds) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.trainer.master_seed = seed;
    const TrainRun run = train(run_cfg.trainer, data.sources);
    const std::size_t T = run_cfg.trainer.iterations;

    const fs::path dir = seed_dir(cfg, seed);
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<MetricsRecord> rows = run.metrics;
    const auto table = evaluation_table(run.final_weights, data, T);
    rows.insert(rows.end(), table.begin(), table.end());
    const double held = heldout_accuracy(run.final_weights, data);
    const auto held_loss = per_domain_eval(run.final_weights, data.heldout).back().loss;
    rows.push_back({T, "heldout", std::nullopt, held_loss, held});
    write_metrics(rows, dir / "metrics.csv");

    for (const Checkpoint& c : run.phi_history) {
      char name[32];
      std::snprintf(name, sizeof name, "iter_%06zu", c.iteration);
      write_checkpoint(c.weights, dir / "checkpoints" / name, seed);
    }
    write_checkpoint(run.final_weights, dir / "final", seed);
    for (std::size_t n = 0; n < run.last_cycle.thetas.size(); ++n)
      write_checkpoint(run.last_cycle.thetas[n], dir / "last_cycle" / ("theta_" + std::to_string(n)), seed);

    json meta = {{"version", WAVETRAIN_VERSION},
                 {"seed", seed},
                 {"wall_steps", run.wall_steps},
                 {"config", to_json(run_cfg)}};
    write_text_file(dir / "run.json", meta.dump(2) + "\n");

    std::printf("seed %llu: wall_steps %zu, final train loss %s\n", static_cast<unsigned long long>(seed),
                run.wall_steps, fixed6(run.metrics.back().loss).c_str());
    print_table(std::vector<MetricsRecord>(rows.begin() + static_cast<std::ptrdiff_t>(run.metrics.size()), rows.end()));
    for (std::size_t i = run.metrics.size(); i < rows.size(); ++i)
      summary.push_back(std::to_string(seed) + "," + format_metrics_row(rows[i]));
  }
  std::string text = std::string("seed,") + kMetricsHeader + "\n";
  for (const auto& line : summary) text += line + "\n";
  write_text_file(cfg.output_dir / "summary.csv", text);
  return kExitOk;
}

// ---- eval ---------------------------------------------------------------

struct EvalOptions {
  std::string checkpoint;
  std::string data_dir;
  std::string out;
  std::size_t iteration = 0;
};

int cmd_eval(const EvalOptions& e) {
  if (!fs::exists(fs::path(e.checkpoint) / "manifest.json"))
    throw Error(ErrorCode::MissingFile, "no checkpoint at " + e.checkpoint + " (manifest.json missing)");
  const WeightVector w = read_checkpoint(e.checkpoint);
  const ExperimentData data = load_experiment_data(e.data_dir);
  const auto rows = evaluation_table(w, data, e.iteration);
  print_table(rows);
  const fs::path out = e.out.empty() ? fs::path(e.checkpoint) / "eval.csv" : fs::path(e.out);
  write_metrics(rows, out);
  return kExitOk;
}

// ---- ablate -------------------------------------------------------------

int cmd_ablate(const Overrides& o, const std::string& grid_name, const std::string& out_path) {
  const ExperimentConfig cfg = resolve(o);
  std::vector<AblationRow> grid;
  if (grid_name == "full")
    grid = full_ablation_grid();
  else if (grid_name == "core")
    grid = core_ablation_grid();
  else
    throw Error(ErrorCode::InvalidArgument, "grid must be full or core, got '" + grid_name + "'");
  const ExperimentData data = load_experiment_data(cfg.resolved_data_dir());

  std::vector<std::vector<double>> acc(grid.size());
  for (std::uint64_t seed : cfg.seeds) {
    std::string text = "row_label,heldout_acc\n";
    for (std::size_t r = 0; r < grid.size(); ++r) {
      const AblationResult res = run_ablation_row(grid[r], cfg.trainer, data, {seed});
      acc[r].push_back(res.heldout_acc.front());
      text += csv_field(grid[r].label) + "," + fixed6(res.heldout_acc.front()) + "\n";
    }
    const fs::path dir = cfg.output_dir / "ablation" / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    write_text_file(dir / "heldout.csv", text);
  }

  std::string seeds;
  for (std::uint64_t s : cfg.seeds) seeds += (seeds.empty() ? "" : " ") + std::to_string(s);
  std::string csv = "row_label,num_trajectories,augs,median_heldout_acc,seeds\n";
  std::printf("%-40s %-4s %-10s\n", "row", "A", "median");
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::string augs;
    for (const auto& a : grid[r].augs) augs += (augs.empty() ? "" : "|") + (a.empty() ? std::string("identity") : a);
    const double med = median(acc[r]);
    csv += csv_field(grid[r].label) + "," + std::to_string(grid[r].augs.size()) + "," + csv_field(augs) + "," +
           fixed6(med) + "," + seeds + "\n";
    std::printf("%-40s %-4zu %-10s\n", grid[r].label.c_str(), grid[r].augs.size(), fixed6(med).c_str());
  }
  const fs::path out = out_path.empty() ? cfg.output_dir / "ablation.csv" : fs::path(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text_file(out, csv);
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

// ---- augment-image ------------------------------------------------------

int cmd_augment_image(const std::string& input, const std::string& spec_text, std::uint64_t seed,
                      const std::string& output) {
  const AugSpec spec = parse_aug_spec(spec_text);
  if (!fs::exists(input)) throw Error(ErrorCode::MissingFile, "no input image " + input);
  const RgbImage img = read_ppm(input);
  Rng rng(seed);
  write_ppm(apply(spec, img, rng), output);
  return kExitOk;
}

// ---- lmc ----------------------------------------------------------------

struct LmcOptions {
  std::string ckpt1, ckpt2, dataset, out;
  std::size_t K = 20;
};

int cmd_lmc(const LmcOptions& l) {
  if (l.K < 2) throw Error(ErrorCode::InvalidArgument, "K must be >= 2");
  for (const auto& c : {l.ckpt1, l.ckpt2})
    if (!fs::exists(fs::path(c) / "manifest.json"))
      throw Error(ErrorCode::MissingFile, "no checkpoint at " + c + " (manifest.json missing)");
  if (!fs::is_directory(l.dataset)) throw Error(ErrorCode::MissingFile, "no dataset folder " + l.dataset);
  const WeightVector w1 = read_checkpoint(l.ckpt1);
  const WeightVector w2 = read_checkpoint(l.ckpt2);
  const DomainDataset ds = load_patch_folder(l.dataset);
  const InterpolationCurve curve = lmc_curve(w1, w2, ds, l.K);
  const fs::path out = l.out.empty() ? fs::path("lmc_curve.csv") : fs::path(l.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_curve_csv(curve, out);
  fs::path summary = out;
  summary.replace_extension(".json");
  write_text_file(summary, curve_summary_json(curve));
  std::printf("loss(0) %s  loss(1) %s  barrier %s\n", fixed6(curve.losses.front()).c_str(),
              fixed6(curve.losses.back()).c_str(), fixed6(curve.barrier).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavetrain: multi-trajectory weight-averaging trainer and experiment harness"};
  app.set_version_flag("--version", WAVETRAIN_VERSION);
  app.require_subcommand(1);

  Overrides gen_o, train_o, ablate_o;
  auto* gen = app.add_subcommand("gen-data", "generate synthetic source and held-out domains");
  add_data_options(gen, gen_o);

  auto* tr = app.add_subcommand("train", "train one run per seed");
  add_data_options(tr, train_o);
  add_trainer_options(tr, train_o);

  EvalOptions eval_o;
  auto* ev = app.add_subcommand("eval", "per-domain evaluation of a checkpoint");
  ev->add_option("checkpoint", eval_o.checkpoint, "checkpoint directory")->required();
  ev->add_option("--data-dir", eval_o.data_dir, "dataset directory written by gen-data")->required();
  ev->add_option("--out", eval_o.out, "CSV output (default <checkpoint>/eval.csv)");
  ev->add_option("--iteration", eval_o.iteration, "iteration value for the CSV rows");

  std::string grid = "full", ablate_out;
  auto* ab = app.add_subcommand("ablate", "augmentation / trajectory-count ablation over seeds");
  add_data_options(ab, ablate_o);
  add_trainer_options(ab, ablate_o);
  ab->add_option("--grid", grid, "full or core");
  ab->add_option("--out", ablate_out, "CSV output (default <output-dir>/ablation.csv)");

  std::string aug_in, aug_spec, aug_out;
  std::uint64_t aug_seed = 0;
  auto* ai = app.add_subcommand("augment-image", "apply an augmentation spec to a PPM image");
  ai->add_option("input", aug_in, "input P6 PPM")->required();
  ai->add_option("spec", aug_spec, "augmentation spec, e.g. \"hed(0.05)\"")->required();
  ai->add_option("seed", aug_seed, "random seed")->required();
  ai->add_option("output", aug_out, "output PPM")->required();

  LmcOptions lmc_o;
  auto* lm = app.add_subcommand("lmc", "loss along the segment between two checkpoints");
  lm->add_option("ckpt1", lmc_o.ckpt1, "first checkpoint")->required();
  lm->add_option("ckpt2", lmc_o.ckpt2, "second checkpoint")->required();
  lm->add_option("--dataset", lmc_o.dataset, "patch folder to evaluate on")->required();
  lm->add_option("-k,--K", lmc_o.K, "number of segments (>= 2)");
  lm->add_option("--out", lmc_o.out, "curve CSV (summary JSON goes next to it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    configure_threads_from_env();
    if (gen->parsed()) return cmd_gen_data(gen_o);
    if (tr->parsed()) return cmd_train(train_o);
    if (ev->parsed()) return cmd_eval(eval_o);
    if (ab->parsed()) return cmd_ablate(ablate_o, grid, ablate_out);
    if (ai->parsed()) return cmd_augment_image(aug_in, aug_spec, aug_seed, aug_out);
    if (lm->parsed()) return cmd_lmc(lmc_o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
