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

#include "wavetrain/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "wavetrain/diagnostics.hpp"
#include "wavetrain/error.hpp"

namespace wavetrain {

namespace {

constexpr const char* kAffine = "affine(deg=10,tx=2,ty=2,scale=0.1)";
constexpr const char* kRandPick = "randpick(k=2,m=5)";
constexpr const char* kHed = "hed(0.15)";
constexpr const char* kRot = "rot90";
constexpr const char* kBlur = "blur(sigma=1)";
constexpr const char* kStrongAffine = "affine(deg=30,tx=4,ty=4,scale=0.2)";

}  // namespace

void quantize_8bit(DomainDataset& dataset) {
  for (RgbImage& img : dataset.images)
    for (double& v : img.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

ExperimentData make_experiment_data(const DomainLayout& layout) {
  ExperimentData data;
  const std::size_t total = layout.num_source + layout.num_heldout;
  for (std::size_t d = 0; d < total; ++d) {
    const bool source = d < layout.num_source;
    const DomainSpec spec = make_domain(static_cast<int>(d), layout.perturb_scale, layout.data_seed);
    DomainDataset ds = sample_dataset(spec, layout.samples_per_domain, layout.data_seed,
                                      source ? DomainRole::Source : DomainRole::Target);
    quantize_8bit(ds);
    (source ? data.source_specs : data.heldout_specs).push_back(spec);
    (source ? data.sources : data.heldout).push_back(std::move(ds));
  }
  return data;
}

void write_experiment_data(const ExperimentData& data, const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < data.sources.size(); ++i) save_patch_folder(data.sources[i], dir / source_dir_name(i));
  for (std::size_t i = 0; i < data.heldout.size(); ++i) save_patch_folder(data.heldout[i], dir / heldout_dir_name(i));
}

ExperimentData load_experiment_data(const std::filesystem::path& dir) {
  ExperimentData data;
  for (std::size_t i = 0; std::filesystem::is_directory(dir / source_dir_name(i)); ++i)
    data.sources.push_back(load_patch_folder(dir / source_dir_name(i), {}, DomainRole::Source));
  for (std::size_t i = 0; std::filesystem::is_directory(dir / heldout_dir_name(i)); ++i)
    data.heldout.push_back(load_patch_folder(dir / heldout_dir_name(i), {}, DomainRole::Target));
  if (data.sources.empty())
    throw Error(ErrorCode::MissingFile, "no " + source_dir_name(0) + " folder in " + dir.string() + " (run gen-data)");
  if (data.heldout.empty())
    throw Error(ErrorCode::MissingFile, "no " + heldout_dir_name(0) + " folder in " + dir.string() + " (run gen-data)");
  return data;
}

std::vector<MetricsRecord> evaluation_table(const WeightVector& w, const ExperimentData& data, std::size_t iteration) {
  std::vector<DomainDataset> all(data.sources);
  all.insert(all.end(), data.heldout.begin(), data.heldout.end());
  std::vector<std::string> splits(data.sources.size(), "source");
  for (std::size_t i = 0; i < data.heldout.size(); ++i) splits.push_back(heldout_split_name(i));
  return per_domain_eval(w, all, splits, iteration);
}

double heldout_accuracy(const WeightVector& w, const ExperimentData& data) {
  return per_domain_eval(w, data.heldout).back().accuracy;
}

std::vector<AblationRow> full_ablation_grid() {
  return {
      {"1 (no weight averaging)", {""}},
      {"2 (affine, randpick)", {kAffine, kRandPick}},
      {"2 (randpick, hed)", {kRandPick, kHed}},
      {"2 (affine, hed)", {kAffine, kHed}},
      {"3 (affine, randpick, rot90)", {kAffine, kRandPick, kRot}},
      {"3 (affine, randpick, blur)", {kAffine, kRandPick, kBlur}},
      {"3 (affine, randpick, strong affine)", {kAffine, kRandPick, kStrongAffine}},
      {"3 (affine, randpick, hed)", {kAffine, kRandPick, kHed}},
  };
}

std::vector<AblationRow> core_ablation_grid() {
  const auto full = full_ablation_grid();
  return {full[0], full[1], full[7]};
}

AblationResult run_ablation_row(const AblationRow& row, const TrainerConfig& base, const ExperimentData& data,
                                const std::vector<std::uint64_t>& seeds) {
  AblationResult result{row, seeds, {}, 0.0};
  TrainerConfig cfg = base;
  cfg.num_trajectories = row.augs.size();
  cfg.aug_specs.clear();
  for (const std::string& s : row.augs) cfg.aug_specs.push_back(parse_aug_spec(s));
  cfg.trajectory_tags.clear();
  for (std::uint64_t seed : seeds) {
    cfg.master_seed = seed;
    const TrainRun run = train(cfg, data.sources);
    result.heldout_acc.push_back(heldout_accuracy(run.final_weights, data));
  }
  result.median_heldout_acc = median(result.heldout_acc);
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace wavetrain
