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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavetrain/config.hpp"
#include "wavetrain/synth_domains.hpp"
#include "wavetrain/trainer.hpp"

namespace wavetrain {

/// Source and held-out domains of one experiment. Source domain i has id i,
/// held-out domain j has id num_source + j.
struct ExperimentData {
  std::vector<DomainSpec> source_specs;
  std::vector<DomainSpec> heldout_specs;
  std::vector<DomainDataset> sources;
  std::vector<DomainDataset> heldout;
};

/// Rounds every channel to the nearest multiple of 1/255, the grid PPM
/// files store, so in-memory data equals data read back from disk.
void quantize_8bit(DomainDataset& dataset);

/// Generates all domains of the layout (quantized to 8 bits).
ExperimentData make_experiment_data(const DomainLayout& layout);

/// Writes `<dir>/source_i` and `<dir>/heldout_j` patch folders.
void write_experiment_data(const ExperimentData& data, const std::filesystem::path& dir);

/// Reads the folders written by write_experiment_data, in index order,
/// stopping at the first missing index. Throws MissingFile when either role
/// has no folder.
ExperimentData load_experiment_data(const std::filesystem::path& dir);

/// Evaluation rows in table order: sources, then val, test, ..., then pooled.
std::vector<MetricsRecord> evaluation_table(const WeightVector& w, const ExperimentData& data,
                                            std::size_t iteration = 0);

/// Accuracy over the union of all held-out domains.
double heldout_accuracy(const WeightVector& w, const ExperimentData& data);

struct AblationRow {
  std::string label;
  std::vector<std::string> augs;
};

/// ERM baseline, then the pairs and triples of the augmentation ablation.
std::vector<AblationRow> full_ablation_grid();
/// The three rows the ranking claim is about: ERM, the pair without HED
/// jitter, and the triple with it.
std::vector<AblationRow> core_ablation_grid();

struct AblationResult {
  AblationRow row;
  std::vector<std::uint64_t> seeds;
  std::vector<double> heldout_acc;  // per seed
  double median_heldout_acc = 0.0;
};

/// Trains one row per seed from `base` (augs and A replaced by the row).
AblationResult run_ablation_row(const AblationRow& row, const TrainerConfig& base, const ExperimentData& data,
                                const std::vector<std::uint64_t>& seeds);

/// Median; for an even count, the mean of the two middle values.
double median(std::vector<double> values);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

}  // namespace wavetrain
