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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavetrain/trainer.hpp"

namespace wavetrain {

struct DomainLayout {
  std::size_t num_source = 3;
  /// The first held-out domain is the validation site, the second the test site.
  std::size_t num_heldout = 2;
  double perturb_scale = 0.2;
  std::size_t samples_per_domain = 600;
  std::uint64_t data_seed = 2024;
};

/// Everything a CLI run needs. Serialized as JSON with the field names below;
/// absent fields keep their defaults.
struct ExperimentConfig {
  TrainerConfig trainer;
  DomainLayout domains;
  std::filesystem::path output_dir = "wavetrain_out";
  std::filesystem::path data_dir;  // empty = <output_dir>/data
  std::vector<std::uint64_t> seeds{0};

  /// Throws InvalidArgument.
  void validate() const;
  std::filesystem::path resolved_data_dir() const { return data_dir.empty() ? output_dir / "data" : data_dir; }
};

nlohmann::json to_json(const TrainerConfig& cfg);
TrainerConfig trainer_config_from_json(const nlohmann::json& j, TrainerConfig base = {});

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::string to_string(OptimizerKind k);
std::string to_string(BatchMode m);
OptimizerKind parse_optimizer(const std::string& s);
BatchMode parse_batch_mode(const std::string& s);

/// "split" name of the i-th held-out domain: val, test, heldout2, ...
std::string heldout_split_name(std::size_t i);
/// Directory names used by gen-data: source_0.., then heldout_0..
std::string source_dir_name(std::size_t i);
std::string heldout_dir_name(std::size_t i);

}  // namespace wavetrain
