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

#include "wavetrain/config.hpp"

#include "wavetrain/error.hpp"
#include "wavetrain/io.hpp"

namespace wavetrain {

using nlohmann::json;

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }
std::string to_string(BatchMode m) { return m == BatchMode::Shared ? "shared" : "distinct"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw Error(ErrorCode::InvalidArgument, "optimizer must be sgd or adam, got '" + s + "'");
}

BatchMode parse_batch_mode(const std::string& s) {
  if (s == "shared") return BatchMode::Shared;
  if (s == "distinct") return BatchMode::Distinct;
  throw Error(ErrorCode::InvalidArgument, "batch_mode must be shared or distinct, got '" + s + "'");
}

std::string heldout_split_name(std::size_t i) {
  if (i == 0) return "val";
  if (i == 1) return "test";
  return "heldout" + std::to_string(i);
}

std::string source_dir_name(std::size_t i) { return "source_" + std::to_string(i); }
std::string heldout_dir_name(std::size_t i) { return "heldout_" + std::to_string(i); }

json to_json(const TrainerConfig& cfg) {
  json specs = json::array();
  for (const auto& s : cfg.aug_specs) specs.push_back(to_string(s));
  return {
      {"arch", {{"input_dim", cfg.arch.input_dim}, {"hidden", cfg.arch.hidden}, {"num_classes", cfg.arch.num_classes}}},
      {"num_trajectories", cfg.num_trajectories},
      {"aug_specs", specs},
      {"learning_rate", cfg.learning_rate},
      {"batch_size", cfg.batch_size},
      {"iterations", cfg.iterations},
      {"optimizer", to_string(cfg.optimizer)},
      {"batch_mode", to_string(cfg.batch_mode)},
      {"master_seed", cfg.master_seed},
      {"steps_per_cycle", cfg.steps_per_cycle},
      {"ascend", cfg.ascend},
      {"eval_interval", cfg.eval_interval},
      {"checkpoint_interval", cfg.checkpoint_interval},
      {"eval_samples", cfg.eval_samples},
      {"trajectory_tags", cfg.trajectory_tags},
      {"adam", {{"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"epsilon", cfg.adam.epsilon}}},
  };
}

TrainerConfig trainer_config_from_json(const json& j, TrainerConfig cfg) {
  try {
    if (j.contains("arch")) {
      const json& a = j["arch"];
      cfg.arch.input_dim = a.value("input_dim", cfg.arch.input_dim);
      cfg.arch.hidden = a.value("hidden", cfg.arch.hidden);
      cfg.arch.num_classes = a.value("num_classes", cfg.arch.num_classes);
    }
    cfg.num_trajectories = j.value("num_trajectories", cfg.num_trajectories);
    if (j.contains("aug_specs")) {
      cfg.aug_specs.clear();
      for (const auto& s : j["aug_specs"]) cfg.aug_specs.push_back(parse_aug_spec(s.get<std::string>()));
      if (!j.contains("num_trajectories")) cfg.num_trajectories = cfg.aug_specs.size();
    }
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.iterations = j.value("iterations", cfg.iterations);
    if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(j["optimizer"].get<std::string>());
    if (j.contains("batch_mode")) cfg.batch_mode = parse_batch_mode(j["batch_mode"].get<std::string>());
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.steps_per_cycle = j.value("steps_per_cycle", cfg.steps_per_cycle);
    cfg.ascend = j.value("ascend", cfg.ascend);
    cfg.eval_interval = j.value("eval_interval", cfg.eval_interval);
    cfg.checkpoint_interval = j.value("checkpoint_interval", cfg.checkpoint_interval);
    cfg.eval_samples = j.value("eval_samples", cfg.eval_samples);
    cfg.trajectory_tags = j.value("trajectory_tags", cfg.trajectory_tags);
    if (j.contains("adam")) {
      cfg.adam.beta1 = j["adam"].value("beta1", cfg.adam.beta1);
      cfg.adam.beta2 = j["adam"].value("beta2", cfg.adam.beta2);
      cfg.adam.epsilon = j["adam"].value("epsilon", cfg.adam.epsilon);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad trainer config: ") + e.what());
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (domains.num_source < 1) throw Error(ErrorCode::InvalidArgument, "num_source must be >= 1");
  if (domains.num_heldout < 1) throw Error(ErrorCode::InvalidArgument, "num_heldout must be >= 1");
  if (domains.samples_per_domain < 1) throw Error(ErrorCode::InvalidArgument, "samples_per_domain must be >= 1");
  if (!(domains.perturb_scale >= 0.0 && domains.perturb_scale <= 0.3))
    throw Error(ErrorCode::InvalidArgument, "perturb_scale must lie in [0, 0.3]");
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "seeds must be nonempty");
  trainer.validate();
}

json to_json(const ExperimentConfig& cfg) {
  return {
      {"trainer", to_json(cfg.trainer)},
      {"domains",
       {{"num_source", cfg.domains.num_source},
        {"num_heldout", cfg.domains.num_heldout},
        {"perturb_scale", cfg.domains.perturb_scale},
        {"samples_per_domain", cfg.domains.samples_per_domain},
        {"data_seed", cfg.domains.data_seed}}},
      {"output_dir", cfg.output_dir.string()},
      {"data_dir", cfg.data_dir.string()},
      {"seeds", cfg.seeds},
  };
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("trainer")) cfg.trainer = trainer_config_from_json(j["trainer"], cfg.trainer);
    if (j.contains("eval_interval")) cfg.trainer.eval_interval = j["eval_interval"].get<std::size_t>();
    if (j.contains("domains")) {
      const json& d = j["domains"];
      cfg.domains.num_source = d.value("num_source", cfg.domains.num_source);
      cfg.domains.num_heldout = d.value("num_heldout", cfg.domains.num_heldout);
      cfg.domains.perturb_scale = d.value("perturb_scale", cfg.domains.perturb_scale);
      cfg.domains.samples_per_domain = d.value("samples_per_domain", cfg.domains.samples_per_domain);
      cfg.domains.data_seed = d.value("data_seed", cfg.domains.data_seed);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    cfg.data_dir = j.value("data_dir", cfg.data_dir.string());
    cfg.seeds = j.value("seeds", cfg.seeds);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad experiment config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse config " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

}  // namespace wavetrain
