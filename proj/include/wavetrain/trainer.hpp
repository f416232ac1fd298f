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
#include <span>
#include <vector>

#include "wavetrain/augment.hpp"
#include "wavetrain/metrics.hpp"
#include "wavetrain/model.hpp"
#include "wavetrain/synth_domains.hpp"

namespace wavetrain {

enum class OptimizerKind { Sgd, Adam };
enum class BatchMode { Shared, Distinct };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainerConfig {
  Architecture arch;
  /// A in the averaging rule; one augmentation pipeline per trajectory.
  std::size_t num_trajectories = 1;
  std::vector<AugSpec> aug_specs{AugSpec{}};
  double learning_rate = 2e-5;
  std::size_t batch_size = 128;
  /// Averaging cycles T.
  std::size_t iterations = 1;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  BatchMode batch_mode = BatchMode::Shared;
  std::uint64_t master_seed = 0;
  /// Local steps each trajectory takes between averages.
  std::size_t steps_per_cycle = 1;
  /// Step along +gradient instead of -gradient (literal sign of the update).
  bool ascend = false;
  /// Pooled source metrics are recorded at t = 0, e, 2e, ... <= T.
  std::size_t eval_interval = 50;
  /// phi is kept in TrainRun::phi_history at t = c, 2c, ... and at T. 0 = only T.
  std::size_t checkpoint_interval = 0;
  /// Cap on pooled samples used for the training metrics (first N). 0 = all.
  std::size_t eval_samples = 0;
  /// Per-trajectory stream tags; empty means tag n for trajectory n. Two
  /// trajectories with equal tags consume identical random streams.
  std::vector<std::uint64_t> trajectory_tags;
  AdamParams adam;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
  std::uint64_t trajectory_tag(std::size_t n) const;
};

/// Pooled union of the source datasets. Indices run over the datasets in
/// order, so sample k of dataset d sits after every sample of datasets < d.
class BatchSource {
 public:
  /// Throws EmptySources when the list (or every dataset) is empty.
  explicit BatchSource(std::span<const DomainDataset> sources);

  std::size_t size() const noexcept { return refs_.size(); }
  const RgbImage& image(std::size_t i) const;
  int label(std::size_t i) const;

  /// batch_size indices drawn uniformly with replacement, one uniform_index
  /// per slot.
  std::vector<std::size_t> draw(Rng& rng, std::size_t batch_size) const;

 private:
  struct Ref {
    const DomainDataset* dataset;
    std::size_t index;
  };
  std::vector<Ref> refs_;
};

/// Moment estimates shared by all trajectories; they are averaged together
/// with the weights at every cycle. Unused by SGD.
struct OptimizerState {
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// What one cycle produced before averaging, for inspection and tests.
struct CycleTrace {
  std::vector<WeightVector> thetas;
  std::vector<double> losses;
};

// Random streams used inside a cycle (all derived from master_seed):
//   batch (shared):    derive_seed(master, {kBatchStream, t, step})
//   batch (distinct):  derive_seed(master, {kBatchStream, t, step, tag_n})
//   augmentation:      derive_seed(master, {kAugStream, t, step, tag_n, slot})
//   initial weights:   derive_seed(master, {kInitStream})
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kBatchStream = 2;
inline constexpr std::uint64_t kAugStream = 3;

std::uint64_t init_seed(const TrainerConfig& cfg);

/// Raw batch indices trajectory n sees at (t, step).
std::vector<std::size_t> trajectory_batch_indices(const BatchSource& source, const TrainerConfig& cfg, std::size_t t,
                                                  std::size_t step, std::size_t n);

/// AUG^n applied to every image of the batch; rows in slot order.
Matrix augmented_batch(const BatchSource& source, std::span<const std::size_t> indices, const AugSpec& spec,
                       const TrainerConfig& cfg, std::size_t t, std::size_t step, std::size_t n);

/// Componentwise mean of equally shaped weight vectors. Each component's
/// values are sorted, summed with error-free TwoSum into a double-double,
/// and divided with a remainder correction, so the result is the (nearly
/// always correctly) rounded exact mean, independent of argument order,
/// and exactly x when every value is x. Throws LayoutMismatch.
WeightVector average_weights(std::span<const WeightVector> thetas);

/// One averaging cycle: each trajectory n starts from phi, takes
/// steps_per_cycle optimizer steps on AUG^n of its batch, and phi_{t+1} is the
/// componentwise mean of the results. Trajectories and batch rows run in
/// parallel; the result is bit-identical to sequential execution.
/// Throws NonFiniteLoss naming the iteration and trajectory.
WeightVector pathowave_step(const WeightVector& phi, const BatchSource& source, const TrainerConfig& cfg,
                            std::size_t t, OptimizerState* state = nullptr, CycleTrace* trace = nullptr);

struct Checkpoint {
  std::size_t iteration = 0;
  WeightVector weights;
};

struct TrainRun {
  std::vector<Checkpoint> phi_history;
  WeightVector final_weights;
  std::vector<MetricsRecord> metrics;
  /// Per-trajectory gradient steps executed: A * T * steps_per_cycle.
  std::size_t wall_steps = 0;
  /// Pre-average trajectory endpoints of the last cycle.
  CycleTrace last_cycle;
};

/// phi_0 = init_weights(arch, init_seed(cfg)), then T cycles of pathowave_step
/// on batches drawn from the pooled sources. Throws EmptySources,
/// InvalidArgument (union smaller than batch_size) and NonFiniteLoss.
TrainRun train(const TrainerConfig& cfg, std::span<const DomainDataset> sources);

/// Empirical risk minimization baseline: train() with a single trajectory.
/// Throws InvalidArgument when cfg.num_trajectories != 1.
TrainRun erm_train(const TrainerConfig& cfg, std::span<const DomainDataset> sources);

}  // namespace wavetrain
