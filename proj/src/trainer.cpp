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

#include "wavetrain/trainer.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>

#include "wavetrain/error.hpp"

namespace wavetrain {

void TrainerConfig::validate() const {
  arch.validate();
  if (num_trajectories < 1) throw Error(ErrorCode::InvalidArgument, "num_trajectories must be >= 1");
  if (aug_specs.size() != num_trajectories)
    throw Error(ErrorCode::InvalidArgument, "need one aug spec per trajectory (" + std::to_string(num_trajectories) +
                                                "), got " + std::to_string(aug_specs.size()));
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be a positive finite number");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (steps_per_cycle < 1) throw Error(ErrorCode::InvalidArgument, "steps_per_cycle must be >= 1");
  if (eval_interval < 1) throw Error(ErrorCode::InvalidArgument, "eval_interval must be >= 1");
  if (!trajectory_tags.empty() && trajectory_tags.size() != num_trajectories)
    throw Error(ErrorCode::InvalidArgument, "trajectory_tags must be empty or have one tag per trajectory");
}

std::uint64_t TrainerConfig::trajectory_tag(std::size_t n) const {
  return trajectory_tags.empty() ? static_cast<std::uint64_t>(n) : trajectory_tags[n];
}

BatchSource::BatchSource(std::span<const DomainDataset> sources) {
  for (const DomainDataset& ds : sources)
    for (std::size_t i = 0; i < ds.size(); ++i) refs_.push_back({&ds, i});
  if (refs_.empty()) throw Error(ErrorCode::EmptySources, "no source samples to train on");
}

const RgbImage& BatchSource::image(std::size_t i) const { return refs_.at(i).dataset->images[refs_[i].index]; }
int BatchSource::label(std::size_t i) const { return refs_.at(i).dataset->labels[refs_[i].index]; }

std::vector<std::size_t> BatchSource::draw(Rng& rng, std::size_t batch_size) const {
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = rng.uniform_index(refs_.size());
  return idx;
}

std::uint64_t init_seed(const TrainerConfig& cfg) { return derive_seed(cfg.master_seed, {kInitStream}); }

std::vector<std::size_t> trajectory_batch_indices(const BatchSource& source, const TrainerConfig& cfg, std::size_t t,
                                                  std::size_t step, std::size_t n) {
  const std::uint64_t seed =
      cfg.batch_mode == BatchMode::Shared
          ? derive_seed(cfg.master_seed, {kBatchStream, t, step})
          : derive_seed(cfg.master_seed, {kBatchStream, t, step, cfg.trajectory_tag(n)});
  Rng rng(seed);
  return source.draw(rng, cfg.batch_size);
}

Matrix augmented_batch(const BatchSource& source, std::span<const std::size_t> indices, const AugSpec& spec,
                       const TrainerConfig& cfg, std::size_t t, std::size_t step, std::size_t n) {
  const std::size_t cols = source.image(indices.front()).data.size();
  Matrix batch(indices.size(), cols);
  const std::uint64_t tag = cfg.trajectory_tag(n);
  for (std::size_t i : indices)
    if (source.image(i).data.size() != cols) throw Error(ErrorCode::DimensionMismatch, "source images differ in size");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(indices.size()); ++s) {
    const auto slot = static_cast<std::size_t>(s);
    const RgbImage& src = source.image(indices[slot]);
    double* row = batch.data.data() + slot * cols;
    if (spec.is_identity()) {
      encode_pixels(src.data, row);
    } else {
      Rng rng(derive_seed(cfg.master_seed, {kAugStream, t, step, tag, slot}));
      const RgbImage out = apply(spec, src, rng);
      encode_pixels(out.data, row);
    }
  }
  return batch;
}

namespace {

struct DoubleDouble {
  double hi;
  double lo;
};

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

// Rounded mean of `vals` (modified in place by sorting).
double component_mean(std::span<double> vals) {
  if (vals.size() == 1) return vals[0];
  std::sort(vals.begin(), vals.end());
  double hi = vals[0];
  double lo = 0.0;
  for (std::size_t k = 1; k < vals.size(); ++k) {
    const DoubleDouble s = two_sum(hi, vals[k]);
    hi = s.hi;
    lo += s.lo;
  }
  const DoubleDouble n = two_sum(hi, lo);
  const auto count = static_cast<double>(vals.size());
  double q = n.hi / count;
  double r = std::fma(-q, count, n.hi) + n.lo;
  if (r != 0.0) q += r / count;
  return q;
}

void average_into(std::span<const std::vector<double>* const> inputs, std::vector<double>& out) {
  const std::size_t len = inputs.front()->size();
  const std::size_t count = inputs.size();
  out.assign(len, 0.0);
#pragma omp parallel
  {
    std::vector<double> vals(count);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(len); ++i) {
      for (std::size_t k = 0; k < count; ++k) vals[k] = (*inputs[k])[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = component_mean(vals);
    }
  }
}

struct TrajectoryState {
  WeightVector theta;
  std::vector<double> m;
  std::vector<double> v;
  double last_loss = 0.0;
};

void optimizer_update(TrajectoryState& ts, const WeightVector& grad, const TrainerConfig& cfg, std::size_t adam_step) {
  const double sign = cfg.ascend ? 1.0 : -1.0;
  if (cfg.optimizer == OptimizerKind::Sgd) {
    ts.theta = axpy(ts.theta, sign * cfg.learning_rate, grad);
    return;
  }
  const AdamParams& a = cfg.adam;
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(adam_step));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(adam_step));
  for (std::size_t i = 0; i < ts.theta.values.size(); ++i) {
    const double g = grad.values[i];
    ts.m[i] = a.beta1 * ts.m[i] + (1.0 - a.beta1) * g;
    ts.v[i] = a.beta2 * ts.v[i] + (1.0 - a.beta2) * g * g;
    const double mhat = ts.m[i] / c1;
    const double vhat = ts.v[i] / c2;
    ts.theta.values[i] += sign * cfg.learning_rate * mhat / (std::sqrt(vhat) + a.epsilon);
  }
}

void run_trajectory(TrajectoryState& ts, const BatchSource& source, const TrainerConfig& cfg, std::size_t t,
                    std::size_t n, std::size_t adam_step0) {
  for (std::size_t step = 0; step < cfg.steps_per_cycle; ++step) {
    const auto indices = trajectory_batch_indices(source, cfg, t, step, n);
    const Matrix batch = augmented_batch(source, indices, cfg.aug_specs[n], cfg, t, step, n);
    std::vector<int> labels(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) labels[i] = source.label(indices[i]);
    const LossAndGrad lg = loss_and_grad(ts.theta, batch, labels);
    if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) throw NonFiniteLoss(t, n);
    ts.last_loss = lg.loss;
    optimizer_update(ts, lg.grad, cfg, adam_step0 + step + 1);
    if (!ts.theta.all_finite()) throw NonFiniteLoss(t, n);
  }
}

}  // namespace

WeightVector average_weights(std::span<const WeightVector> thetas) {
  if (thetas.empty()) throw Error(ErrorCode::InvalidArgument, "cannot average zero weight vectors");
  std::vector<const std::vector<double>*> inputs;
  for (const auto& th : thetas) {
    if (!th.same_layout(thetas.front())) throw Error(ErrorCode::LayoutMismatch, "averaging different layouts");
    inputs.push_back(&th.values);
  }
  WeightVector out(thetas.front().arch);
  average_into(inputs, out.values);
  return out;
}

WeightVector pathowave_step(const WeightVector& phi, const BatchSource& source, const TrainerConfig& cfg,
                            std::size_t t, OptimizerState* state, CycleTrace* trace) {
  cfg.validate();
  if (phi.arch != cfg.arch) throw Error(ErrorCode::LayoutMismatch, "phi does not match the configured architecture");
  if (!phi.all_finite()) throw NonFiniteLoss(t, 0);

  OptimizerState local;
  OptimizerState& st = state != nullptr ? *state : local;
  const bool adam = cfg.optimizer == OptimizerKind::Adam;
  if (adam && st.m.size() != phi.size()) {
    st.m.assign(phi.size(), 0.0);
    st.v.assign(phi.size(), 0.0);
  }

  const std::size_t A = cfg.num_trajectories;
  std::vector<TrajectoryState> traj(A);
  for (auto& ts : traj) {
    ts.theta = phi;
    if (adam) {
      ts.m = st.m;
      ts.v = st.v;
    }
  }

  // With fewer trajectories than threads the batch-level kernels carry the
  // parallelism; otherwise each thread owns whole trajectories.
  std::vector<std::exception_ptr> errors(A);
  const bool outer = A >= static_cast<std::size_t>(omp_get_max_threads()) && A > 1;
#pragma omp parallel for schedule(static) if (outer)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(A); ++n) {
    const auto nu = static_cast<std::size_t>(n);
    try {
      run_trajectory(traj[nu], source, cfg, t, nu, st.step);
    } catch (...) {
      errors[nu] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<const std::vector<double>*> inputs;
  for (const auto& ts : traj) inputs.push_back(&ts.theta.values);
  WeightVector next(phi.arch);
  average_into(inputs, next.values);

  if (adam) {
    std::vector<const std::vector<double>*> ms, vs;
    for (const auto& ts : traj) {
      ms.push_back(&ts.m);
      vs.push_back(&ts.v);
    }
    average_into(ms, st.m);
    average_into(vs, st.v);
  }
  st.step += cfg.steps_per_cycle;

  if (trace != nullptr) {
    trace->thetas.clear();
    trace->losses.clear();
    for (auto& ts : traj) {
      trace->losses.push_back(ts.last_loss);
      trace->thetas.push_back(std::move(ts.theta));
    }
  }
  return next;
}

TrainRun train(const TrainerConfig& cfg, std::span<const DomainDataset> sources) {
  cfg.validate();
  if (sources.empty()) throw Error(ErrorCode::EmptySources, "at least one source dataset is required");
  const BatchSource source(sources);
  if (source.size() < cfg.batch_size)
    throw Error(ErrorCode::InvalidArgument, "pooled sources (" + std::to_string(source.size()) +
                                                ") smaller than batch_size (" + std::to_string(cfg.batch_size) + ")");

  const std::size_t eval_n = cfg.eval_samples == 0 ? source.size() : std::min(cfg.eval_samples, source.size());
  std::vector<RgbImage> eval_images;
  std::vector<int> eval_labels;
  for (std::size_t i = 0; i < eval_n; ++i) {
    eval_images.push_back(source.image(i));
    eval_labels.push_back(source.label(i));
  }
  const Matrix eval_batch = flatten_images(eval_images);
  eval_images.clear();

  TrainRun run;
  WeightVector phi = init_weights(cfg.arch, init_seed(cfg));
  auto record = [&](std::size_t iteration) {
    const EvalResult r = evaluate(phi, eval_batch, eval_labels);
    run.metrics.push_back({iteration, "train", std::nullopt, r.loss, r.accuracy});
  };

  OptimizerState state;
  record(0);
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const bool last = t + 1 == cfg.iterations;
    phi = pathowave_step(phi, source, cfg, t, &state, last ? &run.last_cycle : nullptr);
    run.wall_steps += cfg.num_trajectories * cfg.steps_per_cycle;
    const std::size_t done = t + 1;
    if (done % cfg.eval_interval == 0) record(done);
    if ((cfg.checkpoint_interval > 0 && done % cfg.checkpoint_interval == 0) || last)
      run.phi_history.push_back({done, phi});
  }
  run.final_weights = std::move(phi);
  return run;
}

TrainRun erm_train(const TrainerConfig& cfg, std::span<const DomainDataset> sources) {
  if (cfg.num_trajectories != 1)
    throw Error(ErrorCode::InvalidArgument, "the ERM baseline trains exactly one trajectory");
  return train(cfg, sources);
}

}  // namespace wavetrain
