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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wavetrain/metrics.hpp"
#include "wavetrain/model.hpp"
#include "wavetrain/synth_domains.hpp"

namespace wavetrain {

using LossFn = std::function<double(const WeightVector&)>;

/// Loss along the straight segment between two weight vectors.
struct InterpolationCurve {
  std::vector<double> lambdas;
  std::vector<double> losses;
  /// max over lambda of loss(lambda) - ((1 - lambda) loss(0) + lambda loss(1)).
  double barrier = 0.0;
};

double interpolation_barrier(std::span<const double> lambdas, std::span<const double> losses);

/// Loss at w(lambda) = (1 - lambda) w1 + lambda w2 for lambda = j / K,
/// j = 0..K. lambda = 0 and 1 evaluate w1 and w2 themselves. Throws
/// LayoutMismatch and InvalidArgument (K < 2).
InterpolationCurve lmc_curve(const WeightVector& w1, const WeightVector& w2, const LossFn& loss, std::size_t K);
InterpolationCurve lmc_curve(const WeightVector& w1, const WeightVector& w2, const DomainDataset& dataset,
                             std::size_t K = 20);

/// Mean over `samples` directions u (Gaussian draws normalized to the unit
/// sphere, coordinate order, from Rng(seed)) of L(w + radius u) - L(w).
/// Throws InvalidArgument unless radius > 0 and samples >= 1.
double flatness_proxy(const WeightVector& w, const LossFn& loss, double radius, std::size_t samples,
                      std::uint64_t seed);
double flatness_proxy(const WeightVector& w, const DomainDataset& dataset, double radius, std::size_t samples,
                      std::uint64_t seed);

/// One record per domain, in the given order, plus a trailing pooled record
/// over all samples. `splits` names each domain's row ("source", "val",
/// ...); when empty every row is labeled "domain". Throws EmptyEval.
std::vector<MetricsRecord> per_domain_eval(const WeightVector& w, std::span<const DomainDataset> domains,
                                           std::span<const std::string> splits = {}, std::size_t iteration = 0);

/// `lambda,loss` rows with 6 decimals.
void write_curve_csv(const InterpolationCurve& curve, const std::filesystem::path& path);
std::string curve_summary_json(const InterpolationCurve& curve);

}  // namespace wavetrain
