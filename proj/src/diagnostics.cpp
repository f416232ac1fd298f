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

#include "wavetrain/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "wavetrain/error.hpp"
#include "wavetrain/io.hpp"
#include "wavetrain/rng.hpp"

namespace wavetrain {

double interpolation_barrier(std::span<const double> lambdas, std::span<const double> losses) {
  if (lambdas.size() != losses.size() || losses.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "curve needs matching lambdas and losses");
  const double l0 = losses.front();
  const double l1 = losses.back();
  double barrier = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < losses.size(); ++j) {
    const double lam = lambdas[j];
    barrier = std::max(barrier, losses[j] - ((1.0 - lam) * l0 + lam * l1));
  }
  return barrier;
}

InterpolationCurve lmc_curve(const WeightVector& w1, const WeightVector& w2, const LossFn& loss, std::size_t K) {
  if (!w1.same_layout(w2)) throw Error(ErrorCode::LayoutMismatch, "interpolation endpoints have different layouts");
  if (K < 2) throw Error(ErrorCode::InvalidArgument, "K must be >= 2");
  InterpolationCurve c;
  for (std::size_t j = 0; j <= K; ++j) {
    const double lam = static_cast<double>(j) / static_cast<double>(K);
    c.lambdas.push_back(lam);
    if (j == 0)
      c.losses.push_back(loss(w1));
    else if (j == K)
      c.losses.push_back(loss(w2));
    else
      c.losses.push_back(loss(lerp(w1, w2, lam)));
  }
  c.barrier = interpolation_barrier(c.lambdas, c.losses);
  return c;
}

InterpolationCurve lmc_curve(const WeightVector& w1, const WeightVector& w2, const DomainDataset& dataset,
                             std::size_t K) {
  return lmc_curve(w1, w2, [&](const WeightVector& w) { return evaluate(w, dataset).loss; }, K);
}

double flatness_proxy(const WeightVector& w, const LossFn& loss, double radius, std::size_t samples,
                      std::uint64_t seed) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be > 0");
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  const double base = loss(w);
  Rng rng(seed);
  std::vector<double> u(w.size());
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double norm2 = 0.0;
    for (double& x : u) {
      x = rng.normal();
      norm2 += x * x;
    }
    const double scale = radius / std::sqrt(norm2);
    WeightVector probe = w;
    for (std::size_t i = 0; i < u.size(); ++i) probe.values[i] += scale * u[i];
    total += loss(probe) - base;
  }
  return total / static_cast<double>(samples);
}

double flatness_proxy(const WeightVector& w, const DomainDataset& dataset, double radius, std::size_t samples,
                      std::uint64_t seed) {
  return flatness_proxy(w, [&](const WeightVector& v) { return evaluate(v, dataset).loss; }, radius, samples, seed);
}

std::vector<MetricsRecord> per_domain_eval(const WeightVector& w, std::span<const DomainDataset> domains,
                                           std::span<const std::string> splits, std::size_t iteration) {
  if (domains.empty()) throw Error(ErrorCode::EmptyEval, "no domains to evaluate");
  if (!splits.empty() && splits.size() != domains.size())
    throw Error(ErrorCode::InvalidArgument, "need one split name per domain");
  std::vector<MetricsRecord> out;
  double loss_sum = 0.0;
  double correct = 0.0;
  std::size_t total = 0;
  for (std::size_t d = 0; d < domains.size(); ++d) {
    const DomainDataset& ds = domains[d];
    if (ds.size() == 0) throw Error(ErrorCode::EmptyEval, "domain " + std::to_string(d) + " has no samples");
    const EvalResult r = evaluate(w, ds);
    const int id = ds.domain_ids.empty() ? static_cast<int>(d) : ds.domain_ids.front();
    out.push_back({iteration, splits.empty() ? "domain" : splits[d], id, r.loss, r.accuracy});
    const auto n = static_cast<double>(ds.size());
    loss_sum += r.loss * n;
    correct += std::round(r.accuracy * n);
    total += ds.size();
  }
  const auto n = static_cast<double>(total);
  out.push_back({iteration, "pooled", std::nullopt, loss_sum / n, correct / n});
  return out;
}

void write_curve_csv(const InterpolationCurve& curve, const std::filesystem::path& path) {
  std::string text = "lambda,loss\n";
  char buf[96];
  for (std::size_t j = 0; j < curve.lambdas.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", curve.lambdas[j], curve.losses[j]);
    text += buf;
  }
  write_text_file(path, text);
}

std::string curve_summary_json(const InterpolationCurve& curve) {
  nlohmann::json j = {
      {"K", curve.lambdas.empty() ? 0 : curve.lambdas.size() - 1},
      {"barrier", curve.barrier},
      {"loss_start", curve.losses.empty() ? 0.0 : curve.losses.front()},
      {"loss_end", curve.losses.empty() ? 0.0 : curve.losses.back()},
      {"loss_max", curve.losses.empty() ? 0.0 : *std::max_element(curve.losses.begin(), curve.losses.end())},
  };
  return j.dump(2) + "\n";
}

}  // namespace wavetrain
