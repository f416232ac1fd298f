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

// Straight-line serial kernels. Every layer is materialized for the whole
// batch and no zero-skipping is done, so this path shares no loop structure
// with the chunked OpenMP kernels in model.cpp.

#include <algorithm>
#include <cmath>

#include "wavetrain/error.hpp"
#include "wavetrain/model.hpp"

namespace wavetrain::reference {

namespace {

Matrix affine(const Matrix& in, const WeightVector& w, const LayerSlice& s) {
  Matrix out(in.rows, s.fan_out);
  for (std::size_t i = 0; i < in.rows; ++i)
    for (std::size_t j = 0; j < s.fan_out; ++j) {
      double acc = w.values[s.bias_offset + j];
      for (std::size_t k = 0; k < s.fan_in; ++k) acc += in(i, k) * w.values[s.weight_offset + k * s.fan_out + j];
      out(i, j) = acc;
    }
  return out;
}

std::vector<Matrix> activations(const WeightVector& w, const Matrix& batch) {
  if (batch.cols != w.arch.input_dim) throw Error(ErrorCode::DimensionMismatch, "batch width mismatch");
  const auto layout = layer_layout(w.arch);
  std::vector<Matrix> acts{batch};
  for (std::size_t l = 0; l < layout.size(); ++l) {
    Matrix z = affine(acts.back(), w, layout[l]);
    if (l + 1 < layout.size())
      for (double& v : z.data) v = v > 0.0 ? v : 0.0;
    acts.push_back(std::move(z));
  }
  return acts;
}

double sample_loss(std::span<const double> z, std::size_t y) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double v : z) denom += std::exp(v - zmax);
  return zmax + std::log(denom) - z[y];
}

}  // namespace

Matrix forward(const WeightVector& w, const Matrix& batch) { return activations(w, batch).back(); }

LossAndGrad loss_and_grad(const WeightVector& w, const Matrix& batch, std::span<const int> labels) {
  if (labels.size() != batch.rows) throw Error(ErrorCode::DimensionMismatch, "label count mismatch");
  const auto layout = layer_layout(w.arch);
  const auto acts = activations(w, batch);
  const Matrix& logits = acts.back();
  const std::size_t n = batch.rows;
  const std::size_t classes = w.arch.num_classes;

  LossAndGrad out{0.0, WeightVector(w.arch)};
  Matrix delta(n, classes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    out.loss += sample_loss(logits.row(i), y);
    const double zmax = *std::max_element(logits.row(i).begin(), logits.row(i).end());
    double denom = 0.0;
    for (std::size_t j = 0; j < classes; ++j) denom += std::exp(logits(i, j) - zmax);
    for (std::size_t j = 0; j < classes; ++j)
      delta(i, j) = (std::exp(logits(i, j) - zmax) / denom - (j == y ? 1.0 : 0.0)) / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);

  for (std::size_t l = layout.size(); l-- > 0;) {
    const LayerSlice& s = layout[l];
    const Matrix& in = acts[l];
    for (std::size_t k = 0; k < s.fan_in; ++k)
      for (std::size_t j = 0; j < s.fan_out; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += in(i, k) * delta(i, j);
        out.grad.values[s.weight_offset + k * s.fan_out + j] = acc;
      }
    for (std::size_t j = 0; j < s.fan_out; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += delta(i, j);
      out.grad.values[s.bias_offset + j] = acc;
    }
    if (l == 0) break;
    Matrix prev(n, s.fan_in);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < s.fan_in; ++k) {
        if (in(i, k) <= 0.0) continue;
        double acc = 0.0;
        for (std::size_t j = 0; j < s.fan_out; ++j) acc += delta(i, j) * w.values[s.weight_offset + k * s.fan_out + j];
        prev(i, k) = acc;
      }
    delta = std::move(prev);
  }
  return out;
}

EvalResult evaluate(const WeightVector& w, const Matrix& batch, std::span<const int> labels) {
  if (labels.size() != batch.rows) throw Error(ErrorCode::DimensionMismatch, "label count mismatch");
  if (batch.rows == 0) throw Error(ErrorCode::EmptyEval, "nothing to evaluate");
  const Matrix logits = reference::forward(w, batch);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    loss += sample_loss(logits.row(i), y);
    if (argmax(logits.row(i)) == y) ++correct;
  }
  const auto n = static_cast<double>(batch.rows);
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace wavetrain::reference
