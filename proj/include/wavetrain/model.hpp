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

#include "wavetrain/image.hpp"

namespace wavetrain {

struct DomainDataset;

/// Fully connected ReLU network: input -> hidden... -> logits.
struct Architecture {
  std::size_t input_dim = 32 * 32 * 3;
  std::vector<std::size_t> hidden{64, 32};
  std::size_t num_classes = 2;

  /// Throws InvalidArgument when a width is zero or num_classes < 2.
  void validate() const;
  std::size_t num_layers() const noexcept { return hidden.size() + 1; }
  std::size_t parameter_count() const;

  bool operator==(const Architecture&) const = default;
};

/// Offsets of one affine layer inside the flat weight vector. Weights are a
/// fan_in x fan_out row-major block (y = x W + b), followed by fan_out biases.
struct LayerSlice {
  std::size_t fan_in;
  std::size_t fan_out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

/// Layer 1 weights, layer 1 biases, layer 2 weights, ... in that order.
std::vector<LayerSlice> layer_layout(const Architecture& arch);

/// Flat parameter vector tagged with the architecture it lays out.
struct WeightVector {
  Architecture arch;
  std::vector<double> values;

  WeightVector() = default;
  explicit WeightVector(Architecture a);
  WeightVector(Architecture a, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  bool all_finite() const noexcept;
  bool same_layout(const WeightVector& other) const noexcept {
    return arch == other.arch && values.size() == other.values.size();
  }
  bool operator==(const WeightVector&) const = default;
};

/// out = a + scale * b, componentwise. Throws LayoutMismatch.
WeightVector axpy(const WeightVector& a, double scale, const WeightVector& b);
/// (1 - lambda) * a + lambda * b, componentwise. Throws LayoutMismatch.
WeightVector lerp(const WeightVector& a, const WeightVector& b, double lambda);
double l2_norm(const WeightVector& w) noexcept;

/// Dense row-major matrix; one sample per row.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  bool operator==(const Matrix&) const = default;
};

/// Pixel values enter the network shifted by this offset.
inline constexpr double kInputOffset = 0.5;

/// Writes `pixels - kInputOffset` to `dst`.
void encode_pixels(std::span<const double> pixels, double* dst);

/// One row per image, in image order, using the image's interleaved layout.
/// Values are encoded with encode_pixels.
Matrix flatten_images(std::span<const RgbImage> images);

/// He initialization: weights ~ Normal(0, 2 / fan_in) drawn layer by layer in
/// layout order from Rng(seed); biases zero.
WeightVector init_weights(const Architecture& arch, std::uint64_t seed);

struct LossAndGrad {
  double loss = 0.0;
  WeightVector grad;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Rows per work item in the parallel kernels. The reduction over work items
/// runs in a fixed order, so results do not depend on the thread count.
inline constexpr std::size_t kChunkRows = 16;

/// Logits (batch x num_classes). Throws DimensionMismatch.
Matrix forward(const WeightVector& w, const Matrix& batch);

/// Mean softmax cross-entropy and its exact gradient. Throws
/// DimensionMismatch on shape errors and BadLabel for out-of-range labels.
LossAndGrad loss_and_grad(const WeightVector& w, const Matrix& batch, std::span<const int> labels);

/// Mean loss and argmax accuracy; ties go to the lower class index.
EvalResult evaluate(const WeightVector& w, const Matrix& batch, std::span<const int> labels);
EvalResult evaluate(const WeightVector& w, const DomainDataset& dataset);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> row) noexcept;

/// Single-threaded, unchunked kernels kept as the reference the OpenMP
/// kernels are tested and benchmarked against.
namespace reference {
Matrix forward(const WeightVector& w, const Matrix& batch);
LossAndGrad loss_and_grad(const WeightVector& w, const Matrix& batch, std::span<const int> labels);
EvalResult evaluate(const WeightVector& w, const Matrix& batch, std::span<const int> labels);
}  // namespace reference

}  // namespace wavetrain
