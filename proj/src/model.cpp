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

#include "wavetrain/model.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "wavetrain/error.hpp"
#include "wavetrain/rng.hpp"
#include "wavetrain/synth_domains.hpp"

namespace wavetrain {

void Architecture::validate() const {
  if (input_dim == 0) throw Error(ErrorCode::InvalidArgument, "input_dim must be >= 1");
  for (std::size_t h : hidden)
    if (h == 0) throw Error(ErrorCode::InvalidArgument, "hidden widths must be >= 1");
  if (num_classes < 2) throw Error(ErrorCode::InvalidArgument, "num_classes must be >= 2");
}

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const std::size_t fan_out = l < hidden.size() ? hidden[l] : num_classes;
    total += fan_in * fan_out + fan_out;
    fan_in = fan_out;
  }
  return total;
}

std::vector<LayerSlice> layer_layout(const Architecture& arch) {
  std::vector<LayerSlice> layout;
  std::size_t offset = 0;
  std::size_t fan_in = arch.input_dim;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::size_t fan_out = l < arch.hidden.size() ? arch.hidden[l] : arch.num_classes;
    layout.push_back({fan_in, fan_out, offset, offset + fan_in * fan_out});
    offset += fan_in * fan_out + fan_out;
    fan_in = fan_out;
  }
  return layout;
}

WeightVector::WeightVector(Architecture a) : arch(std::move(a)) {
  arch.validate();
  values.assign(arch.parameter_count(), 0.0);
}

WeightVector::WeightVector(Architecture a, std::vector<double> v) : arch(std::move(a)), values(std::move(v)) {
  arch.validate();
  if (values.size() != arch.parameter_count())
    throw Error(ErrorCode::LayoutMismatch, "weight count " + std::to_string(values.size()) +
                                               " does not match architecture (" +
                                               std::to_string(arch.parameter_count()) + ")");
}

bool WeightVector::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

WeightVector axpy(const WeightVector& a, double scale, const WeightVector& b) {
  if (!a.same_layout(b)) throw Error(ErrorCode::LayoutMismatch, "axpy on different layouts");
  WeightVector out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] + scale * b.values[i];
  return out;
}

WeightVector lerp(const WeightVector& a, const WeightVector& b, double lambda) {
  if (!a.same_layout(b)) throw Error(ErrorCode::LayoutMismatch, "interpolation between different layouts");
  WeightVector out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = (1.0 - lambda) * a.values[i] + lambda * b.values[i];
  return out;
}

double l2_norm(const WeightVector& w) noexcept {
  double s = 0.0;
  for (double v : w.values) s += v * v;
  return std::sqrt(s);
}

void encode_pixels(std::span<const double> pixels, double* dst) {
  std::transform(pixels.begin(), pixels.end(), dst, [](double v) { return v - kInputOffset; });
}

Matrix flatten_images(std::span<const RgbImage> images) {
  if (images.empty()) return {};
  const std::size_t cols = images.front().data.size();
  Matrix m(images.size(), cols);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].data.size() != cols)
      throw Error(ErrorCode::DimensionMismatch, "images in a batch must share dimensions");
    encode_pixels(images[i].data, m.data.data() + i * cols);
  }
  return m;
}

WeightVector init_weights(const Architecture& arch, std::uint64_t seed) {
  WeightVector w(arch);
  Rng rng(seed);
  for (const LayerSlice& s : layer_layout(arch)) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(s.fan_in));
    for (std::size_t i = 0; i < s.fan_in * s.fan_out; ++i) w.values[s.weight_offset + i] = stddev * rng.normal();
  }
  return w;
}

std::size_t argmax(std::span<const double> row) noexcept {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

namespace {

void check_batch(const WeightVector& w, const Matrix& batch) {
  if (w.values.size() != w.arch.parameter_count())
    throw Error(ErrorCode::LayoutMismatch, "weight vector does not match its architecture");
  if (batch.cols != w.arch.input_dim)
    throw Error(ErrorCode::DimensionMismatch, "batch has " + std::to_string(batch.cols) +
                                                  " columns, network expects " + std::to_string(w.arch.input_dim));
}

void check_labels(const WeightVector& w, const Matrix& batch, std::span<const int> labels) {
  if (labels.size() != batch.rows)
    throw Error(ErrorCode::DimensionMismatch, "label count does not match batch rows");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= w.arch.num_classes)
      throw Error(ErrorCode::BadLabel, "label " + std::to_string(y) + " out of range");
}

std::size_t chunk_count(std::size_t rows) { return (rows + kChunkRows - 1) / kChunkRows; }

// Activations of one chunk of rows: acts[0] is the input block, acts[l + 1]
// the (post-ReLU for hidden layers) output of layer l.
struct ChunkForward {
  std::vector<std::vector<double>> acts;
};

void forward_chunk(const WeightVector& w, const std::vector<LayerSlice>& layout, const Matrix& batch,
                   std::size_t r0, std::size_t r1, ChunkForward& fw) {
  const std::size_t m = r1 - r0;
  fw.acts.resize(layout.size() + 1);
  fw.acts[0].assign(batch.data.begin() + static_cast<std::ptrdiff_t>(r0 * batch.cols),
                    batch.data.begin() + static_cast<std::ptrdiff_t>(r1 * batch.cols));
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const LayerSlice& s = layout[l];
    const double* W = w.values.data() + s.weight_offset;
    const double* b = w.values.data() + s.bias_offset;
    const std::vector<double>& in = fw.acts[l];
    std::vector<double>& out = fw.acts[l + 1];
    out.resize(m * s.fan_out);
    for (std::size_t i = 0; i < m; ++i) {
      double* o = out.data() + i * s.fan_out;
      std::copy(b, b + s.fan_out, o);
      const double* x = in.data() + i * s.fan_in;
      for (std::size_t k = 0; k < s.fan_in; ++k) {
        const double a = x[k];
        if (a == 0.0) continue;
        const double* wr = W + k * s.fan_out;
        for (std::size_t j = 0; j < s.fan_out; ++j) o[j] += a * wr[j];
      }
      if (l + 1 < layout.size())
        for (std::size_t j = 0; j < s.fan_out; ++j) o[j] = std::max(o[j], 0.0);
    }
  }
}

// Returns the chunk's summed (unnormalized) loss and adds the gradient of
// loss_sum * inv_n into `grad`.
double backward_chunk(const WeightVector& w, const std::vector<LayerSlice>& layout, std::span<const int> labels,
                      std::size_t r0, std::size_t r1, double inv_n, const ChunkForward& fw, double* grad) {
  const std::size_t m = r1 - r0;
  const std::size_t classes = w.arch.num_classes;
  const std::vector<double>& logits = fw.acts.back();
  std::vector<double> delta(m * classes);
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* z = logits.data() + i * classes;
    const double zmax = *std::max_element(z, z + classes);
    double denom = 0.0;
    for (std::size_t j = 0; j < classes; ++j) denom += std::exp(z[j] - zmax);
    const double lse = zmax + std::log(denom);
    const auto y = static_cast<std::size_t>(labels[r0 + i]);
    loss_sum += lse - z[y];
    for (std::size_t j = 0; j < classes; ++j) {
      const double p = std::exp(z[j] - lse);
      delta[i * classes + j] = (p - (j == y ? 1.0 : 0.0)) * inv_n;
    }
  }

  std::vector<double> delta_prev;
  for (std::size_t l = layout.size(); l-- > 0;) {
    const LayerSlice& s = layout[l];
    const std::vector<double>& in = fw.acts[l];
    double* gW = grad + s.weight_offset;
    double* gb = grad + s.bias_offset;
    for (std::size_t i = 0; i < m; ++i) {
      const double* d = delta.data() + i * s.fan_out;
      const double* x = in.data() + i * s.fan_in;
      for (std::size_t k = 0; k < s.fan_in; ++k) {
        const double a = x[k];
        if (a == 0.0) continue;
        double* g = gW + k * s.fan_out;
        for (std::size_t j = 0; j < s.fan_out; ++j) g[j] += a * d[j];
      }
      for (std::size_t j = 0; j < s.fan_out; ++j) gb[j] += d[j];
    }
    if (l == 0) break;
    const double* W = w.values.data() + s.weight_offset;
    delta_prev.assign(m * s.fan_in, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* d = delta.data() + i * s.fan_out;
      const double* x = in.data() + i * s.fan_in;
      double* dp = delta_prev.data() + i * s.fan_in;
      for (std::size_t k = 0; k < s.fan_in; ++k) {
        if (!(x[k] > 0.0)) continue;
        const double* wr = W + k * s.fan_out;
        double acc = 0.0;
        for (std::size_t j = 0; j < s.fan_out; ++j) acc += d[j] * wr[j];
        dp[k] = acc;
      }
    }
    delta.swap(delta_prev);
  }
  return loss_sum;
}

}  // namespace

Matrix forward(const WeightVector& w, const Matrix& batch) {
  check_batch(w, batch);
  const auto layout = layer_layout(w.arch);
  Matrix logits(batch.rows, w.arch.num_classes);
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(batch.rows));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t r0 = static_cast<std::size_t>(c) * kChunkRows;
    const std::size_t r1 = std::min(batch.rows, r0 + kChunkRows);
    ChunkForward fw;
    forward_chunk(w, layout, batch, r0, r1, fw);
    std::copy(fw.acts.back().begin(), fw.acts.back().end(),
              logits.data.begin() + static_cast<std::ptrdiff_t>(r0 * logits.cols));
  }
  return logits;
}

LossAndGrad loss_and_grad(const WeightVector& w, const Matrix& batch, std::span<const int> labels) {
  check_batch(w, batch);
  check_labels(w, batch, labels);
  if (batch.rows == 0) throw Error(ErrorCode::DimensionMismatch, "empty batch");
  const auto layout = layer_layout(w.arch);
  const std::size_t chunks = chunk_count(batch.rows);
  const std::size_t params = w.values.size();
  const double inv_n = 1.0 / static_cast<double>(batch.rows);

  std::vector<double> partial(chunks * params, 0.0);
  std::vector<double> loss_sums(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const std::size_t r0 = cu * kChunkRows;
    const std::size_t r1 = std::min(batch.rows, r0 + kChunkRows);
    ChunkForward fw;
    forward_chunk(w, layout, batch, r0, r1, fw);
    loss_sums[cu] = backward_chunk(w, layout, labels, r0, r1, inv_n, fw, partial.data() + cu * params);
  }

  LossAndGrad out{0.0, WeightVector(w.arch)};
  double* g = out.grad.values.data();
  const double* p = partial.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(params); ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) acc += p[c * params + static_cast<std::size_t>(i)];
    g[i] = acc;
  }
  double total = 0.0;
  for (double s : loss_sums) total += s;
  out.loss = total * inv_n;
  return out;
}

namespace {

struct EvalSums {
  double loss_sum = 0.0;
  std::size_t correct = 0;
};

// Per-chunk loss sums and correct counts, accumulated in chunk order.
void accumulate_eval(const WeightVector& w, const std::vector<LayerSlice>& layout, const Matrix& batch,
                     std::span<const int> labels, EvalSums& sums) {
  const std::size_t chunks = chunk_count(batch.rows);
  const std::size_t classes = w.arch.num_classes;
  std::vector<double> loss(chunks, 0.0);
  std::vector<std::size_t> correct(chunks, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const std::size_t r0 = cu * kChunkRows;
    const std::size_t r1 = std::min(batch.rows, r0 + kChunkRows);
    ChunkForward fw;
    forward_chunk(w, layout, batch, r0, r1, fw);
    const std::vector<double>& z = fw.acts.back();
    for (std::size_t i = 0; i < r1 - r0; ++i) {
      std::span<const double> row(z.data() + i * classes, classes);
      const double zmax = *std::max_element(row.begin(), row.end());
      double denom = 0.0;
      for (double v : row) denom += std::exp(v - zmax);
      const auto y = static_cast<std::size_t>(labels[r0 + i]);
      loss[cu] += zmax + std::log(denom) - row[y];
      if (argmax(row) == y) ++correct[cu];
    }
  }
  for (std::size_t c = 0; c < chunks; ++c) {
    sums.loss_sum += loss[c];
    sums.correct += correct[c];
  }
}

}  // namespace

EvalResult evaluate(const WeightVector& w, const Matrix& batch, std::span<const int> labels) {
  check_batch(w, batch);
  check_labels(w, batch, labels);
  if (batch.rows == 0) throw Error(ErrorCode::EmptyEval, "nothing to evaluate");
  EvalSums sums;
  accumulate_eval(w, layer_layout(w.arch), batch, labels, sums);
  const auto n = static_cast<double>(batch.rows);
  return {sums.loss_sum / n, static_cast<double>(sums.correct) / n};
}

EvalResult evaluate(const WeightVector& w, const DomainDataset& dataset) {
  if (dataset.size() == 0) throw Error(ErrorCode::EmptyEval, "nothing to evaluate");
  // Blocks are a multiple of kChunkRows, so the chunk-ordered sums match a
  // single call on the whole dataset.
  constexpr std::size_t kBlock = 16 * kChunkRows;
  const auto layout = layer_layout(w.arch);
  EvalSums sums;
  for (std::size_t start = 0; start < dataset.size(); start += kBlock) {
    const std::size_t end = std::min(dataset.size(), start + kBlock);
    const Matrix block = flatten_images(std::span(dataset.images).subspan(start, end - start));
    check_batch(w, block);
    const std::span<const int> labels = std::span(dataset.labels).subspan(start, end - start);
    check_labels(w, block, labels);
    accumulate_eval(w, layout, block, labels, sums);
  }
  const auto n = static_cast<double>(dataset.size());
  return {sums.loss_sum / n, static_cast<double>(sums.correct) / n};
}

}  // namespace wavetrain
