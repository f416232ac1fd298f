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
#include <vector>

#include "wavetrain/color_deconv.hpp"
#include "wavetrain/image.hpp"

namespace wavetrain {

inline constexpr std::size_t kSynthImageSize = 32;

enum class DomainRole { Source, Target };

/// Generative description of one simulated site: a perturbed stain basis
/// plus scanner-like photometric changes.
struct DomainSpec {
  int domain_id = 0;
  StainMatrix stain_matrix = default_stain_matrix();
  double brightness_shift = 0.0;  // [-0.1, 0.1]
  double contrast_factor = 1.0;   // [0.8, 1.2]
  double noise_sigma = 0.0;       // [0, 0.05]
  std::uint64_t seed = 0;

  bool operator==(const DomainSpec&) const = default;
};

struct DomainDataset {
  std::vector<RgbImage> images;
  std::vector<int> labels;
  std::vector<int> domain_ids;
  DomainRole role = DomainRole::Source;

  std::size_t size() const noexcept { return images.size(); }
  /// Throws EmptyDataset, BadDimensions or BadLabel.
  void validate() const;
  bool operator==(const DomainDataset&) const = default;
};

/// Draw order from Rng(derive_seed(seed, {domain_id})): up to 100 attempts of
/// nine U(-perturb_scale, perturb_scale) offsets (row-major) added to the
/// default stain matrix and renormalized, retried while singular; then
/// brightness, contrast and noise sigma uniformly in their ranges.
/// perturb_scale == 0 keeps the default matrix exactly.
/// Throws InvalidArgument outside [0, 0.3] and DegenerateMatrix when every
/// attempt is singular.
DomainSpec make_domain(int domain_id, double perturb_scale, std::uint64_t seed);

/// Renders n 32x32 samples. Sample i uses its own stream
/// Rng(derive_seed(seed, {domain_id, i})), drawing in order: label
/// (Bernoulli 0.5), bump count (class 1: 12..18, class 0: 4..8), eosin
/// background level, then per bump center y, center x, width and
/// hematoxylin amplitude, then one normal() per pixel channel for noise.
DomainDataset sample_dataset(const DomainSpec& spec, std::size_t n, std::uint64_t seed,
                             DomainRole role = DomainRole::Source);

/// Reads a folder of P6 PPM patches listed by a CSV with header
/// `filename,label,domain`, preserving CSV row order. An empty labels_csv
/// path means `<dir>/labels.csv`. Throws EmptyDataset, MissingFile (naming
/// the file), BadDimensions or BadLabel.
DomainDataset load_patch_folder(const std::filesystem::path& dir, const std::filesystem::path& labels_csv = {},
                                DomainRole role = DomainRole::Source);

/// Writes `<dir>/NNNNNN.ppm` plus `<dir>/labels.csv` in the format
/// load_patch_folder reads.
void save_patch_folder(const DomainDataset& dataset, const std::filesystem::path& dir);

/// Mean hematoxylin concentration over all pixels, using the default basis.
double mean_hematoxylin(const RgbImage& img);

}  // namespace wavetrain
