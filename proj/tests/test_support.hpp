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

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "wavetrain/image.hpp"
#include "wavetrain/rng.hpp"
#include "wavetrain/synth_domains.hpp"

namespace wavetrain::testing {

inline RgbImage random_image(std::size_t h, std::size_t w, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Rng rng(seed);
  RgbImage img(h, w);
  for (double& v : img.data) v = rng.uniform(lo, hi);
  return img;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wavetrain_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Tiny dataset whose images have the given size, labels alternating.
inline DomainDataset toy_dataset(std::size_t n, std::size_t side, std::uint64_t seed, int domain = 0) {
  DomainDataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    ds.images.push_back(random_image(side, side, seed + i));
    ds.labels.push_back(static_cast<int>(i % 2));
    ds.domain_ids.push_back(domain);
  }
  return ds;
}

}  // namespace wavetrain::testing
