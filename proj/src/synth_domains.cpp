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

#include "wavetrain/synth_domains.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wavetrain/error.hpp"
#include "wavetrain/io.hpp"
#include "wavetrain/rng.hpp"

namespace wavetrain {

namespace {

constexpr int kMaxMatrixAttempts = 100;
constexpr std::size_t kClass1MinBumps = 12, kClass1MaxBumps = 18;
constexpr std::size_t kClass0MinBumps = 4, kClass0MaxBumps = 8;
constexpr double kBumpMinWidth = 1.5, kBumpMaxWidth = 3.0;
constexpr double kBumpMinAmplitude = 0.3, kBumpMaxAmplitude = 0.6;
constexpr double kEosinMin = 0.15, kEosinMax = 0.3;

RgbImage render_sample(const DomainSpec& spec, Rng& rng, int& label) {
  constexpr std::size_t S = kSynthImageSize;
  label = rng.bernoulli(0.5) ? 1 : 0;
  const std::size_t lo = label == 1 ? kClass1MinBumps : kClass0MinBumps;
  const std::size_t hi = label == 1 ? kClass1MaxBumps : kClass0MaxBumps;
  const std::size_t bumps = lo + rng.uniform_index(hi - lo + 1);
  const double eosin = rng.uniform(kEosinMin, kEosinMax);

  HedImage hed(S, S);
  for (std::size_t p = 0; p < S * S; ++p) hed.data[3 * p + 1] = eosin;
  for (std::size_t b = 0; b < bumps; ++b) {
    const double cy = rng.uniform(0.0, static_cast<double>(S));
    const double cx = rng.uniform(0.0, static_cast<double>(S));
    const double width = rng.uniform(kBumpMinWidth, kBumpMaxWidth);
    const double amp = rng.uniform(kBumpMinAmplitude, kBumpMaxAmplitude);
    const double inv = 1.0 / (2.0 * width * width);
    for (std::size_t y = 0; y < S; ++y)
      for (std::size_t x = 0; x < S; ++x) {
        const double dy = static_cast<double>(y) - cy;
        const double dx = static_cast<double>(x) - cx;
        hed.at(y, x, 0) += amp * std::exp(-(dx * dx + dy * dy) * inv);
      }
  }

  RgbImage img = hed_to_rgb(hed, spec.stain_matrix);
  for (double& v : img.data) {
    v = spec.contrast_factor * (v - 0.5) + 0.5 + spec.brightness_shift;
    v += spec.noise_sigma * rng.normal();
    v = std::clamp(v, 0.0, 1.0);
  }
  return img;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

int parse_int_field(const std::string& text, ErrorCode code, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw Error(code, what + " is not an integer: '" + text + "'");
  }
  if (used != text.size()) throw Error(code, what + " is not an integer: '" + text + "'");
  return v;
}

}  // namespace

void DomainDataset::validate() const {
  if (images.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
  if (labels.size() != images.size() || domain_ids.size() != images.size())
    throw Error(ErrorCode::BadDimensions, "images, labels and domain ids differ in length");
  for (const auto& img : images)
    if (img.height != images.front().height || img.width != images.front().width ||
        img.data.size() != img.height * img.width * 3)
      throw Error(ErrorCode::BadDimensions, "images differ in dimensions");
  for (int y : labels)
    if (y != 0 && y != 1) throw Error(ErrorCode::BadLabel, "label " + std::to_string(y) + " not in {0,1}");
}

DomainSpec make_domain(int domain_id, double perturb_scale, std::uint64_t seed) {
  if (!(perturb_scale >= 0.0 && perturb_scale <= 0.3))
    throw Error(ErrorCode::InvalidArgument, "perturb_scale must lie in [0, 0.3]");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(domain_id)}));
  const Mat3& base = default_stain_matrix().rows();

  DomainSpec spec;
  spec.domain_id = domain_id;
  spec.seed = seed;
  bool found = false;
  for (int attempt = 0; attempt < kMaxMatrixAttempts && !found; ++attempt) {
    Mat3 raw = base;
    for (auto& row : raw)
      for (double& v : row) v += rng.uniform(-perturb_scale, perturb_scale);
    if (perturb_scale == 0.0) {
      spec.stain_matrix = default_stain_matrix();
      found = true;
      break;
    }
    try {
      spec.stain_matrix = StainMatrix::from_rows(raw);
      found = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix) throw;
    }
  }
  if (!found)
    throw Error(ErrorCode::DegenerateMatrix, "no invertible stain matrix after " +
                                                 std::to_string(kMaxMatrixAttempts) + " attempts");
  spec.brightness_shift = rng.uniform(-0.1, 0.1);
  spec.contrast_factor = rng.uniform(0.8, 1.2);
  spec.noise_sigma = rng.uniform(0.0, 0.05);
  return spec;
}

DomainDataset sample_dataset(const DomainSpec& spec, std::size_t n, std::uint64_t seed, DomainRole role) {
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "sample count must be >= 1");
  DomainDataset ds;
  ds.role = role;
  ds.images.resize(n);
  ds.labels.resize(n);
  ds.domain_ids.assign(n, spec.domain_id);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(spec.domain_id), static_cast<std::uint64_t>(i)}));
    const auto iu = static_cast<std::size_t>(i);
    ds.images[iu] = render_sample(spec, rng, ds.labels[iu]);
  }
  return ds;
}

DomainDataset load_patch_folder(const std::filesystem::path& dir, const std::filesystem::path& labels_csv,
                                DomainRole role) {
  const std::filesystem::path csv_path = labels_csv.empty() ? dir / "labels.csv" : labels_csv;
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open labels file " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "labels file is empty: " + csv_path.string());
  if (trim(line) != "filename,label,domain")
    throw Error(ErrorCode::BadDimensions, "labels header must be 'filename,label,domain' in " + csv_path.string());

  DomainDataset ds;
  ds.role = role;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3)
      throw Error(ErrorCode::BadDimensions, "line " + std::to_string(line_no) + " needs 3 fields");
    const std::string file = trim(fields[0]);
    const int label = parse_int_field(trim(fields[1]), ErrorCode::BadLabel, "label on line " + std::to_string(line_no));
    if (label != 0 && label != 1)
      throw Error(ErrorCode::BadLabel, "label " + std::to_string(label) + " on line " + std::to_string(line_no));
    const int domain =
        parse_int_field(trim(fields[2]), ErrorCode::BadDimensions, "domain on line " + std::to_string(line_no));
    const std::filesystem::path img_path = dir / file;
    if (!std::filesystem::is_regular_file(img_path))
      throw Error(ErrorCode::MissingFile, "missing patch file " + file);
    RgbImage img = read_ppm(img_path);
    if (!ds.images.empty() && (img.height != ds.images.front().height || img.width != ds.images.front().width))
      throw Error(ErrorCode::BadDimensions, "patch " + file + " is " + std::to_string(img.width) + "x" +
                                                std::to_string(img.height) + ", expected " +
                                                std::to_string(ds.images.front().width) + "x" +
                                                std::to_string(ds.images.front().height));
    ds.images.push_back(std::move(img));
    ds.labels.push_back(label);
    ds.domain_ids.push_back(domain);
  }
  if (ds.images.empty()) throw Error(ErrorCode::EmptyDataset, "no rows in " + csv_path.string());
  return ds;
}

void save_patch_folder(const DomainDataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::ofstream csv(dir / "labels.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + (dir / "labels.csv").string());
  csv << "filename,label,domain\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.ppm", i);
    write_ppm(dataset.images[i], dir / name);
    csv << name << ',' << dataset.labels[i] << ',' << dataset.domain_ids[i] << '\n';
  }
  if (!csv) throw Error(ErrorCode::IoError, "failed writing " + (dir / "labels.csv").string());
}

double mean_hematoxylin(const RgbImage& img) {
  const HedImage hed = rgb_to_hed(img);
  double total = 0.0;
  for (std::size_t p = 0; p < hed.pixel_count(); ++p) total += hed.data[3 * p];
  return total / static_cast<double>(hed.pixel_count());
}

}  // namespace wavetrain
