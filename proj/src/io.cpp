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

#include "wavetrain/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "wavetrain/error.hpp"

namespace wavetrain {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_parent(const fs::path& path) {
  if (!path.has_parent_path()) return;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + path.parent_path().string());
}

// Whitespace and '#' comments between header tokens.
void skip_header_space(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

std::size_t header_number(const std::string& bytes, std::size_t& pos, const fs::path& path) {
  skip_header_space(bytes, pos);
  const std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw Error(ErrorCode::UnsupportedFormat, "malformed PPM header in " + path.string());
  return static_cast<std::size_t>(std::stoull(bytes.substr(start, pos - start)));
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_ppm(const RgbImage& img, const fs::path& path) {
  if (img.data.size() != img.height * img.width * 3)
    throw Error(ErrorCode::BadDimensions, "image data length mismatch");
  std::string bytes = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  bytes.reserve(bytes.size() + img.data.size());
  for (double v : img.data) {
    const double q = std::clamp(std::round(v * 255.0), 0.0, 255.0);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  write_text_file(path, bytes);
}

RgbImage read_ppm(const fs::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw Error(ErrorCode::UnsupportedFormat, "not a binary P6 PPM: " + path.string());
  std::size_t pos = 2;
  const std::size_t width = header_number(bytes, pos, path);
  const std::size_t height = header_number(bytes, pos, path);
  const std::size_t maxval = header_number(bytes, pos, path);
  if (maxval != 255) throw Error(ErrorCode::UnsupportedFormat, "PPM maxval must be 255 in " + path.string());
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw Error(ErrorCode::UnsupportedFormat, "malformed PPM header in " + path.string());
  ++pos;
  const std::size_t expected = width * height * 3;
  if (bytes.size() - pos < expected)
    throw Error(ErrorCode::IoError, "truncated PPM pixel data in " + path.string());
  RgbImage img(height, width);
  for (std::size_t i = 0; i < expected; ++i)
    img.data[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos + i])) / 255.0;
  return img;
}

std::string layout_hash(const Architecture& arch) {
  std::string desc = "wavetrain-mlp/v1;dtype=f64;order=W(fan_in x fan_out,row-major),b;layers=";
  for (const LayerSlice& s : layer_layout(arch)) desc += std::to_string(s.fan_in) + "x" + std::to_string(s.fan_out) + ",";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : desc) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_checkpoint(const WeightVector& w, const fs::path& dir, std::uint64_t created_from_seed) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create checkpoint directory " + dir.string());

  json manifest = {
      {"format_version", kCheckpointFormatVersion},
      {"arch", {{"input_dim", w.arch.input_dim}, {"hidden", w.arch.hidden}, {"num_classes", w.arch.num_classes}}},
      {"dtype", "f64"},
      {"created_from_seed", created_from_seed},
      {"parameter_count", w.values.size()},
      {"layout_hash", layout_hash(w.arch)},
      {"layout", "per layer: weights fan_in x fan_out row-major, then fan_out biases; little-endian"},
  };
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::string bytes(w.values.size() * 8, '\0');
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(w.values[i]);
    for (std::size_t b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  write_text_file(dir / "weights.bin", bytes);
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::IoError, "missing checkpoint manifest " + path.string());
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "malformed manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    m.dtype = j.at("dtype").get<std::string>();
    m.arch.input_dim = j.at("arch").at("input_dim").get<std::size_t>();
    m.arch.hidden = j.at("arch").at("hidden").get<std::vector<std::size_t>>();
    m.arch.num_classes = j.at("arch").at("num_classes").get<std::size_t>();
    m.created_from_seed = j.value("created_from_seed", std::uint64_t{0});
    m.layout_hash = j.at("layout_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "manifest " + path.string() + " is missing fields: " + e.what());
  }
  if (m.format_version != kCheckpointFormatVersion)
    throw Error(ErrorCode::UnsupportedFormat, "checkpoint format_version " + std::to_string(m.format_version));
  if (m.dtype != "f64") throw Error(ErrorCode::UnsupportedFormat, "checkpoint dtype " + m.dtype);
  m.arch.validate();
  if (m.layout_hash != layout_hash(m.arch))
    throw Error(ErrorCode::LayoutMismatch, "manifest layout_hash does not match its architecture in " + path.string());
  if (j.contains("parameter_count") && j["parameter_count"].get<std::size_t>() != m.arch.parameter_count())
    throw Error(ErrorCode::LayoutMismatch, "manifest parameter_count does not match its architecture");
  return m;
}

WeightVector read_checkpoint(const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  const fs::path bin = dir / "weights.bin";
  if (!fs::is_regular_file(bin)) throw Error(ErrorCode::IoError, "missing " + bin.string());
  const std::string bytes = read_text_file(bin);
  const std::size_t count = m.arch.parameter_count();
  if (bytes.size() != count * 8)
    throw Error(ErrorCode::LengthMismatch, bin.string() + " has " + std::to_string(bytes.size()) +
                                               " bytes, expected " + std::to_string(count * 8));
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return WeightVector(m.arch, std::move(values));
}

std::string format_metrics_row(const MetricsRecord& r) {
  char buf[256];
  const std::string domain = r.domain_id ? std::to_string(*r.domain_id) : std::string("pooled");
  std::snprintf(buf, sizeof(buf), "%zu,%s,%s,%.6f,%.6f", r.iteration, r.split.c_str(), domain.c_str(), r.loss,
                r.accuracy);
  return buf;
}

void append_metrics(std::span<const MetricsRecord> records, const fs::path& path) {
  ensure_parent(path);
  std::error_code ec;
  const bool needs_header = !fs::exists(path) || fs::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path.string());
  if (needs_header) out << kMetricsHeader << '\n';
  for (const auto& r : records) out << format_metrics_row(r) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_metrics(std::span<const MetricsRecord> records, const fs::path& path) {
  std::string text = std::string(kMetricsHeader) + "\n";
  for (const auto& r : records) text += format_metrics_row(r) + "\n";
  write_text_file(path, text);
}

}  // namespace wavetrain
