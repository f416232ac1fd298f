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

#include "wavetrain/color_deconv.hpp"

#include <algorithm>
#include <cmath>

namespace wavetrain {

double determinant(const Mat3& m) noexcept {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 inverse(const Mat3& m) {
  const double det = determinant(m);
  if (!(std::abs(det) > kMinStainDeterminant))
    throw Error(ErrorCode::SingularMatrix, "stain matrix determinant " + std::to_string(det));
  const double s = 1.0 / det;
  Mat3 inv;
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * s;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * s;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * s;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * s;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * s;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * s;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * s;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * s;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * s;
  return inv;
}

Vec3 mul_row(const Vec3& v, const Mat3& m) noexcept {
  Vec3 out{};
  for (std::size_t j = 0; j < 3; ++j) out[j] = v[0] * m[0][j] + v[1] * m[1][j] + v[2] * m[2][j];
  return out;
}

StainMatrix StainMatrix::from_rows(const Mat3& raw) {
  Mat3 rows = raw;
  for (auto& row : rows) {
    const double norm = std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw Error(ErrorCode::SingularMatrix, "stain vector has zero or non-finite norm");
    for (double& v : row) v /= norm;
  }
  return StainMatrix(rows, wavetrain::inverse(rows));
}

double StainMatrix::determinant() const noexcept { return wavetrain::determinant(rows_); }

const StainMatrix& default_stain_matrix() {
  static const StainMatrix m = StainMatrix::from_rows({{
      {0.65, 0.70, 0.29},
      {0.07, 0.99, 0.11},
      {0.27, 0.57, 0.78},
  }});
  return m;
}

bool is_valid_rgb(const RgbImage& img) noexcept {
  if (img.data.size() != img.height * img.width * 3) return false;
  return std::all_of(img.data.begin(), img.data.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

Vec3 rgb_to_od_pixel(const Vec3& rgb) noexcept {
  return {-std::log10(std::max(rgb[0], kOdEpsilon)), -std::log10(std::max(rgb[1], kOdEpsilon)),
          -std::log10(std::max(rgb[2], kOdEpsilon))};
}

Vec3 od_to_rgb_pixel(const Vec3& od) noexcept {
  Vec3 out;
  for (std::size_t c = 0; c < 3; ++c) out[c] = std::clamp(std::pow(10.0, -od[c]), 0.0, 1.0);
  return out;
}

Vec3 rgb_to_hed_pixel(const Vec3& rgb, const StainMatrix& m) noexcept {
  return mul_row(rgb_to_od_pixel(rgb), m.inverse());
}

Vec3 hed_to_rgb_pixel(const Vec3& hed, const StainMatrix& m) noexcept {
  return od_to_rgb_pixel(mul_row(hed, m.rows()));
}

namespace {

template <class Out, class In, class Fn>
Out map_pixels(const In& in, Fn&& fn) {
  Out out(in.height, in.width);
  const std::size_t n = in.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3 v{in.data[3 * p], in.data[3 * p + 1], in.data[3 * p + 2]};
    const Vec3 r = fn(v);
    out.data[3 * p] = r[0];
    out.data[3 * p + 1] = r[1];
    out.data[3 * p + 2] = r[2];
  }
  return out;
}

}  // namespace

OdImage rgb_to_od(const RgbImage& img) {
  return map_pixels<OdImage>(img, [](const Vec3& v) { return rgb_to_od_pixel(v); });
}

RgbImage od_to_rgb(const OdImage& od) {
  return map_pixels<RgbImage>(od, [](const Vec3& v) { return od_to_rgb_pixel(v); });
}

HedImage rgb_to_hed(const RgbImage& img, const StainMatrix& m) {
  return map_pixels<HedImage>(img, [&](const Vec3& v) { return rgb_to_hed_pixel(v, m); });
}

RgbImage hed_to_rgb(const HedImage& hed, const StainMatrix& m) {
  return map_pixels<RgbImage>(hed, [&](const Vec3& v) { return hed_to_rgb_pixel(v, m); });
}

JitterParams sample_jitter(double strength, Rng& rng) {
  JitterParams p;
  for (double& a : p.alpha) a = rng.uniform(1.0 - strength, 1.0 + strength);
  for (double& b : p.beta) b = rng.uniform(-strength, strength);
  return p;
}

RgbImage apply_stain_jitter(const RgbImage& img, const JitterParams& params, const StainMatrix& m) {
  return map_pixels<RgbImage>(img, [&](const Vec3& v) {
    Vec3 hed = rgb_to_hed_pixel(v, m);
    for (std::size_t c = 0; c < 3; ++c) hed[c] = params.alpha[c] * hed[c] + params.beta[c];
    return hed_to_rgb_pixel(hed, m);
  });
}

RgbImage hed_jitter(const RgbImage& img, double strength, Rng& rng, const StainMatrix& m) {
  if (!(strength >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter strength must be >= 0");
  return apply_stain_jitter(img, sample_jitter(strength, rng), m);
}

}  // namespace wavetrain
