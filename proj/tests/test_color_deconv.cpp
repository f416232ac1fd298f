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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "wavetrain/color_deconv.hpp"
#include "wavetrain/error.hpp"

using namespace wavetrain;
using wavetrain::testing::max_abs_diff;
using wavetrain::testing::random_image;

namespace {

RgbImage pixel(double r, double g, double b) { return RgbImage(1, 1, {r, g, b}); }

// 3x3 Gaussian elimination with partial pivoting, solving A x = b.
Vec3 solve3(Mat3 a, Vec3 b) {
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec3 x{};
  for (std::size_t r = 3; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < 3; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

}  // namespace

TEST_CASE("rgb_to_od: white, decade and oracle pixels") {
  CHECK(rgb_to_od(pixel(1, 1, 1)).data == std::vector<double>{0.0, 0.0, 0.0});
  const auto tenth = rgb_to_od(pixel(0.1, 0.1, 0.1));
  for (double v : tenth.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  // -log10 evaluated at 40 digits.
  const auto od = rgb_to_od(pixel(0.5, 0.25, 0.8));
  CHECK(std::abs(od.data[0] - 0.30102999566398119521) < 1e-15);
  CHECK(std::abs(od.data[1] - 0.60205999132796239043) < 1e-15);
  CHECK(std::abs(od.data[2] - 0.096910013008056414359) < 1e-15);
}

TEST_CASE("rgb_to_od: zero intensity is floored at epsilon") {
  const auto od = rgb_to_od(pixel(0.0, 0.0, 0.0));
  for (double v : od.data) CHECK(v == doctest::Approx(6.0));
}

TEST_CASE("od_to_rgb: zero, unit and oracle densities") {
  CHECK(od_to_rgb(OdImage(1, 1, {0, 0, 0})).data == std::vector<double>{1.0, 1.0, 1.0});
  for (double v : od_to_rgb(OdImage(1, 1, {1, 1, 1})).data) CHECK(v == doctest::Approx(0.1).epsilon(1e-15));
  const auto rgb = od_to_rgb(OdImage(1, 1, {0.3, 1.2, 0.05}));
  CHECK(std::abs(rgb.data[0] - 0.501187233627272285) < 1e-15);
  CHECK(std::abs(rgb.data[1] - 0.063095734448019324943) < 1e-15);
  CHECK(std::abs(rgb.data[2] - 0.89125093813374552995) < 1e-15);
  // Negative density would brighten beyond white: clamped.
  CHECK(od_to_rgb(OdImage(1, 1, {-0.5, 0, 0})).data[0] == 1.0);
}

TEST_CASE("default stain matrix: normalized rows, determinant and inverse") {
  const StainMatrix& m = default_stain_matrix();
  for (const auto& row : m.rows())
    CHECK(std::abs(std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]) - 1.0) < 1e-9);
  CHECK(std::abs(m.rows()[0][0] - 0.65110782575744919054) < 1e-15);
  CHECK(std::abs(m.rows()[2][2] - 0.77759318592095293284) < 1e-15);
  // 40-digit determinant of the normalized matrix.
  CHECK(std::abs(m.determinant() - 0.37782339663053613416) < 1e-14);
  CHECK(std::abs(m.determinant()) > 0.1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += m.inverse()[i][k] * m.rows()[k][j];
      CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("StainMatrix rejects singular and zero rows") {
  CHECK_THROWS_AS(StainMatrix::from_rows({{{1, 0, 0}, {1, 0, 0}, {0, 0, 1}}}), Error);
  try {
    StainMatrix::from_rows({{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
    FAIL("expected SingularMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMatrix);
  }
}

TEST_CASE("rgb_to_hed: white, pure stain basis and linear-solve oracle") {
  const StainMatrix& m = default_stain_matrix();
  for (double v : rgb_to_hed(RgbImage(2, 2, std::vector<double>(12, 1.0))).data) CHECK(v == 0.0);

  for (std::size_t s = 0; s < 3; ++s) {
    const double c = 0.7;
    Vec3 od{};
    for (std::size_t j = 0; j < 3; ++j) od[j] = c * m.rows()[s][j];
    const auto hed = rgb_to_hed(od_to_rgb(OdImage(1, 1, {od[0], od[1], od[2]})));
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(hed.data[j] - (j == s ? c : 0.0)) < 1e-9);
  }

  // mpmath LU solve at 40 digits.
  const auto hed = rgb_to_hed(pixel(0.6, 0.4, 0.7));
  CHECK(std::abs(hed.data[0] - 0.29665842779623165752) < 1e-12);
  CHECK(std::abs(hed.data[1] - 0.15336239798670227826) < 1e-12);
  CHECK(std::abs(hed.data[2] - 0.066654404695335890965) < 1e-12);

  // Gaussian elimination on random pixels.
  const RgbImage img = random_image(4, 4, 11, 0.02, 1.0);
  const HedImage got = rgb_to_hed(img, m);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const Vec3 od = rgb_to_od_pixel({img.data[3 * p], img.data[3 * p + 1], img.data[3 * p + 2]});
    const Vec3 want = solve3(transpose(m.rows()), od);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(got.data[3 * p + c] - want[c]) < 1e-12);
  }
}

TEST_CASE("hed_to_rgb: zero concentrations and composition oracle") {
  for (double v : hed_to_rgb(HedImage(3, 2)).data) CHECK(v == 1.0);
  const auto rgb = hed_to_rgb(HedImage(1, 1, {2.0, 0.0, 0.0}));
  CHECK(std::abs(rgb.data[0] - 0.049863682488692559559) < 1e-14);
  CHECK(std::abs(rgb.data[1] - 0.039592590104089178129) < 1e-14);
  CHECK(std::abs(rgb.data[2] - 0.26242879033139983002) < 1e-14);
}

TEST_CASE("round trip rgb -> hed -> rgb on in-gamut pixels") {
  const RgbImage img = random_image(16, 16, 3, 0.01, 1.0);
  const RgbImage back = hed_to_rgb(rgb_to_hed(img));
  CHECK(max_abs_diff(img.data, back.data) < 1e-6);
}

TEST_CASE("rgb_to_hed is linear in optical density") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 od1{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
    const Vec3 od2{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
    const Vec3 sum{od1[0] + od2[0], od1[1] + od2[1], od1[2] + od2[2]};
    auto hed_of = [](const Vec3& od) { return mul_row(od, default_stain_matrix().inverse()); };
    const Vec3 a = hed_of(od1), b = hed_of(od2), s = hed_of(sum);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(s[c] - (a[c] + b[c])) < 1e-9);
    // Same through the image path.
    const auto via_rgb = rgb_to_hed(od_to_rgb(OdImage(1, 1, {sum[0], sum[1], sum[2]})));
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(via_rgb.data[c] - (a[c] + b[c])) < 1e-9);
  }
}

TEST_CASE("hed_jitter: zero strength is the plain round trip") {
  const RgbImage img = random_image(8, 8, 21);
  Rng rng(1);
  const RgbImage once = hed_jitter(img, 0.0, rng);
  CHECK(max_abs_diff(once.data, hed_to_rgb(rgb_to_hed(img)).data) < 1e-6);
  Rng rng2(2);
  const RgbImage twice = hed_jitter(once, 0.0, rng2);
  CHECK(max_abs_diff(once.data, twice.data) < 1e-9);
}

TEST_CASE("hed_jitter: deterministic per seed, outputs stay in gamut") {
  const RgbImage img = random_image(8, 8, 22);
  Rng a(77), b(77), c(78);
  const RgbImage x = hed_jitter(img, 0.05, a);
  CHECK(x == hed_jitter(img, 0.05, b));
  CHECK(x != hed_jitter(img, 0.05, c));
  for (double strength : {0.05, 0.3, 1.0}) {
    Rng r(9);
    CHECK(is_valid_rgb(hed_jitter(img, strength, r)));
  }
  Rng r(1);
  CHECK_THROWS_AS(hed_jitter(img, -0.1, r), Error);
}

TEST_CASE("hed_jitter: replay oracle on a fixed 2x2 image") {
  const RgbImage img(2, 2, {0.9, 0.5, 0.6, 0.3, 0.2, 0.7, 0.8, 0.8, 0.8, 0.55, 0.35, 0.45});
  const double theta = 0.05;
  const std::uint64_t seed = 12345;

  // Replay the documented draws: three alphas, then three betas.
  Rng replay(seed);
  Vec3 alpha{}, beta{};
  for (double& a : alpha) a = 1.0 - theta + 2.0 * theta * replay.uniform();
  for (double& b : beta) b = -theta + 2.0 * theta * replay.uniform();
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(alpha[i] >= 1.0 - theta);
    CHECK(alpha[i] <= 1.0 + theta);
    CHECK(std::abs(beta[i]) <= theta);
  }

  const Mat3& m = default_stain_matrix().rows();
  std::vector<double> want;
  for (std::size_t p = 0; p < 4; ++p) {
    Vec3 od{};
    for (std::size_t c = 0; c < 3; ++c) od[c] = -std::log10(img.data[3 * p + c]);
    Vec3 hed = solve3(transpose(m), od);
    for (std::size_t c = 0; c < 3; ++c) hed[c] = alpha[c] * hed[c] + beta[c];
    for (std::size_t j = 0; j < 3; ++j) {
      const double d = hed[0] * m[0][j] + hed[1] * m[1][j] + hed[2] * m[2][j];
      want.push_back(std::min(1.0, std::max(0.0, std::pow(10.0, -d))));
    }
  }
  Rng rng(seed);
  const RgbImage got = hed_jitter(img, theta, rng);
  CHECK(max_abs_diff(got.data, want) < 1e-12);
}
