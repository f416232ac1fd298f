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
#include <set>

#include "test_support.hpp"
#include "wavetrain/augment.hpp"
#include "wavetrain/color_deconv.hpp"
#include "wavetrain/error.hpp"

using namespace wavetrain;
using wavetrain::testing::max_abs_diff;
using wavetrain::testing::random_image;

namespace {

AugSpec random_spec(Rng& rng) {
  AugSpec spec;
  const auto& ops = registered_ops();
  const std::size_t len = rng.uniform_index(4);
  for (std::size_t i = 0; i < len; ++i) {
    const OpInfo& info = ops[rng.uniform_index(ops.size())];
    AugOp op{info.name, {}};
    for (const auto& p : info.params) {
      double v = rng.uniform(p.min_value, p.max_value);
      if (p.integral) v = std::round(v);
      op.params.push_back({p.key, v});
    }
    spec.ops.push_back(op);
  }
  return spec;
}

}  // namespace

TEST_CASE("parse: empty text is the identity pipeline") {
  CHECK(parse_aug_spec("").is_identity());
  CHECK(parse_aug_spec("   ").is_identity());
  CHECK(to_string(parse_aug_spec("")).empty());
}

TEST_CASE("parse: positional HEDJitter strength") {
  const AugSpec s = parse_aug_spec("hed(0.05)");
  REQUIRE(s.ops.size() == 1);
  CHECK(s.ops[0].name == "hed");
  CHECK(s.ops[0].param("theta") == 0.05);
  CHECK(parse_aug_spec("hed") == s);  // default strength
}

TEST_CASE("parse: keyed arguments, defaults and whitespace") {
  const AugSpec s = parse_aug_spec(" flip ; affine( deg = 10 , tx=2 );hed(0.05)");
  REQUIRE(s.ops.size() == 3);
  CHECK(s.ops[1].param("deg") == 10.0);
  CHECK(s.ops[1].param("tx") == 2.0);
  CHECK(s.ops[1].param("ty") == 2.0);
  CHECK(s.ops[1].param("scale") == 0.1);
  CHECK(to_string(s) == "flip;affine(deg=10,tx=2,ty=2,scale=0.1);hed(theta=0.05)");
}

TEST_CASE("parse: randpick round trips through print") {
  const AugSpec s = parse_aug_spec("randpick(k=2,m=5)");
  CHECK(s.ops[0].param("k") == 2.0);
  CHECK(s.ops[0].param("m") == 5.0);
  CHECK(parse_aug_spec(to_string(s)) == s);
}

TEST_CASE("parse(print(spec)) == spec for random registered specs") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const AugSpec s = random_spec(rng);
    const std::string text = to_string(s);
    CHECK_MESSAGE(parse_aug_spec(text) == s, text);
  }
}

TEST_CASE("parse: errors carry position and token") {
  auto code_of = [](const std::string& text) {
    try {
      parse_aug_spec(text);
    } catch (const ParseError& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("zoom(2)") == ErrorCode::UnknownOp);
  CHECK(code_of("flip;;hed") == ErrorCode::ParseError);
  CHECK(code_of("hed(0.05") == ErrorCode::ParseError);
  CHECK(code_of("hed(theta=)") == ErrorCode::ParseError);
  CHECK(code_of("hed(theta=2)") == ErrorCode::ParseError);  // out of range
  CHECK(code_of("randpick(k=1.5)") == ErrorCode::ParseError);
  CHECK(code_of("affine(foo=1)") == ErrorCode::ParseError);
  CHECK(code_of("hed(theta=0.1,theta=0.2)") == ErrorCode::ParseError);
  CHECK(code_of("flip hed") == ErrorCode::ParseError);
  try {
    parse_aug_spec("flip;blur(sigma=x)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 16);
    CHECK(e.token() == "x");
  }
  try {
    parse_aug_spec("flip; warp");
    FAIL("expected UnknownOp");
  } catch (const ParseError& e) {
    CHECK(e.code() == ErrorCode::UnknownOp);
    CHECK(e.position() == 6);
    CHECK(e.token() == "warp");
  }
}

TEST_CASE("apply: identity is bit-identical") {
  const RgbImage img = random_image(9, 7, 3);
  Rng rng(1);
  CHECK(apply(AugSpec{}, img, rng) == img);
  CHECK(apply(parse_aug_spec("identity"), img, rng) == img);
}

TEST_CASE("rot90: half turn equals double flip, four quarter turns are identity") {
  const RgbImage img = random_image(6, 6, 4);
  CHECK(rot90(img, 2) == flip(img, true, true));
  Rng rng(0);
  const AugSpec quarter = parse_aug_spec("rot90(k=1)");
  RgbImage x = img;
  for (int i = 0; i < 4; ++i) x = apply(quarter, x, rng);
  CHECK(x == img);
  const RgbImage tall = random_image(3, 5, 6);
  CHECK(rot90(tall, 1).height == 5);
  CHECK(rot90(rot90(tall, 1), 3) == tall);

  // Find a seed whose single draw gives k = 2 and check the random path.
  std::uint64_t seed = 0;
  for (;; ++seed) {
    Rng probe(seed);
    if (probe.uniform_index(4) == 2) break;
  }
  Rng rng2(seed);
  CHECK(apply(parse_aug_spec("rot90"), img, rng2) == flip(img, true, true));
}

TEST_CASE("blur: impulse response matches direct 2-D convolution") {
  const std::size_t S = 15, c0 = 7;
  RgbImage impulse(S, S);
  for (std::size_t c = 0; c < 3; ++c) impulse.at(c0, c0, c) = 1.0;

  const std::uint64_t seed = 31;
  Rng replay(seed);
  const double sigma = 1.0 * replay.uniform();  // blur(sigma=1.0) draws U(0, 1)
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));

  // Unnormalized 2-D Gaussian over the (2r+1)^2 support, normalized as a whole.
  double total = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) total += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));

  Rng rng(seed);
  const RgbImage out = apply(parse_aug_spec("blur(sigma=1.0)"), impulse, rng);
  for (std::size_t y = 0; y < S; ++y)
    for (std::size_t x = 0; x < S; ++x) {
      const int dy = static_cast<int>(y) - static_cast<int>(c0);
      const int dx = static_cast<int>(x) - static_cast<int>(c0);
      double want = 0.0;
      if (std::abs(dy) <= radius && std::abs(dx) <= radius)
        want = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) / total;
      for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(out.at(y, x, c) - want) < 1e-15);
    }
}

TEST_CASE("gaussian_kernel: sigma 1 taps from a 40-digit oracle") {
  const auto taps = gaussian_kernel(1.0);
  REQUIRE(taps.size() == 7);
  const double want[7] = {0.0044330481752437457079, 0.054005582622414485255, 0.24203622937611432329,
                          0.3990502796524548915,    0.24203622937611432329,  0.054005582622414485255,
                          0.0044330481752437457079};
  for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(taps[i] - want[i]) < 1e-15);
  CHECK(gaussian_kernel(0.0).size() == 1);
}

TEST_CASE("affine: neutral parameters reproduce the input, clamp keeps gamut") {
  const RgbImage img = random_image(10, 12, 8);
  CHECK(max_abs_diff(affine_warp(img, 0.0, 0.0, 0.0, 1.0).data, img.data) < 1e-15);
  // Integer translation on a constant-row image shifts with edge clamping.
  RgbImage ramp(1, 5);
  for (std::size_t x = 0; x < 5; ++x)
    for (std::size_t c = 0; c < 3; ++c) ramp.at(0, x, c) = 0.1 * static_cast<double>(x);
  const RgbImage shifted = affine_warp(ramp, 0.0, 1.0, 0.0, 1.0);
  CHECK(shifted.at(0, 0, 0) == doctest::Approx(0.0));
  CHECK(shifted.at(0, 1, 0) == doctest::Approx(0.0));
  CHECK(shifted.at(0, 4, 0) == doctest::Approx(0.3));
  // Half-pixel shift interpolates bilinearly.
  CHECK(affine_warp(ramp, 0.0, 0.5, 0.0, 1.0).at(0, 2, 1) == doctest::Approx(0.15));
}

TEST_CASE("colorjitter: affine intensity map with clamp") {
  const RgbImage img(1, 1, {0.2, 0.5, 0.9});
  const RgbImage out = color_jitter(img, 0.1, 1.5);
  CHECK(out.data[0] == doctest::Approx(0.15));
  CHECK(out.data[1] == doctest::Approx(0.6));
  CHECK(out.data[2] == 1.0);
}

TEST_CASE("every registered op keeps images valid and deterministic") {
  const RgbImage img = random_image(16, 16, 12);
  for (const std::string text :
       {"flip", "rot90", "affine(deg=45,tx=5,ty=5,scale=0.3)", "blur(sigma=2)", "colorjitter(b=0.5,c=0.9)",
        "hed(0.5)", "randpick(k=5,m=10)", "flip;rot90;hed(0.05);randpick(k=2,m=5)"}) {
    const AugSpec spec = parse_aug_spec(text);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng a(seed), b(seed);
      const RgbImage x = apply(spec, img, a);
      CHECK_MESSAGE(is_valid_rgb(x), text);
      CHECK(x.height == img.height);
      CHECK(x.width == img.width);
      CHECK(x == apply(spec, img, b));
    }
  }
}

TEST_CASE("randpick: distinct seeds give distinct outputs") {
  const RgbImage img = random_image(16, 16, 13);
  const AugSpec spec = parse_aug_spec("randpick(k=2,m=5)");
  std::set<std::vector<double>> outputs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    outputs.insert(apply(spec, img, rng).data);
  }
  CHECK(outputs.size() >= 9);
}

TEST_CASE("hed op delegates to hed_jitter with the same stream") {
  const RgbImage img = random_image(5, 5, 14);
  Rng a(3), b(3);
  CHECK(apply(parse_aug_spec("hed(0.05)"), img, a) == hed_jitter(img, 0.05, b));
}
