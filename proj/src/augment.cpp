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

#include "wavetrain/augment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

#include "wavetrain/color_deconv.hpp"
#include "wavetrain/error.hpp"

namespace wavetrain {

namespace {

// Pool sampled by randpick, and the magnitude each op receives at m = 10.
constexpr std::array<std::string_view, 5> kRandPickPool = {"flip", "rot90", "affine", "blur", "colorjitter"};
constexpr double kPickMaxDegrees = 30.0;
constexpr double kPickMaxShift = 4.0;
constexpr double kPickMaxScale = 0.2;
constexpr double kPickMaxSigma = 1.5;
constexpr double kPickMaxBrightness = 0.3;
constexpr double kPickMaxContrast = 0.5;

const OpInfo* find_op(std::string_view name) {
  for (const auto& op : registered_ops())
    if (op.name == name) return &op;
  return nullptr;
}

AugOp make_op(std::string_view name, std::initializer_list<AugParam> params) {
  AugOp op{std::string(name), params};
  return op;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  AugSpec parse() {
    AugSpec spec;
    skip_ws();
    if (at_end()) return spec;
    for (;;) {
      spec.ops.push_back(parse_op());
      skip_ws();
      if (at_end()) break;
      if (text_[pos_] != ';') fail("expected ';'");
      ++pos_;
    }
    spec.name = to_string(spec);
    return spec;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string token_at(std::size_t p) const {
    if (p >= text_.size()) return "<end>";
    std::size_t e = p;
    while (e < text_.size() && e - p < 16 && text_[e] != ';' && text_[e] != ',' && text_[e] != ')') ++e;
    if (e == p) ++e;
    return std::string(text_.substr(p, e - p));
  }

  [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::ParseError) {
    fail_at(pos_, what, code);
  }
  [[noreturn]] void fail_at(std::size_t p, const std::string& what, ErrorCode code = ErrorCode::ParseError) {
    throw ParseError(code, p, token_at(p), what);
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string_view identifier() {
    const std::size_t start = pos_;
    if (at_end() || !ident_start(text_[pos_])) return {};
    while (!at_end() && ident_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                         text_[pos_] == '-' || text_[pos_] == '+' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      ++pos_;
    if (start == pos_) fail("expected a number");
    std::string_view digits = text_.substr(start, pos_ - start);
    if (digits.front() == '+') digits.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(value))
      fail_at(start, "malformed number");
    return value;
  }

  AugOp parse_op() {
    skip_ws();
    const std::size_t name_pos = pos_;
    const std::string_view name = identifier();
    if (name.empty()) fail("expected an op name");
    const OpInfo* info = find_op(name);
    if (info == nullptr) fail_at(name_pos, "unknown augmentation op", ErrorCode::UnknownOp);

    std::vector<std::optional<double>> values(info->params.size());
    skip_ws();
    if (!at_end() && text_[pos_] == '(') {
      ++pos_;
      std::size_t arg_index = 0;
      for (;;) {
        skip_ws();
        const std::size_t arg_pos = pos_;
        std::size_t slot = 0;
        if (!at_end() && ident_start(text_[pos_])) {
          const std::string_view key = identifier();
          auto it = std::find_if(info->params.begin(), info->params.end(),
                                 [&](const ParamInfo& p) { return p.key == key; });
          if (it == info->params.end()) fail_at(arg_pos, "unknown parameter for " + info->name);
          slot = static_cast<std::size_t>(it - info->params.begin());
          skip_ws();
          if (at_end() || text_[pos_] != '=') fail("expected '='");
          ++pos_;
        } else {
          if (arg_index != 0 || info->params.empty()) fail_at(arg_pos, "positional value must come first");
          slot = 0;
        }
        if (values[slot].has_value()) fail_at(arg_pos, "duplicate parameter");
        const std::size_t value_pos = pos_;
        const double v = number();
        const ParamInfo& p = info->params[slot];
        if (v < p.min_value || v > p.max_value) fail_at(value_pos, "parameter " + p.key + " out of range");
        if (p.integral && v != std::floor(v)) fail_at(value_pos, "parameter " + p.key + " must be an integer");
        values[slot] = v;
        ++arg_index;
        skip_ws();
        if (at_end()) fail("expected ')'");
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        if (text_[pos_] != ',') fail("expected ',' or ')'");
        ++pos_;
      }
    }

    AugOp op{info->name, {}};
    for (std::size_t i = 0; i < info->params.size(); ++i)
      op.params.push_back({info->params[i].key, values[i].value_or(info->params[i].default_value)});
    return op;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double sample(const RgbImage& img, double sy, double sx, std::size_t c) {
  const double maxy = static_cast<double>(img.height - 1);
  const double maxx = static_cast<double>(img.width - 1);
  sy = std::clamp(sy, 0.0, maxy);
  sx = std::clamp(sx, 0.0, maxx);
  const auto y0 = static_cast<std::size_t>(std::floor(sy));
  const auto x0 = static_cast<std::size_t>(std::floor(sx));
  const std::size_t y1 = std::min(y0 + 1, img.height - 1);
  const std::size_t x1 = std::min(x0 + 1, img.width - 1);
  const double fy = sy - static_cast<double>(y0);
  const double fx = sx - static_cast<double>(x0);
  const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
  const double bottom = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

RgbImage apply_op(const AugOp& op, const RgbImage& img, Rng& rng);

RgbImage apply_randpick(const AugOp& op, const RgbImage& img, Rng& rng) {
  const auto k = static_cast<std::size_t>(op.param("k"));
  const double mag = op.param("m") / 10.0;
  std::array<std::size_t, kRandPickPool.size()> order{0, 1, 2, 3, 4};
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  RgbImage out = img;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string_view name = kRandPickPool[order[i]];
    AugOp sub;
    if (name == "flip") {
      sub = make_op(name, {});
    } else if (name == "rot90") {
      sub = make_op(name, {{"k", -1.0}});
    } else if (name == "affine") {
      sub = make_op(name, {{"deg", kPickMaxDegrees * mag},
                           {"tx", kPickMaxShift * mag},
                           {"ty", kPickMaxShift * mag},
                           {"scale", kPickMaxScale * mag}});
    } else if (name == "blur") {
      sub = make_op(name, {{"sigma", kPickMaxSigma * mag}});
    } else {
      sub = make_op(name, {{"b", kPickMaxBrightness * mag}, {"c", kPickMaxContrast * mag}});
    }
    out = apply_op(sub, out, rng);
  }
  return out;
}

RgbImage apply_op(const AugOp& op, const RgbImage& img, Rng& rng) {
  const std::string& n = op.name;
  if (n == "identity") return img;
  if (n == "flip") {
    const bool h = rng.bernoulli(0.5);
    const bool v = rng.bernoulli(0.5);
    return flip(img, h, v);
  }
  if (n == "rot90") {
    int k = static_cast<int>(op.param("k"));
    if (k < 0) k = static_cast<int>(rng.uniform_index(4));
    return rot90(img, k);
  }
  if (n == "affine") {
    const double deg = op.param("deg");
    const double tx_max = op.param("tx");
    const double ty_max = op.param("ty");
    const double s = op.param("scale");
    const double angle = rng.uniform(-deg, deg);
    const double tx = rng.uniform(-tx_max, tx_max);
    const double ty = rng.uniform(-ty_max, ty_max);
    const double scale = rng.uniform(1.0 - s, 1.0 + s);
    return affine_warp(img, angle, tx, ty, scale);
  }
  if (n == "blur") return gaussian_blur(img, rng.uniform(0.0, op.param("sigma")));
  if (n == "colorjitter") {
    const double b = op.param("b");
    const double c = op.param("c");
    const double offset = rng.uniform(-b, b);
    const double factor = rng.uniform(1.0 - c, 1.0 + c);
    return color_jitter(img, offset, factor);
  }
  if (n == "hed") return hed_jitter(img, op.param("theta"), rng);
  if (n == "randpick") return apply_randpick(op, img, rng);
  throw Error(ErrorCode::UnknownOp, "unregistered op " + n);
}

}  // namespace

double AugOp::param(std::string_view key) const {
  for (const auto& p : params)
    if (p.key == key) return p.value;
  throw Error(ErrorCode::InvalidArgument, "op " + name + " has no parameter " + std::string(key));
}

const std::vector<OpInfo>& registered_ops() {
  static const std::vector<OpInfo> ops = {
      {"identity", {}, "no-op"},
      {"flip", {}, "random horizontal and vertical flips"},
      {"rot90", {{"k", -1, -1, 3, true}}, "quarter-turn rotation, k=-1 draws k uniformly"},
      {"affine",
       {{"deg", 10, 0, 180, false}, {"tx", 2, 0, 16, false}, {"ty", 2, 0, 16, false}, {"scale", 0.1, 0, 0.5, false}},
       "random rotation, translation and scale; bilinear, clamp-to-edge"},
      {"blur", {{"sigma", 1.0, 0, 5, false}}, "Gaussian blur with sigma ~ U(0, sigma)"},
      {"colorjitter", {{"b", 0.1, 0, 1, false}, {"c", 0.1, 0, 1, false}}, "brightness offset and contrast factor"},
      {"hed", {{"theta", 0.05, 0, 1, false}}, "HEDJitter stain augmentation"},
      {"randpick", {{"k", 2, 1, 5, true}, {"m", 5, 0, 10, false}}, "k distinct random ops at magnitude m"},
  };
  return ops;
}

AugSpec parse_aug_spec(std::string_view text) { return SpecParser(text).parse(); }

std::string to_string(const AugSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.ops.size(); ++i) {
    if (i > 0) out += ';';
    const AugOp& op = spec.ops[i];
    out += op.name;
    if (op.params.empty()) continue;
    out += '(';
    for (std::size_t j = 0; j < op.params.size(); ++j) {
      if (j > 0) out += ',';
      out += op.params[j].key + "=" + format_number(op.params[j].value);
    }
    out += ')';
  }
  return out;
}

RgbImage apply(const AugSpec& spec, const RgbImage& img, Rng& rng) {
  RgbImage out = img;
  for (const AugOp& op : spec.ops) out = apply_op(op, out, rng);
  return out;
}

RgbImage flip(const RgbImage& img, bool horizontal, bool vertical) {
  RgbImage out(img.height, img.width);
  for (std::size_t y = 0; y < img.height; ++y) {
    const std::size_t sy = vertical ? img.height - 1 - y : y;
    for (std::size_t x = 0; x < img.width; ++x) {
      const std::size_t sx = horizontal ? img.width - 1 - x : x;
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

RgbImage rot90(const RgbImage& img, int k) {
  k = ((k % 4) + 4) % 4;
  RgbImage out = img;
  for (int i = 0; i < k; ++i) {
    RgbImage next(out.width, out.height);
    for (std::size_t y = 0; y < next.height; ++y)
      for (std::size_t x = 0; x < next.width; ++x)
        for (std::size_t c = 0; c < 3; ++c) next.at(y, x, c) = out.at(x, out.width - 1 - y, c);
    out = std::move(next);
  }
  return out;
}

RgbImage affine_warp(const RgbImage& img, double angle_deg, double tx, double ty, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "affine scale must be positive");
  RgbImage out(img.height, img.width);
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double dx = static_cast<double>(x) - cx - tx;
      const double dy = static_cast<double>(y) - cy - ty;
      const double sx = (cs * dx + sn * dy) / scale + cx;
      const double sy = (-sn * dx + cs * dy) / scale + cy;
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = sample(img, sy, sx, c);
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : taps) v /= total;
  return taps;
}

RgbImage gaussian_blur(const RgbImage& img, double sigma) {
  const std::vector<double> taps = gaussian_kernel(sigma);
  if (taps.size() == 1) return img;
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto h = static_cast<std::ptrdiff_t>(img.height);
  const auto w = static_cast<std::ptrdiff_t>(img.width);
  RgbImage tmp(img.height, img.width);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
          const auto sx = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x + i, 0, w - 1));
          acc += taps[static_cast<std::size_t>(i + radius)] * img.at(static_cast<std::size_t>(y), sx, c);
        }
        tmp.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = acc;
      }
  RgbImage out(img.height, img.width);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
          const auto sy = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y + i, 0, h - 1));
          acc += taps[static_cast<std::size_t>(i + radius)] * tmp.at(sy, static_cast<std::size_t>(x), c);
        }
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = std::clamp(acc, 0.0, 1.0);
      }
  return out;
}

RgbImage color_jitter(const RgbImage& img, double offset, double factor) {
  RgbImage out(img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = std::clamp(factor * (img.data[i] - 0.5) + 0.5 + offset, 0.0, 1.0);
  return out;
}

}  // namespace wavetrain
