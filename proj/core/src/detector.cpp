// Copyright 2026 The mitocount Authors. All Rights Reserved.
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

#include "mitocount/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mitocount/error.hpp"

namespace mitocount {
namespace {

ProbMask to_prob(const BinaryMask& mask) {
  ProbMask out(mask.width(), mask.height(), 0.0f);
  auto src = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? 1.0f : 0.0f;
  return out;
}

double saturation_stddev(const RgbImage& image) {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : image.pixels()) {
    const int hi = std::max({p.r, p.g, p.b});
    const int lo = std::min({p.r, p.g, p.b});
    const double s = hi == 0 ? 0.0 : static_cast<double>(hi - lo) / hi;
    sum += s;
    sum_sq += s * s;
  }
  const double n = static_cast<double>(image.size());
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

int param_int(const DetectorConfig& config, const std::string& key, int fallback) {
  auto it = config.params.find(key);
  if (it == config.params.end()) return fallback;
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("detector parameter '" + key + "' is not an integer: " + it->second);
  }
}

}  // namespace

const char* to_string(GateLabel label) noexcept { return label == GateLabel::kCount ? "count" : "no-count"; }

GateLabel gate_label_from_string(const std::string& text) {
  if (text == "count") return GateLabel::kCount;
  if (text == "no-count") return GateLabel::kNoCount;
  throw ParseError("unknown gate label '" + text + "'");
}

GateDecision gate_classify(const RgbImage& thumbnail, const GateOptions& options) {
  if (thumbnail.width() != kThumbnailSize || thumbnail.height() != kThumbnailSize) {
    throw std::invalid_argument("gate_classify: thumbnail must be 224x224");
  }
  const GrayImage l = rgb_to_lab_l(thumbnail);
  const auto otsu = otsu_threshold(histogram(l));
  std::size_t tissue = 0;
  for (auto v : l.pixels()) {
    if (v <= otsu.threshold && v < kBackgroundLightness) ++tissue;
  }
  GateDecision d;
  d.score = std::clamp(static_cast<double>(tissue) / static_cast<double>(l.size()), 0.0, 1.0);
  const bool enough_tissue = d.score >= options.min_tissue_fraction;
  const bool stained = saturation_stddev(thumbnail) >= options.min_saturation_stddev;
  d.label = enough_tissue && stained ? GateLabel::kCount : GateLabel::kNoCount;
  return d;
}

GateDecision HeuristicGate::classify(const RgbImage& thumbnail, std::optional<GateLabel>) const {
  return gate_classify(thumbnail, options_);
}

GateDecision PassthroughGate::classify(const RgbImage& thumbnail, std::optional<GateLabel> truth) const {
  GateDecision d = fallback_.classify(thumbnail, std::nullopt);
  if (truth) d.label = *truth;
  return d;
}

void TileBatch::validate() const {
  if (tiles.empty()) throw std::invalid_argument("tile batch is empty");
  if (tiles.size() > kMaxBatchSize) throw std::invalid_argument("tile batch exceeds 16 tiles");
  if (offsets.size() != tiles.size()) throw std::invalid_argument("tile batch needs one offset per tile");
  if (!truth.empty() && truth.size() != tiles.size()) {
    throw std::invalid_argument("tile batch truth masks must match tiles");
  }
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (tiles[i].width() != tiles[0].width() || tiles[i].height() != tiles[0].height()) {
      throw std::invalid_argument("tile batch tiles must share dimensions");
    }
    if (!truth.empty() && (truth[i].width() != tiles[i].width() || truth[i].height() != tiles[i].height())) {
      throw std::invalid_argument("tile batch truth mask size differs from its tile");
    }
  }
}

std::array<std::size_t, 4> TileBatch::shape() const {
  if (tiles.empty()) return {0, 3, 0, 0};
  return {tiles.size(), 3, static_cast<std::size_t>(tiles[0].height()), static_cast<std::size_t>(tiles[0].width())};
}

std::vector<float> TileBatch::to_chw() const {
  validate();
  const auto [n, c, h, w] = shape();
  std::vector<float> out(n * c * h * w);
  const std::size_t plane = h * w;
  for (std::size_t b = 0; b < n; ++b) {
    auto px = tiles[b].pixels();
    float* base = out.data() + b * c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      base[i] = px[i].r / 255.0f;
      base[plane + i] = px[i].g / 255.0f;
      base[2 * plane + i] = px[i].b / 255.0f;
    }
  }
  return out;
}

std::vector<ProbMask> Detector::detect(const TileBatch& batch) const {
  batch.validate();
  invocations_.fetch_add(1);
  tiles_.fetch_add(batch.size());
  auto masks = run(batch);
  if (masks.size() != batch.size()) throw std::logic_error(descriptor().id + ": wrong number of masks");
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].width() != batch.tiles[i].width() || masks[i].height() != batch.tiles[i].height()) {
      throw std::logic_error(descriptor().id + ": mask size differs from tile");
    }
    for (float v : masks[i].pixels()) {
      if (!(v >= 0.0f && v <= 1.0f)) throw std::logic_error(descriptor().id + ": probability outside [0,1]");
    }
  }
  return masks;
}

std::vector<ProbMask> PassthroughDetector::run(const TileBatch& batch) const {
  if (batch.truth.empty()) throw std::runtime_error("passthrough detector needs planted truth masks");
  std::vector<ProbMask> out;
  out.reserve(batch.size());
  for (const auto& t : batch.truth) out.push_back(to_prob(t));
  return out;
}

std::vector<ProbMask> BlobDetector::run(const TileBatch& batch) const {
  std::vector<ProbMask> out;
  out.reserve(batch.size());
  for (const auto& tile : batch.tiles) {
    const GrayImage l = rgb_to_lab_l(tile);
    const auto otsu = otsu_threshold(histogram(l));
    BinaryMask mask(tile.width(), tile.height());
    if (!otsu.degenerate) {
      const int cut = std::min(otsu.threshold, options_.dark_ceiling);
      auto src = l.pixels();
      auto dst = mask.pixels();
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] < cut ? 1 : 0;
      mask = refine_mask(mask, options_.refine);
    }
    out.push_back(to_prob(mask));
  }
  return out;
}

std::vector<ProbMask> NoiseDetector::run(const TileBatch& batch) const {
  const auto base = PassthroughDetector{}.detect(batch);
  std::vector<ProbMask> out;
  out.reserve(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    ProbMask mask = base[t];
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(batch.offsets[t].x), static_cast<std::uint32_t>(batch.offsets[t].y)};
    std::mt19937_64 rng(seq);
    const int span_x = mask.width() - speck_px_;
    const int span_y = mask.height() - speck_px_;
    if (span_x < 0 || span_y < 0) {
      out.push_back(std::move(mask));
      continue;
    }
    std::uniform_int_distribution<int> ux(0, span_x), uy(0, span_y);
    // Keep two background pixels around each speck so it stays a separate
    // component under either connectivity.
    constexpr int kMargin = 2;
    int placed = 0;
    for (int attempt = 0; attempt < 1000 && placed < specks_; ++attempt) {
      const int x0 = ux(rng), y0 = uy(rng);
      bool clear = true;
      for (int y = y0 - kMargin; y < y0 + speck_px_ + kMargin && clear; ++y) {
        for (int x = x0 - kMargin; x < x0 + speck_px_ + kMargin; ++x) {
          if (mask.contains(x, y) && mask(x, y) > 0.0f) {
            clear = false;
            break;
          }
        }
      }
      if (!clear) continue;
      for (int y = y0; y < y0 + speck_px_; ++y) {
        for (int x = x0; x < x0 + speck_px_; ++x) mask(x, y) = 1.0f;
      }
      ++placed;
    }
    out.push_back(std::move(mask));
  }
  return out;
}

EnsembleDetector::EnsembleDetector(std::vector<std::shared_ptr<const Detector>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("ensemble detector needs at least one member");
}

DetectorDescriptor EnsembleDetector::descriptor() const {
  DetectorDescriptor d{"ensemble", true, 0.0};
  for (const auto& m : members_) {
    const auto md = m->descriptor();
    d.concurrent = d.concurrent && md.concurrent;
    d.nominal_ms_per_tile += md.nominal_ms_per_tile;
    d.needs_truth = d.needs_truth || md.needs_truth;
  }
  return d;
}

std::vector<ProbMask> EnsembleDetector::run(const TileBatch& batch) const {
  std::vector<ProbMask> sum;
  for (const auto& member : members_) {
    auto masks = member->detect(batch);
    if (sum.empty()) {
      sum = std::move(masks);
      continue;
    }
    for (std::size_t t = 0; t < sum.size(); ++t) {
      auto acc = sum[t].pixels();
      auto add = masks[t].pixels();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
    }
  }
  const float n = static_cast<float>(members_.size());
  for (auto& m : sum) {
    for (auto& v : m.pixels()) v = std::clamp(v / n, 0.0f, 1.0f);
  }
  return sum;
}

std::shared_ptr<Detector> make_detector(const DetectorConfig& config) {
  if (config.id == "passthrough") return std::make_shared<PassthroughDetector>();
  if (config.id == "blob") {
    BlobDetectorOptions opt;
    opt.dark_ceiling = param_int(config, "dark_ceiling", opt.dark_ceiling);
    opt.refine.close_iterations = param_int(config, "close_iterations", opt.refine.close_iterations);
    return std::make_shared<BlobDetector>(opt);
  }
  if (config.id == "noise") {
    return std::make_shared<NoiseDetector>(static_cast<std::uint64_t>(param_int(config, "seed", 7)),
                                           param_int(config, "specks", 3), param_int(config, "speck_px", 3));
  }
  if (config.id == "ensemble") {
    auto it = config.params.find("members");
    if (it == config.params.end() || it->second.empty()) {
      throw ConfigError("ensemble detector needs 'members' (comma-separated detector ids)");
    }
    std::vector<std::shared_ptr<const Detector>> members;
    std::stringstream ss(it->second);
    std::string id;
    while (std::getline(ss, id, ',')) {
      if (id == "ensemble") throw ConfigError("ensemble members cannot be ensembles");
      DetectorConfig member{id, config.params};
      members.push_back(make_detector(member));
    }
    return std::make_shared<EnsembleDetector>(std::move(members));
  }
  throw ConfigError("unknown detector id '" + config.id + "'");
}

std::vector<ProbMask> detect_tile_batch(const TileBatch& batch, const Detector& detector) {
  return detector.detect(batch);
}

BinaryMask binarize(const ProbMask& mask, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("binarize: threshold must be in (0,1)");
  BinaryMask out(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace mitocount
