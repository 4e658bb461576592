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

#pragma once

/// @file detector.hpp
/// @brief Slide count/no-count gate and per-tile mitotic-figure detectors.
///
/// Real deployments put neural networks behind these interfaces. The
/// implementations here are deterministic stand-ins: a tissue-fraction gate,
/// a passthrough detector that returns planted ground truth, an intensity
/// blob detector, a noise injector for filter tests, and an averaging
/// ensemble combinator.

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mitocount/image.hpp"
#include "mitocount/tissue.hpp"

namespace mitocount {

inline constexpr int kThumbnailSize = 224;
inline constexpr int kDefaultWindowPx = 600;
inline constexpr std::size_t kMaxBatchSize = 16;

enum class GateLabel { kCount, kNoCount };

[[nodiscard]] const char* to_string(GateLabel label) noexcept;
/// "count" / "no-count"; throws ParseError otherwise.
[[nodiscard]] GateLabel gate_label_from_string(const std::string& text);

struct GateDecision {
  GateLabel label = GateLabel::kNoCount;
  double score = 0.0;  // tissue fraction in [0, 1]
};

struct GateOptions {
  double min_tissue_fraction = 0.02;
  /// Standard deviation of HSV saturation over the thumbnail; stain-free
  /// (blank or near-blank) slides sit below this.
  double min_saturation_stddev = 0.02;
};

/// Heuristic gate on a 224x224 thumbnail. Throws std::invalid_argument for
/// other sizes.
[[nodiscard]] GateDecision gate_classify(const RgbImage& thumbnail, const GateOptions& options = {});

class SlideGate {
 public:
  virtual ~SlideGate() = default;
  /// `truth` is the label recorded with a synthetic slide, when known.
  [[nodiscard]] virtual GateDecision classify(const RgbImage& thumbnail,
                                              std::optional<GateLabel> truth) const = 0;
};

class HeuristicGate final : public SlideGate {
 public:
  explicit HeuristicGate(GateOptions options = {}) : options_(options) {}
  GateDecision classify(const RgbImage& thumbnail, std::optional<GateLabel> truth) const override;

 private:
  GateOptions options_;
};

/// Returns the recorded truth; falls back to the heuristic without one.
class PassthroughGate final : public SlideGate {
 public:
  explicit PassthroughGate(GateOptions options = {}) : fallback_(options) {}
  GateDecision classify(const RgbImage& thumbnail, std::optional<GateLabel> truth) const override;

 private:
  HeuristicGate fallback_;
};

using ProbMask = Raster<float>;

/// Up to kMaxBatchSize equally sized RGB tiles with their full-resolution
/// offsets. `truth` is either empty or holds one planted mask per tile.
struct TileBatch {
  std::vector<RgbImage> tiles;
  std::vector<TileOffset> offsets;
  std::vector<BinaryMask> truth;

  [[nodiscard]] std::size_t size() const noexcept { return tiles.size(); }
  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
  /// {batch, channels, height, width}.
  [[nodiscard]] std::array<std::size_t, 4> shape() const;
  /// Planar float tensor in [0, 1] laid out as shape().
  [[nodiscard]] std::vector<float> to_chw() const;
};

struct DetectorDescriptor {
  std::string id;
  /// False when the implementation must run on a single inference worker.
  bool concurrent = true;
  /// Service-time model used by the virtual-time simulator.
  double nominal_ms_per_tile = 1.0;
  /// Consumes TileBatch::truth (planted masks) instead of pixels.
  bool needs_truth = false;
};

/// Tile-in / mask-out with no state carried between tiles. `detect` counts
/// invocations so callers can verify batching and gate short-circuits.
class Detector {
 public:
  virtual ~Detector() = default;

  /// One mask per tile, same size as the tile, values in [0, 1].
  [[nodiscard]] std::vector<ProbMask> detect(const TileBatch& batch) const;
  [[nodiscard]] virtual DetectorDescriptor descriptor() const = 0;

  [[nodiscard]] std::uint64_t invocations() const noexcept { return invocations_.load(); }
  [[nodiscard]] std::uint64_t tiles_processed() const noexcept { return tiles_.load(); }

 protected:
  [[nodiscard]] virtual std::vector<ProbMask> run(const TileBatch& batch) const = 0;

 private:
  mutable std::atomic<std::uint64_t> invocations_{0};
  mutable std::atomic<std::uint64_t> tiles_{0};
};

/// Planted ground truth as a 0/1 probability mask.
class PassthroughDetector final : public Detector {
 public:
  DetectorDescriptor descriptor() const override { return {"passthrough", true, 0.5, true}; }

 protected:
  std::vector<ProbMask> run(const TileBatch& batch) const override;
};

struct BlobDetectorOptions {
  /// Lightness (0..255 scale) above which nothing is a figure, whatever the
  /// tile's Otsu split says. Tissue texture sits well above it.
  int dark_ceiling = 100;
  RefineOptions refine{};
};

/// Dark-stain blobs: lightness below the tile's Otsu threshold (and the dark
/// ceiling), then refine_mask.
class BlobDetector final : public Detector {
 public:
  explicit BlobDetector(BlobDetectorOptions options = {}) : options_(options) {}
  DetectorDescriptor descriptor() const override { return {"blob", true, 12.0}; }

 protected:
  std::vector<ProbMask> run(const TileBatch& batch) const override;

 private:
  BlobDetectorOptions options_;
};

/// Passthrough plus `specks` isolated square false positives per tile,
/// placed deterministically from (seed, tile offset).
class NoiseDetector final : public Detector {
 public:
  NoiseDetector(std::uint64_t seed, int specks, int speck_px = 3)
      : seed_(seed), specks_(specks), speck_px_(speck_px) {}
  DetectorDescriptor descriptor() const override { return {"noise", true, 0.6, true}; }

 protected:
  std::vector<ProbMask> run(const TileBatch& batch) const override;

 private:
  std::uint64_t seed_;
  int specks_;
  int speck_px_;
};

/// Pixel-wise mean of member predictions.
class EnsembleDetector final : public Detector {
 public:
  explicit EnsembleDetector(std::vector<std::shared_ptr<const Detector>> members);
  DetectorDescriptor descriptor() const override;

 protected:
  std::vector<ProbMask> run(const TileBatch& batch) const override;

 private:
  std::vector<std::shared_ptr<const Detector>> members_;
};

/// Detector id plus string parameters, as read from the pipeline config.
struct DetectorConfig {
  std::string id = "blob";
  std::map<std::string, std::string> params;
};

/// ids: passthrough, blob, noise (seed, specks, speck_px), ensemble
/// (members = comma-separated ids). Throws ConfigError for unknown ids.
[[nodiscard]] std::shared_ptr<Detector> make_detector(const DetectorConfig& config);

[[nodiscard]] std::vector<ProbMask> detect_tile_batch(const TileBatch& batch, const Detector& detector);

/// value >= threshold. Throws std::invalid_argument unless 0 < threshold < 1.
[[nodiscard]] BinaryMask binarize(const ProbMask& mask, double threshold = 0.5);

}  // namespace mitocount
