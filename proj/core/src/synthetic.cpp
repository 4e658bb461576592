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

#include "mitocount/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mitocount/error.hpp"
#include "mitocount/png_io.hpp"

namespace mitocount {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kMaxPlacementAttempts = 20000;
/// Full-resolution px of tissue kept around every planted object, so that the
/// low-resolution tissue mask reliably selects the tiles it touches.
constexpr double kTissueMarginPx = 320.0;

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t pixel_hash(std::uint64_t seed, int x, int y) {
  return splitmix(seed ^ splitmix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32 |
                                  static_cast<std::uint32_t>(y)));
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Ellipse {
  double cx, cy, c, s, inv_a2, inv_b2, reach;

  Ellipse(Point2 center, double a, double b, double angle_deg)
      : cx(center.x), cy(center.y), inv_a2(1.0 / (a * a)), inv_b2(1.0 / (b * b)), reach(std::max(a, b)) {
    const double t = angle_deg * std::numbers::pi / 180.0;
    c = std::cos(t);
    s = std::sin(t);
  }

  [[nodiscard]] bool contains(double x, double y) const noexcept {
    const double dx = x - cx, dy = y - cy;
    const double u = dx * c + dy * s;
    const double v = -dx * s + dy * c;
    return u * u * inv_a2 + v * v * inv_b2 <= 1.0;
  }
};

Ellipse figure_ellipse(const PlantedFigure& f, double mpp) {
  return {f.center, f.major_um / 2.0 / mpp, f.minor_um / 2.0 / mpp, f.orientation_deg};
}

Ellipse tissue_ellipse(const TissueRegion& t) { return {t.center, t.semi_x_px, t.semi_y_px, t.angle_deg}; }

class Renderer {
 public:
  explicit Renderer(const SlideManifest& m) : m_(m) {
    for (const auto& f : m.ground_truth) figures_.push_back(figure_ellipse(f, m.mpp));
    for (const auto& t : m.tissue) tissue_.push_back(tissue_ellipse(t));
  }

  /// Figures whose bounding box meets [x0, x1) x [y0, y1).
  [[nodiscard]] std::vector<std::size_t> figures_near(double x0, double y0, double x1, double y1) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < figures_.size(); ++i) {
      const auto& e = figures_[i];
      if (e.cx + e.reach + 1 >= x0 && e.cx - e.reach - 1 <= x1 && e.cy + e.reach + 1 >= y0 &&
          e.cy - e.reach - 1 <= y1) {
        out.push_back(i);
      }
    }
    return out;
  }

  [[nodiscard]] bool figure_at(int x, int y, const std::vector<std::size_t>& near) const {
    const double px = x + 0.5, py = y + 0.5;
    return std::any_of(near.begin(), near.end(), [&](std::size_t i) { return figures_[i].contains(px, py); });
  }

  [[nodiscard]] Rgb color(int x, int y, const std::vector<std::size_t>& near) const {
    if (x < 0 || y < 0 || x >= m_.width_px || y >= m_.height_px) return {255, 255, 255};
    const std::uint64_t h = pixel_hash(m_.seed, x, y);
    const double noise = static_cast<double>(h % 17) - 8.0;
    if (figure_at(x, y, near)) {
      return {clamp8(62 + noise), clamp8(34 + noise), clamp8(92 + noise)};
    }
    const double px = x + 0.5, py = y + 0.5;
    const bool tissue =
        std::any_of(tissue_.begin(), tissue_.end(), [&](const Ellipse& e) { return e.contains(px, py); });
    if (tissue) {
      const double wave = 10.0 * std::sin(px * 0.013) * std::cos(py * 0.017);
      return {clamp8(228 + wave + noise), clamp8(172 + wave + noise), clamp8(202 + wave + noise)};
    }
    const auto v = static_cast<std::uint8_t>(249 + (h >> 8) % 7);
    return {v, v, static_cast<std::uint8_t>(v - (h >> 16) % 2)};
  }

  [[nodiscard]] bool in_tissue(double x, double y) const {
    return std::any_of(tissue_.begin(), tissue_.end(), [&](const Ellipse& e) { return e.contains(x, y); });
  }

  [[nodiscard]] std::size_t figure_count() const noexcept { return figures_.size(); }

 private:
  const SlideManifest& m_;
  std::vector<Ellipse> figures_;
  std::vector<Ellipse> tissue_;
};

bool filename_safe(const std::string& s) {
  return !s.empty() && s != "." && s != ".." && std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  });
}

int round_up(int v, int step) { return (v + step - 1) / step * step; }

double speck_max_um(double mpp) { return std::min(2.0, 3.0 - 2.0 * mpp); }

struct Placed {
  Point2 center;
  double radius_px;
};

class Placer {
 public:
  Placer(const SlideManifest& m, const SyntheticSpec& spec, std::mt19937_64& rng)
      : renderer_(m), spec_(spec), rng_(rng) {}

  Point2 place(double radius_um, const char* what) {
    const double radius_px = radius_um / spec_.mpp;
    const double margin = radius_px + kTissueMarginPx;
    const double sep_px = spec_.min_separation_um / spec_.mpp;
    std::uniform_real_distribution<double> ux(margin, spec_.width_px - margin);
    std::uniform_real_distribution<double> uy(margin, spec_.height_px - margin);
    if (!(spec_.width_px > 2 * margin && spec_.height_px > 2 * margin)) {
      throw std::runtime_error(std::string("synthetic slide too small to place a ") + what);
    }
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const Point2 c{ux(rng_), uy(rng_)};
      if (!tissue_around(c, margin)) continue;
      const bool clear = std::all_of(placed_.begin(), placed_.end(), [&](const Placed& p) {
        return euclidean(p.center, c) >= p.radius_px + radius_px + sep_px;
      });
      if (!clear) continue;
      placed_.push_back({c, radius_px});
      return c;
    }
    throw std::runtime_error("synthetic slide '" + spec_.slide_id + "': cannot place " + what + " after " +
                             std::to_string(kMaxPlacementAttempts) + " attempts (packing infeasible)");
  }

 private:
  [[nodiscard]] bool tissue_around(Point2 c, double margin) const {
    if (!renderer_.in_tissue(c.x, c.y)) return false;
    for (int k = 0; k < 16; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 16.0;
      if (!renderer_.in_tissue(c.x + margin * std::cos(t), c.y + margin * std::sin(t))) return false;
    }
    return true;
  }

  Renderer renderer_;
  const SyntheticSpec& spec_;
  std::mt19937_64& rng_;
  std::vector<Placed> placed_;
};

ordered_json figure_json(const PlantedFigure& f) {
  ordered_json j;
  j["id"] = f.id;
  j["x"] = f.center.x;
  j["y"] = f.center.y;
  j["major_um"] = f.major_um;
  j["minor_um"] = f.minor_um;
  j["orientation_deg"] = f.orientation_deg;
  j["is_speck"] = f.is_speck;
  if (f.pair_partner) j["pair_partner"] = *f.pair_partner;
  if (f.pair_gap_um) j["pair_gap_um"] = *f.pair_gap_um;
  return j;
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("manifest: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: field '") + key + "': " + e.what());
  }
}

void apply_spec_keys(const nlohmann::json& obj, SyntheticSpec& s, int& repeat) {
  if (!obj.is_object()) throw ConfigError("synthetic spec entries must be JSON objects");
  for (const auto& [key, v] : obj.items()) {
    try {
      if (key == "slides") continue;
      if (key == "slide_id") s.slide_id = v.get<std::string>();
      else if (key == "width_px") s.width_px = v.get<int>();
      else if (key == "height_px") s.height_px = v.get<int>();
      else if (key == "mpp") s.mpp = v.get<double>();
      else if (key == "n_figures") s.n_figures = v.get<int>();
      else if (key == "n_specks") s.n_specks = v.get<int>();
      else if (key == "n_pairs") s.n_pairs = v.get<int>();
      else if (key == "pair_gap_um") s.pair_gaps_um = {v.get<double>()};
      else if (key == "pair_gaps_um") s.pair_gaps_um = v.get<std::vector<double>>();
      else if (key == "tissue_fraction") s.tissue_fraction = v.get<double>();
      else if (key == "gate") s.gate = gate_label_from_string(v.get<std::string>());
      else if (key == "min_separation_um") s.min_separation_um = v.get<double>();
      else if (key == "tile_px") s.tile_px = v.get<int>();
      else if (key == "overview_downsample") s.overview_downsample = v.get<int>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "repeat") repeat = v.get<int>();
      else throw ConfigError("unknown synthetic spec key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("synthetic spec key '" + key + "': " + e.what());
    }
  }
}

}  // namespace

int SlideManifest::padded_width() const noexcept { return round_up(width_px, tile_px); }
int SlideManifest::padded_height() const noexcept { return round_up(height_px, tile_px); }

int SlideManifest::expected_count(double max_interpolar_um) const {
  int count = 0;
  for (const auto& f : ground_truth) {
    if (f.is_speck) continue;
    if (!f.pair_partner) {
      ++count;
    } else if (f.id < *f.pair_partner) {
      count += f.pair_gap_um.value_or(0.0) <= max_interpolar_um ? 1 : 2;
    }
  }
  return count;
}

const TileEntry* SlideManifest::find_tile(TileOffset offset) const noexcept {
  for (const auto& t : tiles) {
    if (t.offset == offset) return &t;
  }
  return nullptr;
}

void validate(const SyntheticSpec& spec) {
  auto fail = [&](const std::string& msg) { throw ConfigError("synthetic spec '" + spec.slide_id + "': " + msg); };
  if (!filename_safe(spec.slide_id)) fail("slide_id must be a non-empty [A-Za-z0-9._-] name");
  if (spec.width_px <= 0 || spec.height_px <= 0) fail("dimensions must be positive");
  if (!std::isfinite(spec.mpp) || spec.mpp <= 0.0) fail("mpp must be positive");
  if (spec.n_figures < 0 || spec.n_specks < 0 || spec.n_pairs < 0) fail("object counts must be >= 0");
  if (!(spec.tissue_fraction >= 0.0 && spec.tissue_fraction <= 1.0)) fail("tissue_fraction must lie in [0, 1]");
  if (spec.n_pairs > 0 && spec.pair_gaps_um.empty()) fail("pairs need at least one gap");
  for (double g : spec.pair_gaps_um) {
    if (!std::isfinite(g) || g < 0.0) fail("pair gaps must be finite and >= 0");
  }
  if (!(spec.min_separation_um >= 0.0)) fail("min_separation_um must be >= 0");
  if (spec.tile_px <= 0) fail("tile_px must be positive");
  if (spec.overview_downsample < 1) fail("overview_downsample must be >= 1");
  if (spec.n_specks > 0 && speck_max_um(spec.mpp) <= 0.0) fail("mpp too coarse to render sub-3 micron specks");
  if (spec.tissue_fraction == 0.0 && spec.n_figures + spec.n_specks + spec.n_pairs > 0) {
    fail("figures need tissue");
  }
}

SlideManifest plan_synthetic_slide(const SyntheticSpec& spec) {
  validate(spec);
  SlideManifest m;
  m.slide_id = spec.slide_id;
  m.width_px = spec.width_px;
  m.height_px = spec.height_px;
  m.mpp = spec.mpp;
  m.tile_px = spec.tile_px;
  m.seed = spec.seed;
  m.overview_downsample = spec.overview_downsample;
  m.thumbnail_path = "thumbnail.png";
  m.overview_path = "overview.png";
  m.gate_truth = spec.gate.value_or(spec.tissue_fraction > 0.0 ? GateLabel::kCount : GateLabel::kNoCount);
  for (int y = 0; y < m.padded_height(); y += m.tile_px) {
    for (int x = 0; x < m.padded_width(); x += m.tile_px) {
      m.tiles.push_back({{x, y}, "tiles/tile_" + std::to_string(x) + "_" + std::to_string(y) + ".png"});
    }
  }
  if (spec.tissue_fraction > 0.0) {
    const double s = std::min(0.98, std::sqrt(4.0 * spec.tissue_fraction / std::numbers::pi));
    m.tissue.push_back({{spec.width_px / 2.0, spec.height_px / 2.0}, s * spec.width_px / 2.0,
                        s * spec.height_px / 2.0, 0.0});
  }

  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  Placer placer(m, spec, rng);
  int next_id = 0;

  for (int i = 0; i < spec.n_pairs; ++i) {
    const double gap = spec.pair_gaps_um[static_cast<std::size_t>(i) % spec.pair_gaps_um.size()];
    const double major = uniform(6.0, 9.0);
    const double minor = uniform(2.5, 4.0);
    const bool horizontal = (rng() & 1U) == 0;
    const double half_offset_um = minor / 2.0 + gap / 2.0;
    const Point2 c = placer.place(half_offset_um + major / 2.0, "pair");
    const double d = half_offset_um / spec.mpp;
    const Point2 step = horizontal ? Point2{d, 0.0} : Point2{0.0, d};
    PlantedFigure a{next_id, c - step, major, minor, horizontal ? 90.0 : 0.0, false, next_id + 1, gap};
    PlantedFigure b{next_id + 1, c + step, major, minor, horizontal ? 90.0 : 0.0, false, next_id, gap};
    m.ground_truth.push_back(a);
    m.ground_truth.push_back(b);
    next_id += 2;
  }
  for (int i = 0; i < spec.n_figures; ++i) {
    const double major = uniform(6.0, 10.0);
    const double minor = uniform(4.0, std::min(6.0, major));
    const double angle = uniform(0.0, 180.0);
    const Point2 c = placer.place(major / 2.0, "figure");
    m.ground_truth.push_back({next_id++, c, major, minor, angle, false, std::nullopt, std::nullopt});
  }
  const double smax = speck_max_um(spec.mpp);
  for (int i = 0; i < spec.n_specks; ++i) {
    const double d = uniform(0.5 * smax, smax);
    const Point2 c = placer.place(d / 2.0, "speck");
    m.ground_truth.push_back({next_id++, c, d, d, 0.0, true, std::nullopt, std::nullopt});
  }
  return m;
}

RgbImage render_region(const SlideManifest& manifest, int x0, int y0, int w, int h) {
  const Renderer r(manifest);
  const auto near = r.figures_near(x0, y0, x0 + w, y0 + h);
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = r.color(x0 + x, y0 + y, near);
  }
  return out;
}

RgbImage render_overview(const SlideManifest& manifest, int factor) {
  if (factor < 1) throw std::invalid_argument("overview factor must be >= 1");
  const Renderer r(manifest);
  const auto all = r.figures_near(0, 0, manifest.width_px, manifest.height_px);
  const int w = (manifest.width_px + factor - 1) / factor;
  const int h = (manifest.height_px + factor - 1) / factor;
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(manifest.width_px - 1, x * factor + factor / 2);
      const int sy = std::min(manifest.height_px - 1, y * factor + factor / 2);
      out(x, y) = r.color(sx, sy, all);
    }
  }
  return out;
}

RgbImage render_thumbnail(const SlideManifest& manifest) {
  const Renderer r(manifest);
  const auto all = r.figures_near(0, 0, manifest.width_px, manifest.height_px);
  const double scale = static_cast<double>(std::max(manifest.width_px, manifest.height_px)) / kThumbnailSize;
  RgbImage out(kThumbnailSize, kThumbnailSize, Rgb{255, 255, 255});
  for (int y = 0; y < kThumbnailSize; ++y) {
    for (int x = 0; x < kThumbnailSize; ++x) {
      const auto sx = static_cast<int>(std::floor((x + 0.5) * scale));
      const auto sy = static_cast<int>(std::floor((y + 0.5) * scale));
      out(x, y) = r.color(sx, sy, all);
    }
  }
  return out;
}

BinaryMask rasterize_truth(const SlideManifest& manifest, TileOffset offset, int w, int h) {
  const Renderer r(manifest);
  const auto near = r.figures_near(offset.x, offset.y, offset.x + w, offset.y + h);
  BinaryMask out(w, h, 0);
  if (near.empty()) return out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int gx = offset.x + x, gy = offset.y + y;
      const bool inside = gx < manifest.width_px && gy < manifest.height_px;
      out(x, y) = inside && r.figure_at(gx, gy, near) ? 1 : 0;
    }
  }
  return out;
}

SlideManifest gen_synthetic_slide(const SyntheticSpec& spec, const std::filesystem::path& slide_dir) {
  SlideManifest m = plan_synthetic_slide(spec);
  std::error_code ec;
  std::filesystem::create_directories(slide_dir / "tiles", ec);
  if (ec) throw IoError("cannot create " + (slide_dir / "tiles").string() + ": " + ec.message());
  for (const auto& t : m.tiles) {
    write_png(slide_dir / t.path, render_region(m, t.offset.x, t.offset.y, m.tile_px, m.tile_px));
  }
  write_png(slide_dir / m.thumbnail_path, render_thumbnail(m));
  write_png(slide_dir / m.overview_path, render_overview(m, m.overview_downsample));
  write_manifest(m, slide_dir / "manifest.json");
  return m;
}

std::string manifest_to_json(const SlideManifest& m) {
  ordered_json j;
  j["format"] = "mitocount-slide";
  j["version"] = 1;
  j["slide_id"] = m.slide_id;
  j["width_px"] = m.width_px;
  j["height_px"] = m.height_px;
  j["mpp"] = m.mpp;
  j["tile_px"] = m.tile_px;
  j["seed"] = m.seed;
  j["thumbnail"] = m.thumbnail_path;
  j["overview"] = m.overview_path;
  j["overview_downsample"] = m.overview_downsample;
  j["gate_truth"] = m.gate_truth ? ordered_json(to_string(*m.gate_truth)) : ordered_json(nullptr);
  j["tiles"] = ordered_json::array();
  for (const auto& t : m.tiles) j["tiles"].push_back({{"x", t.offset.x}, {"y", t.offset.y}, {"path", t.path}});
  j["tissue"] = ordered_json::array();
  for (const auto& t : m.tissue) {
    j["tissue"].push_back({{"cx", t.center.x},
                           {"cy", t.center.y},
                           {"semi_x_px", t.semi_x_px},
                           {"semi_y_px", t.semi_y_px},
                           {"angle_deg", t.angle_deg}});
  }
  j["ground_truth"] = ordered_json::array();
  for (const auto& f : m.ground_truth) j["ground_truth"].push_back(figure_json(f));
  return j.dump(2) + "\n";
}

void write_manifest(const SlideManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest);
  if (!out) throw IoError("failed writing " + path.string());
}

SlideManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "mitocount-slide") {
    throw ParseError("manifest " + path.string() + ": not a mitocount-slide document");
  }
  SlideManifest m;
  m.slide_id = field<std::string>(j, "slide_id");
  m.width_px = field<int>(j, "width_px");
  m.height_px = field<int>(j, "height_px");
  m.mpp = field<double>(j, "mpp");
  m.tile_px = field<int>(j, "tile_px");
  m.seed = field<std::uint64_t>(j, "seed");
  m.thumbnail_path = field<std::string>(j, "thumbnail");
  m.overview_path = field<std::string>(j, "overview");
  m.overview_downsample = field<int>(j, "overview_downsample");
  if (m.width_px <= 0 || m.height_px <= 0 || m.tile_px <= 0 || !(m.mpp > 0.0) || m.overview_downsample < 1) {
    throw ParseError("manifest " + path.string() + ": non-positive dimensions, tile size or mpp");
  }
  if (j.contains("gate_truth") && !j["gate_truth"].is_null()) {
    m.gate_truth = gate_label_from_string(field<std::string>(j, "gate_truth"));
  }
  for (const auto& t : field<nlohmann::json>(j, "tiles")) {
    m.tiles.push_back({{field<int>(t, "x"), field<int>(t, "y")}, field<std::string>(t, "path")});
  }
  std::set<TileOffset> expected;
  for (int y = 0; y < m.padded_height(); y += m.tile_px) {
    for (int x = 0; x < m.padded_width(); x += m.tile_px) expected.insert({x, y});
  }
  std::set<TileOffset> listed;
  for (const auto& t : m.tiles) listed.insert(t.offset);
  if (listed != expected || listed.size() != m.tiles.size()) {
    throw ParseError("manifest " + path.string() + ": tiles do not exactly cover the padded slide");
  }
  for (const auto& t : field<nlohmann::json>(j, "tissue")) {
    m.tissue.push_back({{field<double>(t, "cx"), field<double>(t, "cy")},
                        field<double>(t, "semi_x_px"),
                        field<double>(t, "semi_y_px"),
                        field<double>(t, "angle_deg")});
  }
  for (const auto& f : field<nlohmann::json>(j, "ground_truth")) {
    PlantedFigure p;
    p.id = field<int>(f, "id");
    p.center = {field<double>(f, "x"), field<double>(f, "y")};
    p.major_um = field<double>(f, "major_um");
    p.minor_um = field<double>(f, "minor_um");
    p.orientation_deg = field<double>(f, "orientation_deg");
    p.is_speck = field<bool>(f, "is_speck");
    if (f.contains("pair_partner")) p.pair_partner = field<int>(f, "pair_partner");
    if (f.contains("pair_gap_um")) p.pair_gap_um = field<double>(f, "pair_gap_um");
    if (!(p.center.x >= 0 && p.center.y >= 0 && p.center.x <= m.width_px && p.center.y <= m.height_px)) {
      throw ParseError("manifest " + path.string() + ": figure " + std::to_string(p.id) + " lies outside the slide");
    }
    m.ground_truth.push_back(p);
  }
  return m;
}

std::vector<SyntheticSpec> parse_synthetic_specs(const std::string& json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec is not valid JSON: ") + e.what());
  }
  SyntheticSpec defaults;
  int default_repeat = 1;
  apply_spec_keys(root, defaults, default_repeat);
  std::vector<std::pair<SyntheticSpec, int>> entries;
  if (root.contains("slides")) {
    if (!root["slides"].is_array()) throw ConfigError("synthetic spec 'slides' must be an array");
    for (const auto& entry : root["slides"]) {
      SyntheticSpec s = defaults;
      int repeat = default_repeat;
      apply_spec_keys(entry, s, repeat);
      entries.emplace_back(s, repeat);
    }
  } else {
    entries.emplace_back(defaults, default_repeat);
  }
  std::vector<SyntheticSpec> out;
  for (const auto& [spec, repeat] : entries) {
    if (repeat < 1) throw ConfigError("synthetic spec 'repeat' must be >= 1");
    for (int i = 0; i < repeat; ++i) {
      SyntheticSpec s = spec;
      if (repeat > 1) {
        std::ostringstream id;
        id << spec.slide_id << '_' << std::setw(3) << std::setfill('0') << i;
        s.slide_id = id.str();
        s.seed = spec.seed + static_cast<std::uint64_t>(i);
      }
      validate(s);
      out.push_back(std::move(s));
    }
  }
  std::set<std::string> ids;
  for (const auto& s : out) {
    if (!ids.insert(s.slide_id).second) throw ConfigError("duplicate synthetic slide id '" + s.slide_id + "'");
  }
  return out;
}

std::vector<SyntheticSpec> read_synthetic_specs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open synthetic spec " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_synthetic_specs(text.str());
}

}  // namespace mitocount
