// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/image.hpp"
#include "sgm/rng.hpp"

namespace sgm {

using Label = std::uint32_t;

/// Per-pixel label map partitioning an image into k superpixels.
///
/// Construction checks that every label lies in [0, k) and that every label
/// in [0, k) is used. 4-connectivity of each label is not re-checked here
/// (it is O(pixels) and guaranteed by slic_segment); use is_four_connected()
/// on label maps from untrusted sources.
class SuperpixelGrid {
 public:
  SuperpixelGrid() = default;

  SuperpixelGrid(int width, int height, std::vector<Label> labels)
      : width_(width), height_(height), labels_(std::move(labels)) {
    if (width < 1 || height < 1) throw DimensionError("grid extent must be at least 1x1");
    if (labels_.size() != std::size_t(width) * std::size_t(height))
      throw DimensionError("label count does not match grid extent");
    Label max_label = 0;
    for (Label l : labels_) max_label = std::max(max_label, l);
    count_ = std::size_t(max_label) + 1;
    std::vector<std::uint8_t> seen(count_, 0);
    for (Label l : labels_) seen[l] = 1;
    for (std::size_t i = 0; i < count_; ++i)
      if (!seen[i]) throw ParameterError("label " + std::to_string(i) + " is unused; labels must be contiguous");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return labels_.size(); }
  std::size_t superpixel_count() const noexcept { return count_; }

  Label at(int x, int y) const { return labels_[std::size_t(y) * std::size_t(width_) + std::size_t(x)]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  /// Pixel count of each superpixel.
  std::vector<std::size_t> areas() const {
    std::vector<std::size_t> out(count_, 0);
    for (Label l : labels_) ++out[l];
    return out;
  }

  bool matches(const Image& image) const noexcept {
    return image.width() == width_ && image.height() == height_;
  }

  friend bool operator==(const SuperpixelGrid&, const SuperpixelGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t count_ = 0;
  std::vector<Label> labels_;
};

/// True when every label's pixel set forms a single 4-connected component.
inline bool is_four_connected(const SuperpixelGrid& grid) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<std::uint8_t> visited(grid.pixel_count(), 0);
  std::vector<std::uint8_t> label_done(grid.superpixel_count(), 0);
  std::vector<std::size_t> stack;
  auto labels = grid.labels();
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (visited[start]) continue;
    const Label l = labels[start];
    if (label_done[l]) return false;  // second component of an already-seen label
    label_done[l] = 1;
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int x = int(p % std::size_t(w));
      const int y = int(p / std::size_t(w));
      const auto push = [&](std::size_t q) {
        if (!visited[q] && labels[q] == l) {
          visited[q] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) push(p - 1);
      if (x + 1 < w) push(p + 1);
      if (y > 0) push(p - std::size_t(w));
      if (y + 1 < h) push(p + std::size_t(w));
    }
  }
  return true;
}

/// One flag per superpixel: true = processed, false = untouched.
class SelectionMask {
 public:
  SelectionMask() = default;
  explicit SelectionMask(std::size_t k, bool value = false) : flags_(k, value ? 1 : 0) {}
  explicit SelectionMask(std::vector<std::uint8_t> flags) : flags_(std::move(flags)) {
    for (auto& f : flags_) f = f ? 1 : 0;
  }

  std::size_t size() const noexcept { return flags_.size(); }
  bool operator[](std::size_t i) const { return flags_[i] != 0; }
  void set(std::size_t i, bool v) { flags_[i] = v ? 1 : 0; }

  std::size_t selected_count() const noexcept {
    std::size_t n = 0;
    for (auto f : flags_) n += f;
    return n;
  }

  SelectionMask complement() const {
    SelectionMask out(*this);
    for (auto& f : out.flags_) f ^= 1;
    return out;
  }

  std::span<const std::uint8_t> flags() const noexcept { return flags_; }

  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;

 private:
  std::vector<std::uint8_t> flags_;
};

/// Per-pixel binary mask (M of the unified composition, expanded to pixels).
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(int width, int height, bool value = false)
      : width_(width), height_(height), bits_(std::size_t(width) * std::size_t(height), value ? 1 : 0) {
    if (width < 1 || height < 1) throw DimensionError("mask extent must be at least 1x1");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept { return std::size_t(y) * std::size_t(width_) + std::size_t(x); }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class GridType { Slic };

inline std::string_view to_string(GridType t) noexcept {
  switch (t) {
    case GridType::Slic: return "slic";
  }
  return "slic";
}

inline std::optional<GridType> parse_grid_type(std::string_view s) noexcept {
  if (s == "slic") return GridType::Slic;
  return std::nullopt;
}

/// Augmentation parameters: grid type t, seed s, superpixel count q, ratio r,
/// plus the SLIC knobs.
struct AugmentConfig {
  GridType grid_type = GridType::Slic;
  std::uint64_t seed = 0;
  int superpixels = 200;
  double ratio = 0.4;
  double compactness = 10.0;
  int iterations = 10;
  double min_region_fraction = 0.25;

  void validate() const {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ParameterError("ratio must lie in [0, 1]");
    if (superpixels < 1) throw ParameterError("superpixel count must be >= 1");
    if (!(compactness > 0.0)) throw ParameterError("compactness must be positive");
    if (iterations < 1) throw ParameterError("iterations must be >= 1");
    if (!(min_region_fraction > 0.0 && min_region_fraction <= 1.0))
      throw ParameterError("min_region_fraction must lie in (0, 1]");
  }

  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

/// Draws p_i for superpixel i = 0..k-1 (word i of the seeded CounterRng) and
/// flags it when p_i < ratio. Depends only on (k, ratio, seed).
inline SelectionMask select_superpixels(std::size_t k, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ParameterError("ratio must lie in [0, 1]");
  const CounterRng rng(seed);
  SelectionMask mask(k);
  for (std::size_t i = 0; i < k; ++i) mask.set(i, rng.uniform(i) < ratio);
  return mask;
}

inline SelectionMask select_superpixels(const SuperpixelGrid& grid, double ratio, std::uint64_t seed) {
  return select_superpixels(grid.superpixel_count(), ratio, seed);
}

inline PixelMask pixel_mask(const SuperpixelGrid& grid, const SelectionMask& selection) {
  if (selection.size() != grid.superpixel_count())
    throw DimensionError("selection has " + std::to_string(selection.size()) + " flags but grid has " +
                         std::to_string(grid.superpixel_count()) + " superpixels");
  PixelMask mask(grid.width(), grid.height());
  auto labels = grid.labels();
  auto flags = selection.flags();
  auto bits = mask.bits();
  for (std::size_t i = 0; i < labels.size(); ++i) bits[i] = flags[labels[i]];
  return mask;
}

/// K = (1 - M) * I + M * J with binary M: J where the mask is set, I elsewhere.
/// J may be larger than I; it is read at the same (x, y) anchored at the top-left.
inline Image compose(const Image& base, const Image& overlay, const PixelMask& mask) {
  if (mask.width() != base.width() || mask.height() != base.height())
    throw DimensionError("mask extent does not match the base image");
  if (overlay.channels() != base.channels()) throw DimensionError("channel count mismatch");
  if (overlay.width() < base.width() || overlay.height() < base.height())
    throw DimensionError("overlay image is smaller than the base image");
  Image out = base;
  const auto c = std::size_t(base.channels());
  for (int y = 0; y < base.height(); ++y) {
    const std::uint8_t* src = overlay.pixel(0, y);
    std::uint8_t* dst = out.pixel(0, y);
    for (int x = 0; x < base.width(); ++x)
      if (mask.at(x, y))
        for (std::size_t ch = 0; ch < c; ++ch) dst[std::size_t(x) * c + ch] = src[std::size_t(x) * c + ch];
  }
  return out;
}

/// Fraction of pixels set in the mask.
inline double masked_ratio(const PixelMask& mask) noexcept {
  if (mask.size() == 0) return 0.0;
  std::size_t n = 0;
  for (auto b : mask.bits()) n += b;
  return double(n) / double(mask.size());
}

}  // namespace sgm
