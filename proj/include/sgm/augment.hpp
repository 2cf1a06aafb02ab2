// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgm/core.hpp"
#include "sgm/error.hpp"
#include "sgm/image.hpp"
#include "sgm/slic.hpp"

namespace sgm {

enum class Operator { Cut, Mean, Mix };

inline std::string_view to_string(Operator op) noexcept {
  switch (op) {
    case Operator::Cut: return "cut";
    case Operator::Mean: return "mean";
    case Operator::Mix: return "mix";
  }
  return "cut";
}

inline std::optional<Operator> parse_operator(std::string_view s) noexcept {
  if (s == "cut") return Operator::Cut;
  if (s == "mean") return Operator::Mean;
  if (s == "mix") return Operator::Mix;
  return std::nullopt;
}

namespace detail {

inline void check_operands(const Image& image, const SuperpixelGrid& grid, const SelectionMask& selection) {
  if (!grid.matches(image))
    throw DimensionError("grid " + std::to_string(grid.width()) + "x" + std::to_string(grid.height()) +
                         " does not match image " + std::to_string(image.width()) + "x" +
                         std::to_string(image.height()));
  if (selection.size() != grid.superpixel_count())
    throw DimensionError("selection length does not match superpixel count");
}

}  // namespace detail

/// Blackens every selected superpixel (all channels set to 0).
inline Image grid_cut(const Image& image, const SuperpixelGrid& grid, const SelectionMask& selection) {
  detail::check_operands(image, grid, selection);
  Image out = image;
  const auto c = std::size_t(image.channels());
  auto labels = grid.labels();
  auto data = out.data();
  for (std::size_t p = 0; p < labels.size(); ++p)
    if (selection[labels[p]])
      for (std::size_t ch = 0; ch < c; ++ch) data[p * c + ch] = 0;
  return out;
}

/// Image whose every superpixel is filled with that superpixel's per-channel
/// mean over `image`. Means are exact integer sums rounded half-up.
inline Image superpixel_mean_image(const Image& image, const SuperpixelGrid& grid) {
  if (!grid.matches(image)) throw DimensionError("grid does not match image");
  const auto c = std::size_t(image.channels());
  const std::size_t k = grid.superpixel_count();
  std::vector<std::uint64_t> sums(k * c, 0);
  std::vector<std::uint64_t> counts(k, 0);
  auto labels = grid.labels();
  auto src = image.data();
  for (std::size_t p = 0; p < labels.size(); ++p) {
    ++counts[labels[p]];
    for (std::size_t ch = 0; ch < c; ++ch) sums[labels[p] * c + ch] += src[p * c + ch];
  }
  std::vector<std::uint8_t> means(k * c);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      means[i * c + ch] = std::uint8_t((2 * sums[i * c + ch] + counts[i]) / (2 * counts[i]));

  Image out(image.width(), image.height(), image.channels());
  auto dst = out.data();
  for (std::size_t p = 0; p < labels.size(); ++p)
    for (std::size_t ch = 0; ch < c; ++ch) dst[p * c + ch] = means[labels[p] * c + ch];
  return out;
}

/// Replaces every selected superpixel by its own mean colour.
inline Image grid_mean(const Image& image, const SuperpixelGrid& grid, const SelectionMask& selection) {
  detail::check_operands(image, grid, selection);
  const Image means = superpixel_mean_image(image, grid);
  Image out = image;
  const auto c = std::size_t(image.channels());
  auto labels = grid.labels();
  auto src = means.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < labels.size(); ++p)
    if (selection[labels[p]])
      for (std::size_t ch = 0; ch < c; ++ch) dst[p * c + ch] = src[p * c + ch];
  return out;
}

/// Copies the partner's pixels into every selected superpixel at the same
/// (x, y), both images anchored at their top-left corner. The partner must be
/// at least as wide and as tall as `image`.
inline Image grid_mix(const Image& image, const Image& partner, const SuperpixelGrid& grid,
                      const SelectionMask& selection) {
  detail::check_operands(image, grid, selection);
  if (partner.channels() != image.channels())
    throw DimensionError("mix partner has " + std::to_string(partner.channels()) + " channels, image has " +
                         std::to_string(image.channels()));
  if (partner.width() < image.width() || partner.height() < image.height())
    throw SizeConstraintError("mix partner " + std::to_string(partner.width()) + "x" +
                              std::to_string(partner.height()) + " is smaller than image " +
                              std::to_string(image.width()) + "x" + std::to_string(image.height()));
  Image out = image;
  const auto c = std::size_t(image.channels());
  for (int y = 0; y < image.height(); ++y) {
    const std::uint8_t* src = partner.pixel(0, y);
    std::uint8_t* dst = out.pixel(0, y);
    for (int x = 0; x < image.width(); ++x)
      if (selection[grid.at(x, y)])
        for (std::size_t ch = 0; ch < c; ++ch) dst[std::size_t(x) * c + ch] = src[std::size_t(x) * c + ch];
  }
  return out;
}

/// Result of one augmentation with everything needed to reproduce it.
struct AugmentOutcome {
  Image image;
  SuperpixelGrid grid;
  SelectionMask selection;
  Operator op = Operator::Cut;
  AugmentConfig config;
  std::optional<std::string> partner_id;  // set iff op == Mix
};

/// Segments `image`, draws the selection from config.seed and applies `op`.
inline AugmentOutcome augment_one(const Image& image, Operator op, const AugmentConfig& config,
                                  const Image* partner = nullptr, std::optional<std::string> partner_id = {}) {
  config.validate();
  if (op == Operator::Mix && partner == nullptr) throw ParameterError("mix requires a partner image");
  if (op != Operator::Mix && partner != nullptr) throw ParameterError("only mix takes a partner image");
  if (op == Operator::Mix) {
    // Check the partner before paying for segmentation.
    if (partner->channels() != image.channels()) throw DimensionError("mix partner channel count mismatch");
    if (partner->width() < image.width() || partner->height() < image.height())
      throw SizeConstraintError("mix partner is smaller than the image");
  }

  AugmentOutcome out;
  out.op = op;
  out.config = config;
  out.grid = slic_segment(image, SlicParams::from(config));
  out.selection = select_superpixels(out.grid, config.ratio, config.seed);
  switch (op) {
    case Operator::Cut: out.image = grid_cut(image, out.grid, out.selection); break;
    case Operator::Mean: out.image = grid_mean(image, out.grid, out.selection); break;
    case Operator::Mix:
      out.image = grid_mix(image, *partner, out.grid, out.selection);
      out.partner_id = partner_id.value_or(std::string{});
      break;
  }
  return out;
}

}  // namespace sgm
