// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgm/error.hpp"

namespace sgm {

/// 8-bit raster, row-major, channel-interleaved. One (gray) or three (color) channels.
class Image {
 public:
  Image() = default;

  Image(int width, int height, int channels, std::uint8_t fill = 0)
      : width_(width), height_(height), channels_(channels) {
    check_shape(width, height, channels);
    data_.assign(sample_count(), fill);
  }

  Image(int width, int height, int channels, std::vector<std::uint8_t> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_shape(width, height, channels);
    if (data_.size() != sample_count())
      throw DimensionError("image data length " + std::to_string(data_.size()) + " != " +
                           std::to_string(sample_count()));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return std::size_t(width_) * std::size_t(height_); }
  std::size_t sample_count() const noexcept { return pixel_count() * std::size_t(channels_); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t at(int x, int y, int c = 0) const { return data_[offset(x, y) + std::size_t(c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return data_[offset(x, y) + std::size_t(c)]; }

  /// Pointer to the first sample of pixel (x, y).
  const std::uint8_t* pixel(int x, int y) const { return data_.data() + offset(x, y); }
  std::uint8_t* pixel(int x, int y) { return data_.data() + offset(x, y); }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static void check_shape(int width, int height, int channels) {
    if (width < 1 || height < 1)
      throw DimensionError("image extent must be at least 1x1, got " + std::to_string(width) + "x" +
                           std::to_string(height));
    if (channels != 1 && channels != 3)
      throw DimensionError("image must have 1 or 3 channels, got " + std::to_string(channels));
  }

  std::size_t offset(int x, int y) const noexcept {
    return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Replicates a gray image into three identical channels.
inline Image to_rgb(const Image& gray) {
  if (gray.channels() == 3) return gray;
  Image out(gray.width(), gray.height(), 3);
  auto src = gray.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

/// Extracts one channel as a gray image.
inline Image extract_channel(const Image& image, int channel) {
  if (channel < 0 || channel >= image.channels())
    throw DimensionError("channel index " + std::to_string(channel) + " out of range");
  Image out(image.width(), image.height(), 1);
  auto src = image.data();
  auto dst = out.data();
  const auto c = std::size_t(image.channels());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * c + std::size_t(channel)];
  return out;
}

/// Top-left crop. Used to display a larger mix partner at the primary image's extent.
inline Image crop_top_left(const Image& image, int width, int height) {
  if (width > image.width() || height > image.height())
    throw DimensionError("crop extent exceeds image");
  Image out(width, height, image.channels());
  const auto row = std::size_t(width) * std::size_t(image.channels());
  for (int y = 0; y < height; ++y) std::copy_n(image.pixel(0, y), row, out.pixel(0, y));
  return out;
}

}  // namespace sgm
