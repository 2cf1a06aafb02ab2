// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic synthetic images and scratch directories shared by the suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "sgm/image.hpp"

namespace sgm::test {

/// Small stateful PRNG for fixtures (xorshift64*), independent of the library's generator.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : s_(seed * 2654435761ULL + 0x9E3779B97F4A7C15ULL) {
    if (s_ == 0) s_ = 1;
  }
  std::uint64_t next() {
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545F4914F6CDD1DULL;
  }
  int uniform_int(int lo, int hi) { return lo + int(next() % std::uint64_t(hi - lo + 1)); }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_;
};

inline Image noise_image(int w, int h, int c, std::uint64_t seed) {
  FixtureRng rng(seed);
  Image img(w, h, c);
  for (auto& v : img.data()) v = std::uint8_t(rng.next() >> 56);
  return img;
}

inline Image constant_image(int w, int h, int c, std::uint8_t value) { return Image(w, h, c, value); }

/// Outdoor-ish scene: two-tone gradient background, a handful of flat-coloured
/// ellipses and rectangles, mild noise.
inline Image scene_image(int w, int h, std::uint64_t seed) {
  FixtureRng rng(seed);
  Image img(w, h, 3);
  const int horizon = h / 3 + rng.uniform_int(0, h / 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t* p = img.pixel(x, y);
      if (y < horizon) {
        p[0] = std::uint8_t(90 + 60 * y / std::max(1, horizon));
        p[1] = std::uint8_t(140 + 50 * y / std::max(1, horizon));
        p[2] = 230;
      } else {
        p[0] = std::uint8_t(60 + 40 * x / w);
        p[1] = std::uint8_t(120 + 30 * (y - horizon) / std::max(1, h - horizon));
        p[2] = 50;
      }
    }
  const int shapes = rng.uniform_int(4, 9);
  for (int s = 0; s < shapes; ++s) {
    const int cx = rng.uniform_int(0, w - 1);
    const int cy = rng.uniform_int(0, h - 1);
    const int rx = rng.uniform_int(std::max(2, w / 16), std::max(3, w / 4));
    const int ry = rng.uniform_int(std::max(2, h / 16), std::max(3, h / 4));
    const std::uint8_t col[3] = {std::uint8_t(rng.next() >> 56), std::uint8_t(rng.next() >> 56),
                                 std::uint8_t(rng.next() >> 56)};
    const bool ellipse = rng.next() & 1;
    for (int y = std::max(0, cy - ry); y < std::min(h, cy + ry); ++y)
      for (int x = std::max(0, cx - rx); x < std::min(w, cx + rx); ++x) {
        const double dx = double(x - cx) / rx;
        const double dy = double(y - cy) / ry;
        if (ellipse && dx * dx + dy * dy > 1.0) continue;
        std::copy(col, col + 3, img.pixel(x, y));
      }
  }
  for (auto& v : img.data()) v = std::uint8_t(std::clamp(int(v) + rng.uniform_int(-6, 6), 0, 255));
  return img;
}

/// Gray radiograph-like image: dark background, bright smooth blobs and ribs.
inline Image xray_image(int w, int h, std::uint64_t seed) {
  FixtureRng rng(seed);
  Image img(w, h, 1);
  struct Blob {
    double cx, cy, rx, ry, amp;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 2; ++i)
    blobs.push_back({w * (0.3 + 0.4 * i), h * 0.5, w * 0.18, h * 0.32, 70.0 + 20 * rng.uniform()});
  const int ribs = rng.uniform_int(5, 8);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 30.0 + 20.0 * y / h;
      for (const auto& b : blobs) {
        const double dx = (x - b.cx) / b.rx;
        const double dy = (y - b.cy) / b.ry;
        v += b.amp * std::exp(-(dx * dx + dy * dy));
      }
      const double rib = std::sin(double(y) / h * ribs * 3.14159265358979 * 2.0);
      if (rib > 0.85) v += 60.0;
      if (std::abs(x - w / 2) < w / 20) v += 80.0;  // spine
      v += rng.uniform_int(-4, 4);
      img.at(x, y) = std::uint8_t(std::clamp(v, 0.0, 255.0));
    }
  return img;
}

/// Twenty-image mixed corpus: 14 RGB scenes of assorted sizes and 6 gray
/// radiograph-like images.
inline std::vector<Image> fixture_corpus() {
  std::vector<Image> out;
  const int sizes[][2] = {{256, 192}, {240, 240}, {200, 256}, {256, 256}, {224, 168}, {256, 200}, {192, 256}};
  for (int i = 0; i < 14; ++i) out.push_back(scene_image(sizes[i % 7][0], sizes[i % 7][1], 100 + std::uint64_t(i)));
  for (int i = 0; i < 6; ++i) out.push_back(xray_image(256, 224 + 8 * i, 500 + std::uint64_t(i)));
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sgm-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace sgm::test
