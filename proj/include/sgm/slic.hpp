// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sgm/core.hpp"
#include "sgm/error.hpp"
#include "sgm/image.hpp"

namespace sgm {

struct SlicParams {
  int superpixels = 200;
  double compactness = 10.0;
  int iterations = 10;
  double min_region_fraction = 0.25;

  static SlicParams from(const AugmentConfig& config) {
    return {config.superpixels, config.compactness, config.iterations, config.min_region_fraction};
  }

  void validate(const Image& image) const {
    if (superpixels < 1) throw ParameterError("superpixel count must be >= 1");
    if (std::size_t(superpixels) > image.pixel_count())
      throw ParameterError("requested " + std::to_string(superpixels) + " superpixels but the image has only " +
                           std::to_string(image.pixel_count()) + " pixels");
    if (!(compactness > 0.0)) throw ParameterError("compactness must be positive");
    if (iterations < 1) throw ParameterError("iterations must be >= 1");
    if (!(min_region_fraction > 0.0 && min_region_fraction <= 1.0))
      throw ParameterError("min_region_fraction must lie in (0, 1]");
  }
};

namespace color {

/// sRGB (8-bit, D65) to CIELAB.
inline std::array<float, 3> srgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  static const std::array<double, 256> linear = [] {
    std::array<double, 256> lut{};
    for (int i = 0; i < 256; ++i) {
      const double v = i / 255.0;
      lut[std::size_t(i)] = v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
    }
    return lut;
  }();
  const double r = linear[r8];
  const double g = linear[g8];
  const double b = linear[b8];

  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / 1.00000;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;

  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  const auto f = [&](double t) { return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0; };
  const double fx = f(x);
  const double fy = f(y);
  const double fz = f(z);
  return {float(116.0 * fy - 16.0), float(500.0 * (fx - fy)), float(200.0 * (fy - fz))};
}

/// Per-pixel clustering features: CIELAB triples. Gray pixels go through the
/// same conversion as (v, v, v), so a gray image and its 3-channel replica
/// produce identical features.
inline std::vector<float> lab_features(const Image& image) {
  std::vector<float> out(image.pixel_count() * 3);
  auto data = image.data();
  if (image.channels() == 1) {
    std::array<std::array<float, 3>, 256> gray{};
    for (int v = 0; v < 256; ++v) gray[std::size_t(v)] = srgb_to_lab(std::uint8_t(v), std::uint8_t(v), std::uint8_t(v));
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
      const auto& lab = gray[data[i]];
      std::copy(lab.begin(), lab.end(), out.begin() + std::ptrdiff_t(3 * i));
    }
  } else {
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
      const auto lab = srgb_to_lab(data[3 * i], data[3 * i + 1], data[3 * i + 2]);
      std::copy(lab.begin(), lab.end(), out.begin() + std::ptrdiff_t(3 * i));
    }
  }
  return out;
}

}  // namespace color

namespace detail {

struct SlicCenter {
  float l, a, b;
  float x, y;
};

/// Regular seeding layout: ny rows of nx centers, nx * ny close to q.
struct SeedLayout {
  int nx = 1;
  int ny = 1;
  double step = 1.0;  // S = sqrt(W * H / q)
};

inline SeedLayout seed_layout(int width, int height, int q) {
  SeedLayout g;
  g.step = std::sqrt(double(width) * double(height) / double(q));
  g.ny = std::clamp(int(std::lround(height / g.step)), 1, std::min(height, q));
  g.nx = std::clamp(int(std::lround(double(q) / g.ny)), 1, width);
  if (g.nx == width) g.ny = std::clamp(int(std::lround(double(q) / g.nx)), 1, height);
  return g;
}

inline float squared_gradient(const std::vector<float>& f, int w, int h, int x, int y) {
  const auto at = [&](int xx, int yy) {
    xx = std::clamp(xx, 0, w - 1);
    yy = std::clamp(yy, 0, h - 1);
    return &f[(std::size_t(yy) * std::size_t(w) + std::size_t(xx)) * 3];
  };
  const float* l = at(x - 1, y);
  const float* r = at(x + 1, y);
  const float* u = at(x, y - 1);
  const float* d = at(x, y + 1);
  float g = 0.f;
  for (int c = 0; c < 3; ++c) {
    const float dx = r[c] - l[c];
    const float dy = d[c] - u[c];
    g += dx * dx + dy * dy;
  }
  return g;
}

/// Union-find over connected components used by the connectivity cleanup.
class ComponentForest {
 public:
  explicit ComponentForest(std::vector<std::size_t> sizes) : parent_(sizes.size()), size_(std::move(sizes)) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t c) {
    while (parent_[c] != c) c = parent_[c] = parent_[parent_[c]];
    return c;
  }
  std::size_t size(std::size_t root) const { return size_[root]; }
  /// Merges `from` into `into` (both roots).
  void absorb(std::size_t into, std::size_t from) {
    parent_[from] = into;
    size_[into] += size_[from];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Splits every label into 4-connected components, folds components smaller
/// than `min_size` into their largest neighbouring component and relabels the
/// result 0..k-1 in raster order of first appearance.
inline std::vector<Label> enforce_connectivity(const std::vector<Label>& labels, int w, int h, double min_size) {
  const std::size_t n = labels.size();
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> comp(n, none);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != none) continue;
    const std::size_t id = sizes.size();
    const Label l = labels[start];
    std::size_t count = 0;
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const int x = int(p % std::size_t(w));
      const int y = int(p / std::size_t(w));
      const auto visit = [&](std::size_t q) {
        if (comp[q] == none && labels[q] == l) {
          comp[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - std::size_t(w));
      if (y + 1 < h) visit(p + std::size_t(w));
    }
    sizes.push_back(count);
  }

  const std::size_t ncomp = sizes.size();
  std::vector<std::vector<std::size_t>> adjacent(ncomp);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = std::size_t(y) * std::size_t(w) + std::size_t(x);
      if (x + 1 < w && comp[p] != comp[p + 1]) {
        adjacent[comp[p]].push_back(comp[p + 1]);
        adjacent[comp[p + 1]].push_back(comp[p]);
      }
      if (y + 1 < h && comp[p] != comp[p + std::size_t(w)]) {
        adjacent[comp[p]].push_back(comp[p + std::size_t(w)]);
        adjacent[comp[p + std::size_t(w)]].push_back(comp[p]);
      }
    }
  }
  for (auto& a : adjacent) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  std::vector<std::size_t> small;
  for (std::size_t c = 0; c < ncomp; ++c)
    if (double(sizes[c]) < min_size) small.push_back(c);
  std::sort(small.begin(), small.end(), [&](std::size_t a, std::size_t b) {
    return sizes[a] != sizes[b] ? sizes[a] < sizes[b] : a < b;
  });

  ComponentForest forest(sizes);
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t c : small) {
      const std::size_t root = forest.find(c);
      if (double(forest.size(root)) >= min_size) continue;
      std::size_t best = none;
      for (std::size_t nb : adjacent[root]) {
        const std::size_t r = forest.find(nb);
        if (r == root) continue;
        if (best == none || forest.size(r) > forest.size(best) || (forest.size(r) == forest.size(best) && r < best))
          best = r;
      }
      if (best == none) continue;
      forest.absorb(best, root);
      auto& into = adjacent[best];
      into.insert(into.end(), adjacent[root].begin(), adjacent[root].end());
      adjacent[root].clear();
      merged = true;
    }
  }

  std::vector<Label> relabel(ncomp, std::numeric_limits<Label>::max());
  std::vector<Label> out(n);
  Label next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t root = forest.find(comp[p]);
    if (relabel[root] == std::numeric_limits<Label>::max()) relabel[root] = next++;
    out[p] = relabel[root];
  }
  return out;
}

}  // namespace detail

/// SLIC superpixel segmentation.
///
/// Centers start on a regular grid of step S = sqrt(W*H/q), move to the
/// lowest-gradient pixel of their 3x3 neighbourhood, then `iterations` rounds
/// of localized k-means in (L, a, b, x, y) space with
///
///     D^2 = d_lab^2 + (d_xy / S)^2 * m^2,
///
/// each center scanning a window of half-width S around itself. Ties go to the
/// lower center index. Components smaller than min_region_fraction * W*H/q
/// are folded into their largest neighbour.
inline SuperpixelGrid slic_segment(const Image& image, const SlicParams& params) {
  if (image.empty()) throw DimensionError("cannot segment an empty image");
  params.validate(image);

  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.pixel_count();
  const std::vector<float> feat = color::lab_features(image);

  const detail::SeedLayout layout = detail::seed_layout(w, h, params.superpixels);
  const double step_x = double(w) / layout.nx;
  const double step_y = double(h) / layout.ny;
  // Half-width of the search window. Equals S except when rounding the
  // layout made the seed spacing wider than S, where it keeps full coverage.
  const double radius = std::max({layout.step, step_x, step_y});

  std::vector<detail::SlicCenter> centers;
  centers.reserve(std::size_t(layout.nx) * std::size_t(layout.ny));
  for (int j = 0; j < layout.ny; ++j) {
    for (int i = 0; i < layout.nx; ++i) {
      const int sx = std::min(w - 1, int((i + 0.5) * step_x));
      const int sy = std::min(h - 1, int((j + 0.5) * step_y));
      int bx = sx;
      int by = sy;
      float best = detail::squared_gradient(feat, w, h, sx, sy);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = sx + dx;
          const int y = sy + dy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const float g = detail::squared_gradient(feat, w, h, x, y);
          if (g < best) {
            best = g;
            bx = x;
            by = y;
          }
        }
      }
      const float* f = &feat[(std::size_t(by) * std::size_t(w) + std::size_t(bx)) * 3];
      centers.push_back({f[0], f[1], f[2], float(bx + 0.5), float(by + 0.5)});
    }
  }

  // Initial assignment: the seed cell containing the pixel.
  std::vector<Label> labels(n);
  for (int y = 0; y < h; ++y) {
    const int cj = std::min(layout.ny - 1, int(y / step_y));
    for (int x = 0; x < w; ++x) {
      const int ci = std::min(layout.nx - 1, int(x / step_x));
      labels[std::size_t(y) * std::size_t(w) + std::size_t(x)] = Label(cj * layout.nx + ci);
    }
  }

  const float spatial_weight = float((params.compactness * params.compactness) / (layout.step * layout.step));
  std::vector<float> dist(n);
  struct Accum {
    double l = 0, a = 0, b = 0, x = 0, y = 0;
    std::size_t count = 0;
  };
  std::vector<Accum> acc(centers.size());

  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<float>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& c = centers[k];
      const int x0 = std::max(0, int(std::floor(c.x - radius)));
      const int x1 = std::min(w, int(std::ceil(c.x + radius)));
      const int y0 = std::max(0, int(std::floor(c.y - radius)));
      const int y1 = std::min(h, int(std::ceil(c.y + radius)));
      for (int y = y0; y < y1; ++y) {
        const float dy = float(y) + 0.5f - c.y;
        std::size_t p = std::size_t(y) * std::size_t(w) + std::size_t(x0);
        for (int x = x0; x < x1; ++x, ++p) {
          const float* f = &feat[3 * p];
          const float dl = f[0] - c.l;
          const float da = f[1] - c.a;
          const float db = f[2] - c.b;
          const float dx = float(x) + 0.5f - c.x;
          const float d = dl * dl + da * da + db * db + (dx * dx + dy * dy) * spatial_weight;
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = Label(k);
          }
        }
      }
    }

    std::fill(acc.begin(), acc.end(), Accum{});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t p = std::size_t(y) * std::size_t(w) + std::size_t(x);
        auto& a = acc[labels[p]];
        a.l += feat[3 * p];
        a.a += feat[3 * p + 1];
        a.b += feat[3 * p + 2];
        a.x += x + 0.5;
        a.y += y + 0.5;
        ++a.count;
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& a = acc[k];
      if (a.count == 0) continue;
      const double inv = 1.0 / double(a.count);
      centers[k] = {float(a.l * inv), float(a.a * inv), float(a.b * inv), float(a.x * inv), float(a.y * inv)};
    }
  }

  const double min_size = params.min_region_fraction * double(n) / double(params.superpixels);
  return SuperpixelGrid(w, h, detail::enforce_connectivity(labels, w, h, min_size));
}

/// Population standard deviation of superpixel areas divided by their mean.
inline double relative_size_dispersion(const SuperpixelGrid& grid) {
  const auto areas = grid.areas();
  if (areas.empty()) return 0.0;
  const double mean = double(grid.pixel_count()) / double(areas.size());
  double var = 0.0;
  for (auto a : areas) var += (double(a) - mean) * (double(a) - mean);
  var /= double(areas.size());
  return std::sqrt(var) / mean;
}

}  // namespace sgm
