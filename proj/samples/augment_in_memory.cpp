// SPDX-License-Identifier: Apache-2.0
//
// Builds a small synthetic image, applies the three operators with the same
// grid and selection, and writes the results next to the binary.

#include <cstdio>

#include "sgm/augment.hpp"
#include "sgm/image_io.hpp"

int main() {
  sgm::Image image(160, 120, 3);
  sgm::Image partner(160, 120, 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const bool disc = (x - 80) * (x - 80) + (y - 60) * (y - 60) < 40 * 40;
      image.at(x, y, 0) = disc ? 220 : std::uint8_t(x);
      image.at(x, y, 1) = disc ? 40 : std::uint8_t(y * 2);
      image.at(x, y, 2) = 90;
      partner.at(x, y, 0) = std::uint8_t((x / 10 + y / 10) % 2 ? 30 : 200);
      partner.at(x, y, 1) = partner.at(x, y, 0);
      partner.at(x, y, 2) = 255;
    }
  }

  sgm::AugmentConfig config;
  config.superpixels = 200;
  config.ratio = 0.4;
  config.seed = 7;

  const auto grid = sgm::slic_segment(image, sgm::SlicParams::from(config));
  const auto selection = sgm::select_superpixels(grid, config.ratio, config.seed);
  std::printf("k = %zu, selected = %zu\n", grid.superpixel_count(), selection.selected_count());

  sgm::save_image(sgm::grid_cut(image, grid, selection), "sample_cut.png");
  sgm::save_image(sgm::grid_mean(image, grid, selection), "sample_mean.png");
  sgm::save_image(sgm::grid_mix(image, partner, grid, selection), "sample_mix.png");
  return 0;
}
