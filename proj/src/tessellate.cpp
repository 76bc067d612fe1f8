#include "pathgls/tessellate.hpp"

#include <algorithm>

#include "pathgls/error.hpp"

namespace pathgls {

PatchBag tessellate(const Image& image, int patch_size, int stride) {
  require(patch_size >= 1, "invalid-stride", "patch_size must be >= 1");
  require(stride >= 1, "invalid-stride", "stride must be >= 1");
  require(image.width >= patch_size && image.height >= patch_size, "image-too-small",
          "image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
              " is smaller than patch size " + std::to_string(patch_size));

  PatchBag bag;
  bag.patch_size = patch_size;
  bag.stride = stride;
  bag.source_width = image.width;
  bag.source_height = image.height;

  for (int y = 0; y + patch_size <= image.height; y += stride) {
    for (int x = 0; x + patch_size <= image.width; x += stride) {
      Patch p;
      p.x = x;
      p.y = y;
      p.tile.width = patch_size;
      p.tile.height = patch_size;
      p.tile.pixels.resize(static_cast<std::size_t>(patch_size) * patch_size * 3);
      for (int row = 0; row < patch_size; ++row) {
        const std::uint8_t* src = image.px(x, y + row);
        std::copy(src, src + static_cast<std::size_t>(patch_size) * 3,
                  p.tile.pixels.begin() + static_cast<std::size_t>(row) * patch_size * 3);
      }
      bag.patches.push_back(std::move(p));
    }
  }
  return bag;
}

double tissue_fraction(const Image& tile, double saturation_threshold) {
  const std::size_t npx = static_cast<std::size_t>(tile.width) * tile.height;
  if (npx == 0) return 0.0;
  std::size_t tissue = 0;
  for (std::size_t i = 0; i < npx; ++i) {
    const std::uint8_t r = tile.pixels[3 * i];
    const std::uint8_t g = tile.pixels[3 * i + 1];
    const std::uint8_t b = tile.pixels[3 * i + 2];
    const std::uint8_t maxc = std::max({r, g, b});
    const std::uint8_t minc = std::min({r, g, b});
    const double sat = maxc == 0 ? 0.0 : static_cast<double>(maxc - minc) / maxc;
    if (sat > saturation_threshold) ++tissue;
  }
  return static_cast<double>(tissue) / static_cast<double>(npx);
}

PatchBag filter_background(const PatchBag& bag, double saturation_threshold,
                           double min_tissue_fraction) {
  require(saturation_threshold >= 0.0 && saturation_threshold <= 1.0 &&
              min_tissue_fraction >= 0.0 && min_tissue_fraction <= 1.0,
          "invalid-threshold", "background filter thresholds must lie in [0,1]");

  PatchBag out;
  out.patch_size = bag.patch_size;
  out.stride = bag.stride;
  out.source_width = bag.source_width;
  out.source_height = bag.source_height;

  double best_fraction = -1.0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < bag.patches.size(); ++i) {
    const double frac = tissue_fraction(bag.patches[i].tile, saturation_threshold);
    if (frac > best_fraction) {
      best_fraction = frac;
      best_index = i;
    }
    if (frac >= min_tissue_fraction) out.patches.push_back(bag.patches[i]);
  }
  // Degenerate fallback: keep the single highest-tissue tile.
  if (out.patches.empty() && !bag.patches.empty()) {
    out.patches.push_back(bag.patches[best_index]);
  }
  return out;
}

}  // namespace pathgls
