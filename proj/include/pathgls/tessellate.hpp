#pragma once

#include <vector>

#include "pathgls/image.hpp"

namespace pathgls {

struct Patch {
  Image tile;
  int x = 0;  // pixel offset of the tile's left edge in the source image
  int y = 0;
};

struct PatchBag {
  std::vector<Patch> patches;  // row-major, deterministic order
  int patch_size = 0;
  int stride = 0;
  int source_width = 0;
  int source_height = 0;

  std::size_t size() const { return patches.size(); }
};

// Sliding-window extraction. Positions run over x in {0, stride, ...} with
// x + patch_size <= width (same for y); trailing margins are dropped.
PatchBag tessellate(const Image& image, int patch_size, int stride);

// Keeps tiles whose fraction of pixels with HSV saturation above
// saturation_threshold is at least min_tissue_fraction. Never returns an
// empty bag: if everything is filtered, the single highest-tissue tile
// survives.
PatchBag filter_background(const PatchBag& bag, double saturation_threshold,
                           double min_tissue_fraction);

// Fraction of tile pixels whose HSV saturation exceeds the threshold.
double tissue_fraction(const Image& tile, double saturation_threshold);

}  // namespace pathgls
