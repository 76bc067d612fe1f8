#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pathgls/image.hpp"

namespace pathgls {

// Per-pixel optical density triples, same ordering as the source image.
struct OdImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // 3 per pixel

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Two-stain color model in OD space. Columns are unit, non-negative and
// ordered hematoxylin-first (largest blue OD component).
struct StainModel {
  std::array<std::array<double, 3>, 2> stains;  // stains[k] is column k
  std::array<double, 2> max_concentrations = {0.0, 0.0};  // 99th percentile per stain
  double i0 = 255.0;
};

struct PerturbationSpec {
  double alpha_sigma = 0.0;  // multiplicative concentration jitter scale
  double beta_sigma = 0.0;   // additive jitter scale (OD units)
  std::uint64_t seed = 0;
};

// OD = -log10((I + 1) / I0), clamped at 0. The +1 guards log(0).
OdImage rgb_to_od(const Image& image, double i0 = 255.0);

// Inverse of rgb_to_od, with intensities clamped to [0, I0].
Image od_to_rgb(const OdImage& od, double i0 = 255.0);

// Macenko estimation: principal OD plane of above-threshold pixels, robust
// angular percentiles for the stain directions.
StainModel estimate_stain_model(const OdImage& od, double alpha_percentile = 1.0,
                                double beta_od = 0.15, double i0 = 255.0);

// Least-squares unmixing (normal equations) clamped at zero.
// Returns 2 values per pixel, stain-major per pixel.
std::vector<double> compute_concentrations(const OdImage& od, const StainModel& model);

// Reconstruct pixels from concentrations jittered once per stain channel:
// C'_k = C_k * (1 + eps_k) + delta_k with eps ~ N(0, alpha_sigma),
// delta ~ N(0, beta_sigma) drawn from the portable generator.
Image perturb_stains(const Image& image, const PerturbationSpec& spec, double alpha_percentile = 1.0,
                     double beta_od = 0.15, double i0 = 255.0);

}  // namespace pathgls
