#include "pathgls/stain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pathgls/error.hpp"
#include "pathgls/rng.hpp"

namespace pathgls {

OdImage rgb_to_od(const Image& image, double i0) {
  require(i0 > 0.0, "invalid-I0", "incident intensity must be positive");
  require(!image.empty(), "image-empty", "cannot convert empty image");
  OdImage od;
  od.width = image.width;
  od.height = image.height;
  od.values.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double intensity = static_cast<double>(image.pixels[i]);
    od.values[i] = std::max(0.0, -std::log10((intensity + 1.0) / i0));
  }
  return od;
}

Image od_to_rgb(const OdImage& od, double i0) {
  require(i0 > 0.0, "invalid-I0", "incident intensity must be positive");
  Image image;
  image.width = od.width;
  image.height = od.height;
  image.pixels.resize(od.values.size());
  for (std::size_t i = 0; i < od.values.size(); ++i) {
    const double intensity = i0 * std::pow(10.0, -od.values[i]) - 1.0;
    image.pixels[i] =
        static_cast<std::uint8_t>(std::llround(std::clamp(intensity, 0.0, i0)));
  }
  return image;
}

namespace {

double percentile(std::vector<double> sorted_copy, double pct) {
  std::sort(sorted_copy.begin(), sorted_copy.end());
  const double pos = pct / 100.0 * static_cast<double>(sorted_copy.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted_copy.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_copy[lo] * (1.0 - frac) + sorted_copy[hi] * frac;
}

std::array<double, 3> direction_from_angle(const Eigen::Vector3d& e1, const Eigen::Vector3d& e2,
                                           double phi) {
  Eigen::Vector3d v = std::cos(phi) * e1 + std::sin(phi) * e2;
  if (v.sum() < 0.0) v = -v;
  // Clamp the tiny negative components the plane projection can leave.
  for (int c = 0; c < 3; ++c) v[c] = std::max(0.0, v[c]);
  const double norm = v.norm();
  require(norm > 1e-12, "degenerate-plane", "stain direction collapsed to zero");
  v /= norm;
  return {v[0], v[1], v[2]};
}

}  // namespace

StainModel estimate_stain_model(const OdImage& od, double alpha_percentile, double beta_od,
                                double i0) {
  // Tissue pixels: every channel above the OD floor.
  std::vector<Eigen::Vector3d> tissue;
  tissue.reserve(od.pixel_count());
  for (std::size_t i = 0; i < od.pixel_count(); ++i) {
    const double* p = od.values.data() + 3 * i;
    if (p[0] > beta_od && p[1] > beta_od && p[2] > beta_od) {
      tissue.emplace_back(p[0], p[1], p[2]);
    }
  }
  require(tissue.size() >= 2, "insufficient-tissue",
          "only " + std::to_string(tissue.size()) + " pixels above the OD threshold");

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : tissue) mean += v;
  mean /= static_cast<double>(tissue.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& v : tissue) {
    const Eigen::Vector3d d = v - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(tissue.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  require(solver.info() == Eigen::Success, "degenerate-plane", "eigendecomposition failed");
  // Eigenvalues ascending: the plane is spanned by the top two eigenvectors.
  require(solver.eigenvalues()[1] >= 1e-8, "degenerate-plane",
          "second OD eigenvalue below 1e-8 (single-stain input)");
  Eigen::Vector3d e1 = solver.eigenvectors().col(2);
  Eigen::Vector3d e2 = solver.eigenvectors().col(1);
  // Deterministic orientation: bulk of projections on the positive e1 side,
  // e2 signed so the mean angle is reproducible.
  double s1 = 0.0, s2 = 0.0;
  for (const auto& v : tissue) {
    s1 += e1.dot(v);
    s2 += e2.dot(v);
  }
  if (s1 < 0.0) e1 = -e1;
  if (s2 < 0.0) e2 = -e2;

  std::vector<double> angles;
  angles.reserve(tissue.size());
  for (const auto& v : tissue) angles.push_back(std::atan2(e2.dot(v), e1.dot(v)));

  const double phi_lo = percentile(angles, alpha_percentile);
  const double phi_hi = percentile(angles, 100.0 - alpha_percentile);

  StainModel model;
  model.i0 = i0;
  auto a = direction_from_angle(e1, e2, phi_lo);
  auto b = direction_from_angle(e1, e2, phi_hi);
  // Hematoxylin-like column first: larger blue-channel OD component.
  if (a[2] >= b[2]) {
    model.stains = {a, b};
  } else {
    model.stains = {b, a};
  }

  const auto conc = compute_concentrations(od, model);
  std::vector<double> c0, c1;
  c0.reserve(od.pixel_count());
  c1.reserve(od.pixel_count());
  for (std::size_t i = 0; i < od.pixel_count(); ++i) {
    c0.push_back(conc[2 * i]);
    c1.push_back(conc[2 * i + 1]);
  }
  model.max_concentrations = {percentile(c0, 99.0), percentile(c1, 99.0)};
  return model;
}

std::vector<double> compute_concentrations(const OdImage& od, const StainModel& model) {
  Eigen::Matrix<double, 3, 2> s;
  for (int k = 0; k < 2; ++k) {
    for (int c = 0; c < 3; ++c) s(c, k) = model.stains[k][c];
  }
  const Eigen::Matrix2d gram = s.transpose() * s;
  require(std::fabs(gram.determinant()) > 1e-12, "degenerate-plane",
          "stain columns are nearly parallel");
  const Eigen::Matrix<double, 2, 3> solve = gram.inverse() * s.transpose();

  std::vector<double> conc(od.pixel_count() * 2);
  for (std::size_t i = 0; i < od.pixel_count(); ++i) {
    const Eigen::Vector3d pixel(od.values[3 * i], od.values[3 * i + 1], od.values[3 * i + 2]);
    const Eigen::Vector2d c = solve * pixel;
    conc[2 * i] = std::max(0.0, c[0]);
    conc[2 * i + 1] = std::max(0.0, c[1]);
  }
  return conc;
}

Image perturb_stains(const Image& image, const PerturbationSpec& spec, double alpha_percentile,
                     double beta_od, double i0) {
  require(spec.alpha_sigma >= 0.0 && spec.beta_sigma >= 0.0, "invalid-sigma",
          "jitter scales must be non-negative");
  const OdImage od = rgb_to_od(image, i0);
  const StainModel model = estimate_stain_model(od, alpha_percentile, beta_od, i0);
  std::vector<double> conc = compute_concentrations(od, model);

  // One (eps, delta) draw per stain channel, before any per-pixel work, so
  // determinism does not depend on scheduling.
  Rng rng(spec.seed);
  double eps[2], delta[2];
  for (int k = 0; k < 2; ++k) eps[k] = rng.next_gaussian() * spec.alpha_sigma;
  for (int k = 0; k < 2; ++k) delta[k] = rng.next_gaussian() * spec.beta_sigma;

  OdImage out;
  out.width = od.width;
  out.height = od.height;
  out.values.assign(od.values.size(), 0.0);
  for (std::size_t i = 0; i < od.pixel_count(); ++i) {
    double c[2];
    for (int k = 0; k < 2; ++k) {
      c[k] = std::max(0.0, conc[2 * i + k] * (1.0 + eps[k]) + delta[k]);
    }
    for (int ch = 0; ch < 3; ++ch) {
      out.values[3 * i + ch] = model.stains[0][ch] * c[0] + model.stains[1][ch] * c[1];
    }
  }
  return od_to_rgb(out, i0);
}

}  // namespace pathgls
