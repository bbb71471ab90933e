#pragma once

// Synthetic test problems: f = K u + n with white Gaussian n calibrated to a
// blurred-signal-to-noise ratio (BSNR).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>

#include "lptv/core.hpp"
#include "lptv/spectral.hpp"

namespace lptv {

/// Standard normal variates from mt19937_64 via the Box-Muller transform.
///
/// Fully specified by the C++ standard (engine) plus the transform below, so a
/// seed reproduces the same stream on every conforming platform, unlike
/// std::normal_distribution.
class NormalStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+box-muller/v1";

  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double kScale = 0x1.0p-53;
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * kScale;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * kScale;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <typename Scalar>
struct DegradationSpec {
  BlurKernel<Scalar> kernel;
  Scalar bsnr_db;
  std::uint64_t seed;
};

template <typename Scalar>
struct Degraded {
  ImageGrid<Scalar> observed;
  ImageGrid<Scalar> blurred;
  Scalar sigma;
};

namespace detail {

template <typename Scalar>
Scalar centered_power(const Raster<Scalar>& a) {
  return (a - a.mean()).square().mean();
}

}  // namespace detail

/// sigma with sigma^2 = Var(blurred) / 10^(bsnr/10).
template <typename Scalar>
Scalar bsnr_noise_sigma(const ImageGrid<Scalar>& blurred, Scalar bsnr_db) {
  if (!std::isfinite(static_cast<double>(bsnr_db))) {
    throw std::invalid_argument("bsnr_noise_sigma: BSNR must be finite");
  }
  const Scalar var = detail::centered_power(blurred.pixels());
  // FFT round-off leaves a flat image with variance near machine precision.
  const Scalar floor = Scalar(1e-10) * std::max(Scalar(1), blurred.pixels().abs().maxCoeff());
  if (!(var > floor * floor)) {
    throw std::invalid_argument("bsnr_noise_sigma: blurred image is constant");
  }
  return std::sqrt(var / std::pow(Scalar(10), bsnr_db / Scalar(10)));
}

/// 10 log10(Var(blurred) / mean(noise^2)).
template <typename Scalar>
Scalar compute_bsnr(const ImageGrid<Scalar>& blurred, const ImageGrid<Scalar>& noise) {
  detail::require_same_shape(blurred.height(), blurred.width(), noise.height(), noise.width(),
                             "compute_bsnr");
  const Scalar noise_power = noise.pixels().square().mean();
  if (!(noise_power > Scalar(0))) throw std::invalid_argument("compute_bsnr: zero noise");
  return Scalar(10) * std::log10(detail::centered_power(blurred.pixels()) / noise_power);
}

/// Blurs `truth` with the cached PSF and adds seeded Gaussian noise. No clamping.
template <typename Scalar>
Degraded<Scalar> degrade(const ImageGrid<Scalar>& truth, const DegradationSpec<Scalar>& spec,
                         const SpectralCache<Scalar>& cache) {
  ImageGrid<Scalar> blurred = blur_periodic(truth, cache);
  const Scalar sigma = bsnr_noise_sigma(blurred, spec.bsnr_db);
  NormalStream noise(spec.seed);
  Raster<Scalar> observed = blurred.pixels();
  for (Index i = 0; i < observed.rows(); ++i) {
    for (Index j = 0; j < observed.cols(); ++j) {
      observed(i, j) += sigma * static_cast<Scalar>(noise.next());
    }
  }
  return {ImageGrid<Scalar>(std::move(observed)), std::move(blurred), sigma};
}

}  // namespace lptv
