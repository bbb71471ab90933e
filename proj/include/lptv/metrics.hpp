#pragma once

#include <cmath>
#include <limits>

#include "lptv/core.hpp"

namespace lptv {

struct MetricReport {
  double psnr_db;
  double ssim;
};

template <typename Scalar>
Scalar mean_squared_error(const ImageGrid<Scalar>& a, const ImageGrid<Scalar>& b) {
  detail::require_same_shape(a.height(), a.width(), b.height(), b.width(), "mean_squared_error");
  return (a.pixels() - b.pixels()).square().mean();
}

/// 10 log10(peak^2 / MSE); +inf for identical inputs.
template <typename Scalar>
Scalar psnr(const ImageGrid<Scalar>& a, const ImageGrid<Scalar>& b, Scalar peak = Scalar(255)) {
  const Scalar mse = mean_squared_error(a, b);
  if (mse == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return Scalar(10) * std::log10(peak * peak / mse);
}

namespace detail {

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gaussian_window_1d(Index size, Scalar sigma) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> w(size);
  const Scalar c = Scalar(size / 2);
  for (Index i = 0; i < size; ++i) {
    const Scalar d = Scalar(i) - c;
    w(i) = std::exp(-d * d / (Scalar(2) * sigma * sigma));
  }
  return w / w.sum();
}

/// Separable "valid" correlation: output is (H - n + 1) x (W - n + 1).
template <typename Scalar>
Raster<Scalar> filter_valid(const Raster<Scalar>& img,
                            const Eigen::Array<Scalar, Eigen::Dynamic, 1>& win) {
  const Index n = win.size();
  const Index oh = img.rows() - n + 1, ow = img.cols() - n + 1;
  Raster<Scalar> rows = Raster<Scalar>::Zero(img.rows(), ow);
  for (Index k = 0; k < n; ++k) rows += win(k) * img.middleCols(k, ow);
  Raster<Scalar> out = Raster<Scalar>::Zero(oh, ow);
  for (Index k = 0; k < n; ++k) out += win(k) * rows.middleRows(k, oh);
  return out;
}

}  // namespace detail

/// Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) windows, K1 = 0.01, K2 = 0.03.
template <typename Scalar>
Scalar ssim(const ImageGrid<Scalar>& a, const ImageGrid<Scalar>& b, Scalar peak = Scalar(255)) {
  constexpr Index kWindow = 11;
  detail::require_same_shape(a.height(), a.width(), b.height(), b.width(), "ssim");
  if (a.height() < kWindow || a.width() < kWindow) {
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  }
  const auto win = detail::gaussian_window_1d<Scalar>(kWindow, Scalar(1.5));
  const Scalar c1 = (Scalar(0.01) * peak) * (Scalar(0.01) * peak);
  const Scalar c2 = (Scalar(0.03) * peak) * (Scalar(0.03) * peak);

  const Raster<Scalar>& x = a.pixels();
  const Raster<Scalar>& y = b.pixels();
  const Raster<Scalar> mu_x = detail::filter_valid<Scalar>(x, win);
  const Raster<Scalar> mu_y = detail::filter_valid<Scalar>(y, win);
  const Raster<Scalar> sxx = detail::filter_valid<Scalar>(x.square(), win) - mu_x.square();
  const Raster<Scalar> syy = detail::filter_valid<Scalar>(y.square(), win) - mu_y.square();
  const Raster<Scalar> sxy = detail::filter_valid<Scalar>(x * y, win) - mu_x * mu_y;

  const Raster<Scalar> num = (Scalar(2) * mu_x * mu_y + c1) * (Scalar(2) * sxy + c2);
  const Raster<Scalar> den = (mu_x.square() + mu_y.square() + c1) * (sxx + syy + c2);
  return (num / den).mean();
}

/// PSNR and SSIM of `estimate` against `truth`, after clamping the estimate to [0, peak].
template <typename Scalar>
MetricReport evaluate(const ImageGrid<Scalar>& estimate, const ImageGrid<Scalar>& truth,
                      Scalar peak = Scalar(255)) {
  const ImageGrid<Scalar> clamped = clamp_intensity(estimate, Scalar(0), peak);
  return {static_cast<double>(psnr(clamped, truth, peak)),
          static_cast<double>(ssim(clamped, truth, peak))};
}

}  // namespace lptv
