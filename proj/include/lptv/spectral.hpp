#pragma once

// Periodic-boundary linear operators: PSF synthesis, circular blur, forward
// differences and their adjoint, and the Fourier-diagonal solve of
//   (K^T K + beta D^T D) u = K^T f + beta D^T z.

#include <cmath>
#include <numbers>
#include <string>

#include "lptv/core.hpp"
#include "lptv/fft2.hpp"

namespace lptv {

/// Normalized isotropic Gaussian PSF on a size x size grid.
template <typename Scalar>
BlurKernel<Scalar> gaussian_kernel(Index size, Scalar sigma) {
  if (size <= 0 || size % 2 == 0) {
    throw std::invalid_argument("gaussian_kernel: size must be odd and positive, got " +
                                std::to_string(size));
  }
  if (!(sigma > Scalar(0)) || !std::isfinite(static_cast<double>(sigma))) {
    throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  }
  const Index c = size / 2;
  Raster<Scalar> taps(size, size);
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) {
      const Scalar r2 = Scalar((i - c) * (i - c) + (j - c) * (j - c));
      taps(i, j) = std::exp(-r2 / (Scalar(2) * sigma * sigma));
    }
  }
  taps /= taps.sum();
  return BlurKernel<Scalar>(std::move(taps), sigma);
}

// ---------------------------------------------------------------------------
// Forward differences, periodic boundary.

namespace detail {

template <typename Scalar>
void grad_forward(const Raster<Scalar>& u, Raster<Scalar>& dx, Raster<Scalar>& dy) {
  const Index h = u.rows(), w = u.cols();
  dx.resize(h, w);
  dy.resize(h, w);
  dx.leftCols(w - 1) = u.rightCols(w - 1) - u.leftCols(w - 1);
  dx.col(w - 1) = u.col(0) - u.col(w - 1);
  dy.topRows(h - 1) = u.bottomRows(h - 1) - u.topRows(h - 1);
  dy.row(h - 1) = u.row(0) - u.row(h - 1);
}

/// D^T z = Dx^T dx + Dy^T dy, i.e. the negative backward divergence.
template <typename Scalar>
void grad_adjoint(const Raster<Scalar>& dx, const Raster<Scalar>& dy, Raster<Scalar>& out) {
  const Index h = dx.rows(), w = dx.cols();
  out.resize(h, w);
  out.col(0) = dx.col(w - 1) - dx.col(0);
  out.rightCols(w - 1) = dx.leftCols(w - 1) - dx.rightCols(w - 1);
  out.row(0) += dy.row(h - 1) - dy.row(0);
  out.bottomRows(h - 1) += dy.topRows(h - 1) - dy.bottomRows(h - 1);
}

}  // namespace detail

template <typename Scalar>
GradientField<Scalar> grad_forward(const ImageGrid<Scalar>& img) {
  Raster<Scalar> dx, dy;
  detail::grad_forward(img.pixels(), dx, dy);
  return GradientField<Scalar>(std::move(dx), std::move(dy));
}

template <typename Scalar>
ImageGrid<Scalar> grad_adjoint(const GradientField<Scalar>& field) {
  if (field.height() < 2 || field.width() < 2) {
    throw std::invalid_argument("grad_adjoint: field must be at least 2x2");
  }
  Raster<Scalar> out;
  detail::grad_adjoint(field.dx(), field.dy(), out);
  return ImageGrid<Scalar>(std::move(out));
}

// ---------------------------------------------------------------------------

/// Frequency responses of K, Dx, Dy on an H x W periodic grid. Immutable.
template <typename Scalar>
class SpectralCache {
 public:
  Index height() const noexcept { return khat_.rows(); }
  Index width() const noexcept { return khat_.cols(); }

  const ComplexRaster<Scalar>& khat() const noexcept { return khat_; }
  const ComplexRaster<Scalar>& dxhat() const noexcept { return dxhat_; }
  const ComplexRaster<Scalar>& dyhat() const noexcept { return dyhat_; }
  /// |khat|^2
  const Raster<Scalar>& denom_base() const noexcept { return denom_base_; }
  /// |dxhat|^2 + |dyhat|^2
  const Raster<Scalar>& lap_spec() const noexcept { return lap_spec_; }
  const BlurKernel<Scalar>& kernel() const noexcept { return kernel_; }

  template <typename S>
  friend SpectralCache<S> build_spectral_cache(const BlurKernel<S>&, Index, Index);

 private:
  explicit SpectralCache(BlurKernel<Scalar> kernel) : kernel_(std::move(kernel)) {}

  BlurKernel<Scalar> kernel_;
  ComplexRaster<Scalar> khat_, dxhat_, dyhat_;
  Raster<Scalar> denom_base_, lap_spec_;
};

/// Zero-pads the PSF to height x width with its center moved to (0, 0), so the
/// circular convolution is phase-correct, and precomputes every spectrum.
template <typename Scalar>
SpectralCache<Scalar> build_spectral_cache(const BlurKernel<Scalar>& kernel, Index height,
                                           Index width) {
  if (height < 2 || width < 2) throw std::invalid_argument("build_spectral_cache: grid too small");
  if (kernel.size() > std::min(height, width)) {
    throw std::invalid_argument("build_spectral_cache: kernel (" + std::to_string(kernel.size()) +
                                ") larger than image (" + std::to_string(height) + "x" +
                                std::to_string(width) + ")");
  }
  SpectralCache<Scalar> cache(kernel);

  const Index ks = kernel.size(), c = kernel.center();
  Raster<Scalar> psf = Raster<Scalar>::Zero(height, width);
  for (Index i = 0; i < ks; ++i) {
    for (Index j = 0; j < ks; ++j) {
      psf((i - c + height) % height, (j - c + width) % width) += kernel.taps()(i, j);
    }
  }
  Fft2<Scalar> fft;
  cache.khat_ = fft.forward(psf);

  // dx(j) = u(j+1) - u(j) has response exp(+2 pi i l / W) - 1 under the forward DFT.
  using Complex = std::complex<Scalar>;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  cache.dxhat_.resize(height, width);
  cache.dyhat_.resize(height, width);
  for (Index k = 0; k < height; ++k) {
    const Complex ey = std::polar(Scalar(1), two_pi * Scalar(k) / Scalar(height)) - Scalar(1);
    for (Index l = 0; l < width; ++l) {
      cache.dxhat_(k, l) = std::polar(Scalar(1), two_pi * Scalar(l) / Scalar(width)) - Scalar(1);
      cache.dyhat_(k, l) = ey;
    }
  }
  cache.denom_base_ = cache.khat_.abs2();
  cache.lap_spec_ = cache.dxhat_.abs2() + cache.dyhat_.abs2();
  cache.lap_spec_(0, 0) = Scalar(0);
  return cache;
}

namespace detail {

/// Multiplies the spectrum of `img` by `response` (or its conjugate) and inverts.
template <typename Scalar>
Raster<Scalar> apply_spectral(const Raster<Scalar>& img, const ComplexRaster<Scalar>& response,
                              bool adjoint) {
  Fft2<Scalar> fft;
  ComplexRaster<Scalar> spec;
  fft.forward_half(img, spec);
  const auto half = response.leftCols(spec.cols());
  if (adjoint) {
    spec *= half.conjugate();
  } else {
    spec *= half;
  }
  Raster<Scalar> out;
  fft.inverse_half(spec, img.cols(), out);
  return out;
}

}  // namespace detail

/// K u, circular convolution with the cached PSF.
template <typename Scalar>
ImageGrid<Scalar> blur_periodic(const ImageGrid<Scalar>& img, const SpectralCache<Scalar>& cache) {
  detail::require_same_shape(img.height(), img.width(), cache.height(), cache.width(),
                             "blur_periodic");
  return ImageGrid<Scalar>(detail::apply_spectral(img.pixels(), cache.khat(), false));
}

/// K^T u, circular correlation with the cached PSF.
template <typename Scalar>
ImageGrid<Scalar> blur_adjoint(const ImageGrid<Scalar>& img, const SpectralCache<Scalar>& cache) {
  detail::require_same_shape(img.height(), img.width(), cache.height(), cache.width(),
                             "blur_adjoint");
  return ImageGrid<Scalar>(detail::apply_spectral(img.pixels(), cache.khat(), true));
}

/// Solver for the u-subproblem with f and beta fixed.
///
/// K^T f is transformed once at construction; each solve costs one forward and
/// one inverse real 2-D FFT on the half spectrum. Owns its FFT plans, so use
/// one instance per thread.
template <typename Scalar>
class NormalEquationSolver {
 public:
  static constexpr double kSingularDenominator = 1e-15;
  static constexpr double kSignalFloor = 1e-12;

  NormalEquationSolver(const SpectralCache<Scalar>& cache, const ImageGrid<Scalar>& f, Scalar beta)
      : beta_(beta), width_(f.width()) {
    if (!(beta > Scalar(0)) || !std::isfinite(static_cast<double>(beta))) {
      throw std::invalid_argument("NormalEquationSolver: beta must be positive and finite");
    }
    detail::require_same_shape(f.height(), f.width(), cache.height(), cache.width(),
                               "NormalEquationSolver");
    fft_.forward_half(f.pixels(), fhat_);
    const Index hw = fhat_.cols();
    khat_ = cache.khat().leftCols(hw);
    ktf_hat_ = fhat_ * khat_.conjugate();
    denom_ = cache.denom_base().leftCols(hw) + beta * cache.lap_spec().leftCols(hw);

    // Parseval weights: interior half-spectrum columns stand for two columns.
    parseval_ = Raster<Scalar>::Constant(1, hw, Scalar(2));
    parseval_(0, 0) = Scalar(1);
    if (width_ % 2 == 0) parseval_(0, hw - 1) = Scalar(1);
  }

  /// Solves for u given z = (dx, dy).
  void solve(const Raster<Scalar>& dx, const Raster<Scalar>& dy, Raster<Scalar>& u) {
    detail::grad_adjoint(dx, dy, div_);
    fft_.forward_half(div_, rhs_);
    rhs_ = ktf_hat_ + beta_ * rhs_;
    const Index h = rhs_.rows(), w = rhs_.cols();
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        const Scalar d = denom_(i, j);
        if (d < Scalar(kSingularDenominator)) {
          if (std::abs(rhs_(i, j)) > Scalar(kSignalFloor)) {
            throw IllPosedError("normal equations singular at frequency (" + std::to_string(i) +
                                ", " + std::to_string(j) + ") with nonzero right-hand side");
          }
          rhs_(i, j) = Scalar(0);
        } else {
          rhs_(i, j) /= d;
        }
      }
    }
    u_hat_ = rhs_;
    fft_.inverse_half(rhs_, width_, u);
  }

  /// 0.5 * ||K u - f||^2 for the most recent solution, by Parseval.
  Scalar last_data_term() const {
    const Scalar n = Scalar(u_hat_.rows() * width_);
    const Raster<Scalar> col_power = (khat_ * u_hat_ - fhat_).abs2().colwise().sum();
    return Scalar(0.5) * (col_power * parseval_).sum() / n;
  }

  Scalar beta() const noexcept { return beta_; }

 private:
  Scalar beta_;
  Index width_;
  Fft2<Scalar> fft_;
  ComplexRaster<Scalar> khat_, fhat_, ktf_hat_, rhs_, u_hat_;
  Raster<Scalar> denom_, div_, parseval_;
};

/// u = (K^T K + beta D^T D)^{-1} (K^T f + beta D^T z).
template <typename Scalar>
ImageGrid<Scalar> solve_u(const GradientField<Scalar>& z, const ImageGrid<Scalar>& f, Scalar beta,
                          const SpectralCache<Scalar>& cache) {
  detail::require_same_shape(z.height(), z.width(), f.height(), f.width(), "solve_u");
  NormalEquationSolver<Scalar> solver(cache, f, beta);
  Raster<Scalar> u;
  solver.solve(z.dx(), z.dy(), u);
  return ImageGrid<Scalar>(std::move(u));
}

}  // namespace lptv
