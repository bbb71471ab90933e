#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace lptv {

using Index = Eigen::Index;

/// Row-major dense raster; the storage behind every image and gradient component.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ComplexRaster = Raster<std::complex<Scalar>>;

/// Raised when an iterate stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Raised when the normal equations are singular at a frequency carrying signal.
class IllPosedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::ArrayBase<Derived>& a, const char* what) {
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

inline void require_same_shape(Index h0, Index w0, Index h1, Index w1, const char* what) {
  if (h0 != h1 || w0 != w1) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(h0) +
                                "x" + std::to_string(w0) + " vs " + std::to_string(h1) + "x" +
                                std::to_string(w1) + ")");
  }
}

}  // namespace detail

/// Grayscale intensity raster, at least 2x2, all entries finite. Immutable once built.
template <typename Scalar>
class ImageGrid {
 public:
  using scalar_type = Scalar;

  explicit ImageGrid(Raster<Scalar> pixels) : pixels_(std::move(pixels)) {
    if (pixels_.rows() < 2 || pixels_.cols() < 2) {
      throw std::invalid_argument("ImageGrid: need at least 2x2 pixels, got " +
                                  std::to_string(pixels_.rows()) + "x" +
                                  std::to_string(pixels_.cols()));
    }
    detail::require_finite(pixels_, "ImageGrid");
  }

  static ImageGrid constant(Index height, Index width, Scalar value) {
    return ImageGrid(Raster<Scalar>::Constant(height, width, value));
  }

  Index height() const noexcept { return pixels_.rows(); }
  Index width() const noexcept { return pixels_.cols(); }
  Index size() const noexcept { return pixels_.size(); }
  const Raster<Scalar>& pixels() const noexcept { return pixels_; }
  Scalar operator()(Index row, Index col) const { return pixels_(row, col); }

 private:
  Raster<Scalar> pixels_;
};

/// Anisotropic gradient: horizontal (dx) and vertical (dy) components of equal shape.
template <typename Scalar>
class GradientField {
 public:
  using scalar_type = Scalar;

  GradientField(Raster<Scalar> dx, Raster<Scalar> dy) : dx_(std::move(dx)), dy_(std::move(dy)) {
    detail::require_same_shape(dx_.rows(), dx_.cols(), dy_.rows(), dy_.cols(), "GradientField");
    detail::require_finite(dx_, "GradientField dx");
    detail::require_finite(dy_, "GradientField dy");
  }

  static GradientField zero(Index height, Index width) {
    return GradientField(Raster<Scalar>::Zero(height, width), Raster<Scalar>::Zero(height, width));
  }

  Index height() const noexcept { return dx_.rows(); }
  Index width() const noexcept { return dx_.cols(); }
  const Raster<Scalar>& dx() const noexcept { return dx_; }
  const Raster<Scalar>& dy() const noexcept { return dy_; }

 private:
  Raster<Scalar> dx_;
  Raster<Scalar> dy_;
};

template <typename Scalar>
GradientField<Scalar> operator-(const GradientField<Scalar>& field) {
  return GradientField<Scalar>(-field.dx(), -field.dy());
}

/// Square point-spread function with odd support, nonnegative taps summing to one.
template <typename Scalar>
class BlurKernel {
 public:
  using scalar_type = Scalar;

  /// `sigma` is provenance only (0 when the taps were not synthesized from a Gaussian).
  explicit BlurKernel(Raster<Scalar> taps, Scalar sigma = Scalar(0))
      : taps_(std::move(taps)), sigma_(sigma) {
    if (taps_.rows() != taps_.cols()) throw std::invalid_argument("BlurKernel: taps must be square");
    if (taps_.rows() % 2 == 0) throw std::invalid_argument("BlurKernel: size must be odd");
    detail::require_finite(taps_, "BlurKernel");
    if ((taps_ < Scalar(0)).any()) throw std::invalid_argument("BlurKernel: negative tap");
    using std::abs;
    if (abs(taps_.sum() - Scalar(1)) > Scalar(1e-12)) {
      throw std::invalid_argument("BlurKernel: taps must sum to 1");
    }
  }

  Index size() const noexcept { return taps_.rows(); }
  Index center() const noexcept { return taps_.rows() / 2; }
  Scalar sigma() const noexcept { return sigma_; }
  const Raster<Scalar>& taps() const noexcept { return taps_; }

 private:
  Raster<Scalar> taps_;
  Scalar sigma_;
};

/// Identity PSF of the given odd size.
template <typename Scalar>
BlurKernel<Scalar> delta_kernel(Index size = 1) {
  Raster<Scalar> taps = Raster<Scalar>::Zero(size, size);
  taps(size / 2, size / 2) = Scalar(1);
  return BlurKernel<Scalar>(std::move(taps));
}

/// Clamp to [lo, hi]; used wherever an estimate is compared or exported as 8-bit.
template <typename Scalar>
ImageGrid<Scalar> clamp_intensity(const ImageGrid<Scalar>& img, Scalar lo = Scalar(0),
                                  Scalar hi = Scalar(255)) {
  return ImageGrid<Scalar>(img.pixels().max(lo).min(hi));
}

using Image = ImageGrid<double>;
using Gradient = GradientField<double>;
using Kernel = BlurKernel<double>;

}  // namespace lptv
