#pragma once

#include <vector>

#include <unsupported/Eigen/FFT>

#include "lptv/core.hpp"

namespace lptv {

/// Two-dimensional DFT of real rasters, built from Eigen's 1-D FFT.
///
/// The working representation is the half spectrum: H x (W/2 + 1) columns, the
/// rest being fixed by Hermitian symmetry. Forward transforms are unnormalized,
/// inverses carry the 1/(H*W) factor. An instance caches plans and scratch
/// buffers, so it must not be shared across threads.
template <typename Scalar>
class Fft2 {
 public:
  using Complex = std::complex<Scalar>;

  Fft2() { fft_.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum); }

  static Index half_width(Index width) noexcept { return width / 2 + 1; }

  void forward_half(const Raster<Scalar>& in, ComplexRaster<Scalar>& out) {
    const Index h = in.rows(), w = in.cols(), hw = half_width(w);
    out.resize(h, hw);
    row_out_.resize(static_cast<std::size_t>(w));
    for (Index i = 0; i < h; ++i) {
      fft_.fwd(row_out_.data(), in.row(i).data(), w);
      for (Index j = 0; j < hw; ++j) out(i, j) = row_out_[static_cast<std::size_t>(j)];
    }
    columns(out, /*inverse=*/false);
  }

  /// Inverse of a half spectrum; consumes `spectrum` as scratch. Any imaginary
  /// residue (a spectrum that is not exactly Hermitian) is dropped.
  void inverse_half(ComplexRaster<Scalar>& spectrum, Index width, Raster<Scalar>& out) {
    const Index h = spectrum.rows();
    columns(spectrum, true);
    out.resize(h, width);
    for (Index i = 0; i < h; ++i) fft_.inv(out.row(i).data(), spectrum.row(i).data(), width);
  }

  /// Full H x W spectrum.
  ComplexRaster<Scalar> forward(const Raster<Scalar>& in) {
    const Index h = in.rows(), w = in.cols(), hw = half_width(w);
    ComplexRaster<Scalar> half;
    forward_half(in, half);
    ComplexRaster<Scalar> full(h, w);
    full.leftCols(hw) = half;
    for (Index i = 0; i < h; ++i) {
      for (Index j = hw; j < w; ++j) full(i, j) = std::conj(half((h - i) % h, w - j));
    }
    return full;
  }

  /// Real inverse of a full H x W spectrum; only the left half is read.
  Raster<Scalar> inverse_real(const ComplexRaster<Scalar>& spectrum) {
    const Index w = spectrum.cols();
    ComplexRaster<Scalar> half = spectrum.leftCols(half_width(w));
    Raster<Scalar> out;
    inverse_half(half, w, out);
    return out;
  }

 private:
  void columns(ComplexRaster<Scalar>& a, bool inverse) {
    const Index h = a.rows(), w = a.cols();
    col_in_.resize(static_cast<std::size_t>(h));
    col_out_.resize(static_cast<std::size_t>(h));
    for (Index j = 0; j < w; ++j) {
      for (Index i = 0; i < h; ++i) col_in_[static_cast<std::size_t>(i)] = a(i, j);
      if (inverse) {
        fft_.inv(col_out_.data(), col_in_.data(), h);
      } else {
        fft_.fwd(col_out_.data(), col_in_.data(), h);
      }
      for (Index i = 0; i < h; ++i) a(i, j) = col_out_[static_cast<std::size_t>(i)];
    }
  }

  Eigen::FFT<Scalar> fft_;
  std::vector<Complex> row_out_;
  std::vector<Complex> col_in_;
  std::vector<Complex> col_out_;
};

}  // namespace lptv
