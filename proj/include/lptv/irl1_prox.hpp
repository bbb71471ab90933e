#pragma once

// One reweighted-l1 step for the l_p penalty, solved in closed form.
//
// The weight p (|v| + eps)^(p-1) linearizes |z|^p at v; folded into lambda it
// gives a per-entry soft threshold tau(v) = p lambda / (|v| + eps)^(1-p).

#include <cmath>
#include <string>

#include "lptv/core.hpp"

namespace lptv {

template <typename Scalar>
struct PenaltyParams {
  Scalar p{Scalar(0.1)};
  Scalar lambda{Scalar(1)};
  Scalar epsilon{Scalar(1e-8)};

  void validate() const {
    if (!(p > Scalar(0) && p <= Scalar(1))) {
      throw std::invalid_argument("PenaltyParams: p must lie in (0, 1], got " +
                                  std::to_string(static_cast<double>(p)));
    }
    if (!(lambda >= Scalar(0)) || !std::isfinite(static_cast<double>(lambda))) {
      throw std::invalid_argument("PenaltyParams: lambda must be nonnegative and finite");
    }
    if (!(epsilon > Scalar(0)) || !std::isfinite(static_cast<double>(epsilon))) {
      throw std::invalid_argument("PenaltyParams: epsilon must be positive and finite");
    }
  }
};

template <typename Scalar>
inline Scalar irl1_threshold(Scalar vbar, const PenaltyParams<Scalar>& params) {
  using std::abs;
  using std::pow;
  if (params.p == Scalar(1)) return params.lambda;
  return params.p * params.lambda / pow(abs(vbar) + params.epsilon, Scalar(1) - params.p);
}

/// sgn(v) max(0, |v| - tau(v)); the weight is taken at the point being shrunk.
template <typename Scalar>
inline Scalar shrink_scalar(Scalar vbar, const PenaltyParams<Scalar>& params) {
  using std::abs;
  const Scalar mag = abs(vbar) - irl1_threshold(vbar, params);
  if (mag <= Scalar(0)) return Scalar(0);
  return vbar < Scalar(0) ? -mag : mag;
}

namespace detail {

/// Magnitude below which shrink_scalar is certainly zero.
///
/// |v| - tau(v) is increasing in |v|, so the zero set is an interval [0, a*]
/// with a* (a* + eps)^(1-p) = p lambda. Bisection brackets a*; the returned value
/// sits a relative 1e-9 inside it so the fast path never disagrees with the
/// exact formula.
template <typename Scalar>
Scalar zero_cutoff(const PenaltyParams<Scalar>& params) {
  using std::pow;
  const Scalar target = params.p * params.lambda;
  if (!(target > Scalar(0))) return Scalar(0);
  if (params.p == Scalar(1)) return params.lambda * Scalar(1 - 1e-9);
  Scalar lo = Scalar(0);
  Scalar hi = pow(target, Scalar(1) / (Scalar(2) - params.p));
  for (int it = 0; it < 200 && hi - lo > hi * Scalar(1e-14); ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (mid * pow(mid + params.epsilon, Scalar(1) - params.p) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo * Scalar(1 - 1e-9);
}

template <typename Scalar>
void shrink(const Raster<Scalar>& in, Raster<Scalar>& out, const PenaltyParams<Scalar>& params) {
  using std::abs;
  const Scalar cutoff = zero_cutoff(params);
  out = in.unaryExpr([&params, cutoff](Scalar v) {
    return abs(v) < cutoff ? Scalar(0) : shrink_scalar(v, params);
  });
}

}  // namespace detail

template <typename Scalar>
GradientField<Scalar> shrink_field(const GradientField<Scalar>& vbar,
                                   const PenaltyParams<Scalar>& params) {
  params.validate();
  Raster<Scalar> dx, dy;
  detail::shrink(vbar.dx(), dx, params);
  detail::shrink(vbar.dy(), dy, params);
  return GradientField<Scalar>(std::move(dx), std::move(dy));
}

}  // namespace lptv
