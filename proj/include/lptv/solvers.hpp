#pragma once

// Quadratic-penalty alternating minimization for
//   min_u 0.5 ||K u - f||^2 + mu ||D u||_p^p,   0 < p <= 1,
// with z ~ D u coupled through (beta / 2) ||z - D u||^2.
//
//   z-step: one reweighted-l1 shrinkage of the current gradient (closed form)
//   u-step: (K^T K + beta D^T D) u = K^T f + beta D^T z, solved spectrally
//
// The accelerated variant extrapolates the z sequence with the Nesterov
// coefficient t_k = (k - 1) / (k + 2).

#include <chrono>
#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lptv/core.hpp"
#include "lptv/irl1_prox.hpp"
#include "lptv/metrics.hpp"
#include "lptv/spectral.hpp"

namespace lptv {

/// Which quantity consumes the extrapolated point y_{k+1}.
enum class AccelVariant {
  /// y_{k+1} replaces z_{k+1} in the u-step.
  ExtrapolateIntoU,
  /// The u-step reads z_{k+1}; the next shrinkage acts on y_k - (beta/L)(y_k - D u_k).
  ExtrapolateIntoProx,
};

enum class Termination { Tolerance, MaxIter };

inline std::string_view to_string(AccelVariant v) {
  return v == AccelVariant::ExtrapolateIntoU ? "extrapolate-into-u" : "extrapolate-into-prox";
}

inline std::string_view to_string(Termination t) {
  return t == Termination::Tolerance ? "tolerance" : "max_iter";
}

inline AccelVariant parse_accel_variant(std::string_view s) {
  if (s == "extrapolate-into-u") return AccelVariant::ExtrapolateIntoU;
  if (s == "extrapolate-into-prox") return AccelVariant::ExtrapolateIntoProx;
  throw std::invalid_argument("unknown acceleration variant: " + std::string(s));
}

template <typename Scalar>
Scalar nesterov_momentum(int k) {
  return Scalar(k - 1) / Scalar(k + 2);
}

struct IterationRecord {
  int k;
  double relative_error;
  double objective;
  std::optional<double> psnr;
  double elapsed_ms;
};

struct ConvergenceTrace {
  std::vector<IterationRecord> records;
  Termination terminated_by = Termination::MaxIter;

  int iterations() const noexcept { return static_cast<int>(records.size()); }
  double final_relative_error() const {
    return records.empty() ? std::nan("") : records.back().relative_error;
  }
  double wall_ms() const { return records.empty() ? 0.0 : records.back().elapsed_ms; }
};

template <typename Scalar>
struct SolverConfig {
  Scalar mu{};
  Scalar beta{};
  Scalar p{Scalar(0.1)};
  Scalar lipschitz{Scalar(1)};
  Scalar epsilon{Scalar(1e-8)};
  Scalar tol{Scalar(1e-8)};
  int max_iter = 1000;
  bool accelerated = false;
  AccelVariant accel_variant = AccelVariant::ExtrapolateIntoU;

  /// Overrides t_k; empty means (k - 1) / (k + 2). Values must lie in [0, 1).
  std::function<Scalar(int)> momentum;
  /// Called after every iteration (logging).
  std::function<void(const IterationRecord&)> observer;

  Scalar lambda() const { return mu / (lipschitz * beta); }

  PenaltyParams<Scalar> penalty() const { return {p, lambda(), epsilon}; }

  void validate() const {
    auto positive = [](Scalar v) { return v > Scalar(0) && std::isfinite(static_cast<double>(v)); };
    if (!(mu >= Scalar(0)) || !std::isfinite(static_cast<double>(mu))) {
      throw std::invalid_argument("SolverConfig: mu must be finite and nonnegative");
    }
    if (!positive(beta)) throw std::invalid_argument("SolverConfig: beta must be positive");
    if (!positive(lipschitz)) throw std::invalid_argument("SolverConfig: lipschitz must be positive");
    if (!positive(tol)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!std::isfinite(static_cast<double>(lambda()))) {
      throw std::invalid_argument("SolverConfig: mu / (L beta) is not finite");
    }
    penalty().validate();
  }
};

template <typename Scalar>
struct SolverResult {
  ImageGrid<Scalar> u;
  ConvergenceTrace trace;
};

/// ||u_prev - u_next|| / ||u_prev||.
template <typename Scalar>
Scalar relative_error(const ImageGrid<Scalar>& u_prev, const ImageGrid<Scalar>& u_next) {
  detail::require_same_shape(u_prev.height(), u_prev.width(), u_next.height(), u_next.width(),
                             "relative_error");
  const Scalar denom = u_prev.pixels().matrix().norm();
  if (!(denom > Scalar(0))) throw std::invalid_argument("relative_error: zero previous iterate");
  return (u_prev.pixels() - u_next.pixels()).matrix().norm() / denom;
}

namespace detail {

template <typename Scalar>
Scalar lp_power_sum(const Raster<Scalar>& a, Scalar p) {
  if (p == Scalar(1)) return a.abs().sum();
  return a.abs().pow(p).sum();
}

}  // namespace detail

/// 0.5 ||K u - f||^2 + mu sum(|dx|^p + |dy|^p).
template <typename Scalar>
Scalar objective(const ImageGrid<Scalar>& u, const ImageGrid<Scalar>& f,
                 const SpectralCache<Scalar>& cache, Scalar mu, Scalar p) {
  detail::require_same_shape(u.height(), u.width(), f.height(), f.width(), "objective");
  const ImageGrid<Scalar> ku = blur_periodic(u, cache);
  const Scalar data = Scalar(0.5) * (ku.pixels() - f.pixels()).square().sum();
  if (mu == Scalar(0)) return data;
  Raster<Scalar> dx, dy;
  detail::grad_forward(u.pixels(), dx, dy);
  return data + mu * (detail::lp_power_sum(dx, p) + detail::lp_power_sum(dy, p));
}

namespace detail {

template <typename Scalar>
SolverResult<Scalar> run_alternating_minimization(const ImageGrid<Scalar>& f,
                                                  const SpectralCache<Scalar>& cache,
                                                  const SolverConfig<Scalar>& cfg,
                                                  const ImageGrid<Scalar>* reference) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  cfg.validate();
  require_same_shape(f.height(), f.width(), cache.height(), cache.width(), "solver");
  if (reference != nullptr) {
    require_same_shape(f.height(), f.width(), reference->height(), reference->width(),
                       "solver reference");
  }
  const PenaltyParams<Scalar> params = cfg.penalty();
  const bool into_prox = cfg.accelerated && cfg.accel_variant == AccelVariant::ExtrapolateIntoProx;
  const Scalar gradient_step = cfg.beta / cfg.lipschitz;

  NormalEquationSolver<Scalar> normal(cache, f, cfg.beta);

  // u_0 = f, z_0 = y_0 = D f.
  Raster<Scalar> u = f.pixels(), u_next;
  Raster<Scalar> gx, gy;
  grad_forward(u, gx, gy);
  Raster<Scalar> zx = gx, zy = gy;
  Raster<Scalar> yx = gx, yy = gy;
  Raster<Scalar> nx, ny, vx, vy;

  ConvergenceTrace trace;
  trace.records.reserve(static_cast<std::size_t>(std::min(cfg.max_iter, 4096)));

  for (int k = 1; k <= cfg.max_iter; ++k) {
    if (into_prox) {
      vx = yx - gradient_step * (yx - gx);
      vy = yy - gradient_step * (yy - gy);
      shrink(vx, nx, params);
      shrink(vy, ny, params);
    } else {
      shrink(gx, nx, params);
      shrink(gy, ny, params);
    }

    const Raster<Scalar>* feed_x = &nx;
    const Raster<Scalar>* feed_y = &ny;
    if (cfg.accelerated) {
      const Scalar t = cfg.momentum ? cfg.momentum(k) : nesterov_momentum<Scalar>(k);
      if (!(t >= Scalar(0) && t < Scalar(1))) {
        throw std::domain_error("momentum coefficient " + std::to_string(static_cast<double>(t)) +
                                " outside [0, 1) at iteration " + std::to_string(k));
      }
      yx = nx + t * (nx - zx);
      yy = ny + t * (ny - zy);
      if (!into_prox) {
        feed_x = &yx;
        feed_y = &yy;
      }
    }

    normal.solve(*feed_x, *feed_y, u_next);
    if (!u_next.allFinite()) {
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(k), k);
    }

    const Scalar prev_norm = u.matrix().norm();
    if (!(prev_norm > Scalar(0))) throw std::invalid_argument("solver: zero previous iterate");
    const Scalar rel = (u_next - u).matrix().norm() / prev_norm;

    zx.swap(nx);
    zy.swap(ny);
    u.swap(u_next);
    grad_forward(u, gx, gy);

    IterationRecord rec;
    rec.k = k;
    rec.relative_error = static_cast<double>(rel);
    rec.objective = static_cast<double>(
        normal.last_data_term() +
        (cfg.mu == Scalar(0) ? Scalar(0) : cfg.mu * (lp_power_sum(gx, cfg.p) + lp_power_sum(gy, cfg.p))));
    if (reference != nullptr) {
      const Scalar mse = (u.max(Scalar(0)).min(Scalar(255)) - reference->pixels()).square().mean();
      rec.psnr = mse == Scalar(0) ? std::numeric_limits<double>::infinity()
                                  : 10.0 * std::log10(255.0 * 255.0 / static_cast<double>(mse));
    }
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (!std::isfinite(rec.objective)) {
      throw DivergenceError("non-finite objective at iteration " + std::to_string(k), k);
    }
    trace.records.push_back(rec);
    if (cfg.observer) cfg.observer(rec);

    if (rel <= cfg.tol) {
      trace.terminated_by = Termination::Tolerance;
      break;
    }
  }
  return {ImageGrid<Scalar>(std::move(u)), std::move(trace)};
}

}  // namespace detail

/// Proximal reweighted-l1 alternating minimization (no momentum).
template <typename Scalar>
SolverResult<Scalar> pirl1_am(const ImageGrid<Scalar>& f, const SpectralCache<Scalar>& cache,
                              const SolverConfig<Scalar>& cfg,
                              const ImageGrid<Scalar>* reference = nullptr) {
  if (cfg.accelerated) throw std::invalid_argument("pirl1_am: config requests acceleration");
  return detail::run_alternating_minimization(f, cache, cfg, reference);
}

/// Nesterov-accelerated variant; see AccelVariant for how y_{k+1} is consumed.
template <typename Scalar>
SolverResult<Scalar> apirl1_am(const ImageGrid<Scalar>& f, const SpectralCache<Scalar>& cache,
                               const SolverConfig<Scalar>& cfg,
                               const ImageGrid<Scalar>* reference = nullptr) {
  if (!cfg.accelerated) throw std::invalid_argument("apirl1_am: config is not accelerated");
  return detail::run_alternating_minimization(f, cache, cfg, reference);
}

/// Dispatches on cfg.accelerated.
template <typename Scalar>
SolverResult<Scalar> deblur(const ImageGrid<Scalar>& f, const SpectralCache<Scalar>& cache,
                            const SolverConfig<Scalar>& cfg,
                            const ImageGrid<Scalar>* reference = nullptr) {
  return cfg.accelerated ? apirl1_am(f, cache, cfg, reference) : pirl1_am(f, cache, cfg, reference);
}

}  // namespace lptv
