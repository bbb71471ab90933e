#pragma once

// The deblurring benchmark: 17x17 Gaussian blur (sigma 7), BSNR 30 and 20,
// Peppers and Cameraman, both solvers, averaged over noise seeds.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lptv/core.hpp"
#include "lptv/metrics.hpp"
#include "lptv/solvers.hpp"

namespace lptv {

inline constexpr Index kBenchmarkKernelSize = 17;
inline constexpr double kBenchmarkKernelSigma = 7.0;

/// Penalty weight used with a given noise level: 0.009 at BSNR 30, 0.01 at BSNR 20.
std::optional<double> default_beta_for_bsnr(double bsnr_db);

struct BenchmarkCell {
  std::string image;  // file stem, e.g. "peppers"
  double bsnr_db;
  double mu;
  double beta;
};

/// The four (image, BSNR) settings with their published mu / beta.
std::vector<BenchmarkCell> benchmark_cells();

/// Looks for <stem>.png or <stem>.pgm in `dir`.
std::optional<std::filesystem::path> find_benchmark_image(const std::filesystem::path& dir,
                                                          const std::string& stem);

struct RunOutcome {
  std::uint64_t seed;
  bool accelerated;
  int iterations;
  Termination terminated_by;
  double final_rel_err;
  MetricReport restored;
  MetricReport degraded;
  double empirical_bsnr;
  double wall_ms;
};

struct AlgorithmSummary {
  bool accelerated;
  std::vector<RunOutcome> runs;

  double mean_psnr() const;
  double mean_ssim() const;
  double mean_iterations() const;
  double mean_seconds() const;
  double stddev_iterations() const;
  double mean_degraded_psnr() const;
  double mean_degraded_ssim() const;
  bool all_converged() const;
};

struct CellResult {
  BenchmarkCell cell;
  AlgorithmSummary accelerated{true, {}};
  AlgorithmSummary plain{false, {}};
};

struct ExperimentOptions {
  int seeds = 10;
  std::uint64_t first_seed = 1;
  double tol = 1e-8;
  int max_iter = 1000;
  AccelVariant accel_variant = AccelVariant::ExtrapolateIntoU;
};

/// Runs one noise realization per seed, then both solvers on the same observation.
CellResult run_benchmark_cell(const Image& truth, const BenchmarkCell& cell,
                              const ExperimentOptions& options);

/// Table columns: image,bsnr,algorithm,mu,beta,seeds,psnr,ssim,itr,t_s,...
void write_benchmark_csv(const std::vector<CellResult>& cells, const std::filesystem::path& path);

}  // namespace lptv
