#include "lptv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "lptv/degradation.hpp"
#include "lptv/spectral.hpp"

namespace lptv {
namespace {

template <typename F>
double mean_of(const std::vector<RunOutcome>& runs, F&& field) {
  if (runs.empty()) return std::nan("");
  double sum = 0.0;
  for (const RunOutcome& r : runs) sum += field(r);
  return sum / static_cast<double>(runs.size());
}

template <typename F>
double stddev_of(const std::vector<RunOutcome>& runs, F&& field) {
  if (runs.size() < 2) return 0.0;
  const double m = mean_of(runs, field);
  double ss = 0.0;
  for (const RunOutcome& r : runs) ss += (field(r) - m) * (field(r) - m);
  return std::sqrt(ss / static_cast<double>(runs.size() - 1));
}

}  // namespace

std::optional<double> default_beta_for_bsnr(double bsnr_db) {
  if (std::abs(bsnr_db - 30.0) < 1e-9) return 0.009;
  if (std::abs(bsnr_db - 20.0) < 1e-9) return 0.01;
  return std::nullopt;
}

std::vector<BenchmarkCell> benchmark_cells() {
  return {
      {"peppers", 30.0, 30.0, 0.009},
      {"cameraman", 30.0, 60.0, 0.009},
      {"peppers", 20.0, 100.0, 0.01},
      {"cameraman", 20.0, 100.0, 0.01},
  };
}

std::optional<std::filesystem::path> find_benchmark_image(const std::filesystem::path& dir,
                                                          const std::string& stem) {
  for (const char* ext : {".png", ".pgm"}) {
    const auto candidate = dir / (stem + ext);
    if (std::filesystem::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

double AlgorithmSummary::mean_psnr() const {
  return mean_of(runs, [](const RunOutcome& r) { return r.restored.psnr_db; });
}
double AlgorithmSummary::mean_ssim() const {
  return mean_of(runs, [](const RunOutcome& r) { return r.restored.ssim; });
}
double AlgorithmSummary::mean_iterations() const {
  return mean_of(runs, [](const RunOutcome& r) { return double(r.iterations); });
}
double AlgorithmSummary::mean_seconds() const {
  return mean_of(runs, [](const RunOutcome& r) { return r.wall_ms / 1000.0; });
}
double AlgorithmSummary::stddev_iterations() const {
  return stddev_of(runs, [](const RunOutcome& r) { return double(r.iterations); });
}
double AlgorithmSummary::mean_degraded_psnr() const {
  return mean_of(runs, [](const RunOutcome& r) { return r.degraded.psnr_db; });
}
double AlgorithmSummary::mean_degraded_ssim() const {
  return mean_of(runs, [](const RunOutcome& r) { return r.degraded.ssim; });
}
bool AlgorithmSummary::all_converged() const {
  return std::all_of(runs.begin(), runs.end(),
                     [](const RunOutcome& r) { return r.terminated_by == Termination::Tolerance; });
}

CellResult run_benchmark_cell(const Image& truth, const BenchmarkCell& cell,
                              const ExperimentOptions& options) {
  if (options.seeds < 1) throw std::invalid_argument("run_benchmark_cell: need at least one seed");
  const Kernel kernel = gaussian_kernel<double>(kBenchmarkKernelSize, kBenchmarkKernelSigma);
  const SpectralCache<double> cache = build_spectral_cache(kernel, truth.height(), truth.width());

  CellResult result{cell};
  for (int s = 0; s < options.seeds; ++s) {
    const std::uint64_t seed = options.first_seed + static_cast<std::uint64_t>(s);
    const Degraded<double> d = degrade(truth, DegradationSpec<double>{kernel, cell.bsnr_db, seed}, cache);
    const MetricReport degraded = evaluate(d.observed, truth);
    const double empirical = compute_bsnr(
        d.blurred, Image(d.observed.pixels() - d.blurred.pixels()));

    for (bool accelerated : {false, true}) {
      SolverConfig<double> cfg;
      cfg.mu = cell.mu;
      cfg.beta = cell.beta;
      cfg.tol = options.tol;
      cfg.max_iter = options.max_iter;
      cfg.accelerated = accelerated;
      cfg.accel_variant = options.accel_variant;
      const SolverResult<double> run = deblur(d.observed, cache, cfg);
      RunOutcome outcome{seed,
                         accelerated,
                         run.trace.iterations(),
                         run.trace.terminated_by,
                         run.trace.final_relative_error(),
                         evaluate(run.u, truth),
                         degraded,
                         empirical,
                         run.trace.wall_ms()};
      (accelerated ? result.accelerated : result.plain).runs.push_back(outcome);
    }
  }
  return result;
}

void write_benchmark_csv(const std::vector<CellResult>& cells, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "image,bsnr,algorithm,mu,beta,seeds,psnr,ssim,itr,t_s,itr_std,degraded_psnr,"
         "degraded_ssim,all_converged\n";
  out << std::fixed;
  for (const CellResult& c : cells) {
    for (const AlgorithmSummary* s : {&c.accelerated, &c.plain}) {
      out << c.cell.image << ',' << std::setprecision(0) << c.cell.bsnr_db << ','
          << (s->accelerated ? "APIRL1-AM" : "PIRL1-AM") << ',' << std::setprecision(4)
          << c.cell.mu << ',' << c.cell.beta << ',' << s->runs.size() << ','
          << std::setprecision(2) << s->mean_psnr() << ',' << std::setprecision(3)
          << s->mean_ssim() << ',' << std::setprecision(1) << s->mean_iterations() << ','
          << std::setprecision(2) << s->mean_seconds() << ',' << std::setprecision(1)
          << s->stddev_iterations() << ',' << std::setprecision(2) << s->mean_degraded_psnr()
          << ',' << std::setprecision(3) << s->mean_degraded_ssim() << ','
          << (s->all_converged() ? "true" : "false") << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace lptv
