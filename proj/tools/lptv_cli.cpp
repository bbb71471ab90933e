// lptv: degrade / deblur / metrics / reproduce.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lptv/degradation.hpp"
#include "lptv/experiment.hpp"
#include "lptv/image_io.hpp"
#include "lptv/metrics.hpp"
#include "lptv/serialization.hpp"
#include "lptv/solvers.hpp"
#include "lptv/spectral.hpp"
#include "lptv/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

fs::path sibling(const fs::path& output, const std::string& suffix) {
  fs::path p = output;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

/// Removes everything registered unless commit() was called.
class OutputGuard {
 public:
  void add(const fs::path& p) { paths_.push_back(p); }
  void commit() { paths_.clear(); }
  ~OutputGuard() {
    std::error_code ec;
    for (const fs::path& p : paths_) fs::remove(p, ec);
  }

 private:
  std::vector<fs::path> paths_;
};

lptv::Kernel load_kernel_arg(const std::string& arg) {
  if (fs::is_regular_file(arg)) return lptv::read_kernel(arg);
  return lptv::parse_kernel_spec(arg);
}

unsigned worker_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LPTV_MAX_WORKERS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring malformed LPTV_MAX_WORKERS='" << env << "'\n";
    }
  }
  return n;
}

// ---------------------------------------------------------------------------

struct DegradeArgs {
  std::string input;
  std::string kernel = "gaussian:17:7";
  double bsnr = 30.0;
  std::uint64_t seed = 1;
  std::string output;
  std::string raw;
  std::string kernel_out;
  std::string manifest;
};

int cmd_degrade(const DegradeArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const lptv::Image truth = lptv::load_grayscale(a.input);
  const lptv::Kernel kernel = lptv::parse_kernel_spec(a.kernel);
  const auto cache = lptv::build_spectral_cache(kernel, truth.height(), truth.width());
  const auto d = lptv::degrade(truth, lptv::DegradationSpec<double>{kernel, a.bsnr, a.seed}, cache);
  const double empirical =
      lptv::compute_bsnr(d.blurred, lptv::Image(d.observed.pixels() - d.blurred.pixels()));
  const lptv::MetricReport quality = lptv::evaluate(d.observed, truth);

  const fs::path output = a.output;
  const fs::path kernel_path = a.kernel_out.empty() ? sibling(output, ".kernel.json") : fs::path(a.kernel_out);
  const fs::path manifest_path = a.manifest.empty() ? sibling(output, ".manifest.json") : fs::path(a.manifest);

  OutputGuard guard;
  guard.add(output);
  lptv::save_grayscale(d.observed, output);
  if (!a.raw.empty()) {
    guard.add(a.raw);
    lptv::save_raw(d.observed, a.raw);
  }
  guard.add(kernel_path);
  lptv::write_kernel(kernel, kernel_path);

  json manifest;
  manifest["tool"] = "lptv";
  manifest["version"] = lptv::kVersion;
  manifest["command"] = "degrade";
  manifest["input"] = a.input;
  manifest["outputs"] = {{"observed", output.string()},
                         {"raw", a.raw.empty() ? json(nullptr) : json(a.raw)},
                         {"kernel", kernel_path.string()}};
  manifest["kernel"] = lptv::kernel_to_json(kernel);
  manifest["kernel_spec"] = a.kernel;
  manifest["bsnr_db"] = a.bsnr;
  manifest["seed"] = a.seed;
  manifest["noise_generator"] = std::string(lptv::NormalStream::kAlgorithm);
  manifest["sigma"] = d.sigma;
  manifest["empirical_bsnr"] = empirical;
  manifest["degraded_vs_truth"] = {{"psnr", quality.psnr_db}, {"ssim", quality.ssim}};
  manifest["timestamp"] = utc_timestamp();
  manifest["wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  guard.add(manifest_path);
  lptv::write_json(manifest, manifest_path);
  guard.commit();

  std::cout << "sigma=" << d.sigma << " empirical_bsnr=" << empirical
            << " psnr=" << quality.psnr_db << " ssim=" << quality.ssim << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct DeblurArgs {
  std::string input;
  std::string kernel;
  double mu = 0.0;
  std::optional<double> beta;
  std::optional<double> bsnr_hint;
  double p = 0.1;
  double epsilon = 1e-8;
  double lipschitz = 1.0;
  double tol = 1e-8;
  int max_iter = 1000;
  bool accelerated = false;
  std::string accel_variant = "extrapolate-into-u";
  bool quantize_input = false;
  std::string reference;
  std::string trace;
  std::string output;
  std::string manifest;
  bool verbose = false;
};

int cmd_deblur(const DeblurArgs& a) {
  lptv::SolverConfig<double> cfg;
  cfg.mu = a.mu;
  if (a.beta) {
    cfg.beta = *a.beta;
  } else if (a.bsnr_hint && lptv::default_beta_for_bsnr(*a.bsnr_hint)) {
    cfg.beta = *lptv::default_beta_for_bsnr(*a.bsnr_hint);
  } else {
    throw std::invalid_argument("--beta is required unless --bsnr is 20 or 30");
  }
  cfg.p = a.p;
  cfg.epsilon = a.epsilon;
  cfg.lipschitz = a.lipschitz;
  cfg.tol = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.accelerated = a.accelerated;
  cfg.accel_variant = lptv::parse_accel_variant(a.accel_variant);
  cfg.validate();
  if (a.verbose) {
    cfg.observer = [](const lptv::IterationRecord& r) {
      std::cerr << "iter " << r.k << " rel_err " << r.relative_error << " objective " << r.objective;
      if (r.psnr) std::cerr << " psnr " << *r.psnr;
      std::cerr << '\n';
    };
  }

  lptv::Image observed = lptv::load_grayscale(a.input);
  if (a.quantize_input) {
    observed = lptv::Image(observed.pixels().unaryExpr(
        [](double v) { return static_cast<double>(lptv::quantize_pixel(v)); }));
  }
  const lptv::Kernel kernel = load_kernel_arg(a.kernel);
  std::optional<lptv::Image> reference;
  if (!a.reference.empty()) reference = lptv::load_grayscale(a.reference);
  const auto cache = lptv::build_spectral_cache(kernel, observed.height(), observed.width());

  const lptv::SolverResult<double> result =
      lptv::deblur(observed, cache, cfg, reference ? &*reference : nullptr);
  std::optional<lptv::MetricReport> metrics;
  if (reference) metrics = lptv::evaluate(result.u, *reference);

  const fs::path output = a.output;
  const fs::path trace_path = a.trace.empty() ? sibling(output, ".trace.csv") : fs::path(a.trace);
  const fs::path manifest_path = a.manifest.empty() ? sibling(output, ".manifest.json") : fs::path(a.manifest);
  OutputGuard guard;
  guard.add(output);
  lptv::save_grayscale(result.u, output);
  guard.add(trace_path);
  lptv::write_trace_csv(result.trace, trace_path);

  json manifest;
  manifest["tool"] = "lptv";
  manifest["version"] = lptv::kVersion;
  manifest["command"] = "deblur";
  manifest["algorithm"] = cfg.accelerated ? "APIRL1-AM" : "PIRL1-AM";
  manifest["input"] = a.input;
  manifest["quantized_input"] = a.quantize_input;
  manifest["reference"] = a.reference.empty() ? json(nullptr) : json(a.reference);
  manifest["kernel"] = lptv::kernel_to_json(kernel);
  manifest["outputs"] = {{"restored", output.string()}, {"trace", trace_path.string()}};
  manifest["summary"] = lptv::run_summary(result.trace, cfg, metrics);
  manifest["timestamp"] = utc_timestamp();
  guard.add(manifest_path);
  lptv::write_json(manifest, manifest_path);
  guard.commit();

  std::cout << manifest["summary"].dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_metrics(const std::string& a_path, const std::string& b_path, double peak) {
  const lptv::Image a = lptv::load_grayscale(a_path);
  const lptv::Image b = lptv::load_grayscale(b_path);
  const double p = lptv::psnr(a, b, peak);
  const double s = lptv::ssim(a, b, peak);
  json report = {{"psnr_db", std::isfinite(p) ? json(p) : json("inf")}, {"ssim", s}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ReproduceArgs {
  std::string images_dir = "data";
  int seeds = 10;
  std::uint64_t first_seed = 1;
  int max_iter = 1000;
  double tol = 1e-8;
  std::string accel_variant = "extrapolate-into-u";
  std::string output = "table1.csv";
  std::string runs_json;
};

json outcome_json(const lptv::RunOutcome& r) {
  return {{"seed", r.seed},
          {"algorithm", r.accelerated ? "APIRL1-AM" : "PIRL1-AM"},
          {"iterations", r.iterations},
          {"terminated_by", std::string(lptv::to_string(r.terminated_by))},
          {"final_rel_err", r.final_rel_err},
          {"psnr", r.restored.psnr_db},
          {"ssim", r.restored.ssim},
          {"degraded_psnr", r.degraded.psnr_db},
          {"degraded_ssim", r.degraded.ssim},
          {"empirical_bsnr", r.empirical_bsnr},
          {"wall_ms", r.wall_ms}};
}

int cmd_reproduce(const ReproduceArgs& a) {
  lptv::ExperimentOptions options;
  options.seeds = a.seeds;
  options.first_seed = a.first_seed;
  options.max_iter = a.max_iter;
  options.tol = a.tol;
  options.accel_variant = lptv::parse_accel_variant(a.accel_variant);

  const std::vector<lptv::BenchmarkCell> cells = lptv::benchmark_cells();
  std::vector<std::optional<lptv::CellResult>> results(cells.size());
  std::vector<std::string> errors(cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const lptv::BenchmarkCell& cell = cells[i];
      try {
        const auto path = lptv::find_benchmark_image(a.images_dir, cell.image);
        if (!path) throw std::runtime_error("missing " + cell.image + ".png/.pgm in " + a.images_dir);
        results[i] = lptv::run_benchmark_cell(lptv::load_grayscale(*path), cell, options);
        std::lock_guard lock(log_mutex);
        std::cerr << "done " << cell.image << " BSNR " << cell.bsnr_db << '\n';
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned n_workers = std::min<unsigned>(worker_cap(), static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  int failures = 0;
  std::vector<lptv::CellResult> done;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "error: " << cells[i].image << " BSNR " << cells[i].bsnr_db << ": " << errors[i] << '\n';
      ++failures;
      continue;
    }
    const lptv::CellResult& r = *results[i];
    if (r.accelerated.mean_psnr() <= r.accelerated.mean_degraded_psnr() ||
        r.plain.mean_psnr() <= r.plain.mean_degraded_psnr()) {
      std::cerr << "error: " << r.cell.image << " BSNR " << r.cell.bsnr_db
                << ": restoration did not improve PSNR\n";
      ++failures;
    }
    done.push_back(r);
  }
  if (!done.empty()) {
    lptv::write_benchmark_csv(done, a.output);
    if (!a.runs_json.empty()) {
      json runs = json::array();
      for (const lptv::CellResult& r : done) {
        json cell = {{"image", r.cell.image}, {"bsnr_db", r.cell.bsnr_db}, {"mu", r.cell.mu},
                     {"beta", r.cell.beta}, {"runs", json::array()}};
        for (const auto* s : {&r.plain, &r.accelerated})
          for (const lptv::RunOutcome& o : s->runs) cell["runs"].push_back(outcome_json(o));
        runs.push_back(cell);
      }
      lptv::write_json({{"tool", "lptv"}, {"version", lptv::kVersion}, {"cells", runs}}, a.runs_json);
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l_p total-variation deblurring by reweighted-l1 alternating minimization"};
  app.set_version_flag("--version", lptv::kVersion);
  app.require_subcommand(1);

  DegradeArgs dg;
  auto* degrade = app.add_subcommand("degrade", "Blur an image and add BSNR-calibrated Gaussian noise");
  degrade->add_option("--input", dg.input, "Ground-truth image (PNG/PGM)")->required()->check(CLI::ExistingFile);
  degrade->add_option("--kernel", dg.kernel, "gaussian:<size>:<sigma> or delta[:<size>]")->capture_default_str();
  degrade->add_option("--bsnr", dg.bsnr, "Target blurred SNR in dB")->required();
  degrade->add_option("--seed", dg.seed, "Noise seed")->capture_default_str();
  degrade->add_option("--output", dg.output, "Observed image (PNG/PGM/F64)")->required();
  degrade->add_option("--raw", dg.raw, "Also write the unclamped observation as .f64");
  degrade->add_option("--kernel-out", dg.kernel_out, "Kernel JSON (default <output>.kernel.json)");
  degrade->add_option("--manifest", dg.manifest, "Manifest JSON (default <output>.manifest.json)");

  DeblurArgs db;
  auto* deblur = app.add_subcommand("deblur", "Restore an observed image");
  deblur->add_option("--input", db.input, "Observed image (PNG/PGM/F64)")->required()->check(CLI::ExistingFile);
  deblur->add_option("--kernel", db.kernel, "Kernel JSON file or kernel spec")->required();
  deblur->add_option("--mu", db.mu, "Regularization weight")->required();
  deblur->add_option("--beta", db.beta, "Penalty weight (default from --bsnr)");
  deblur->add_option("--bsnr", db.bsnr_hint, "Noise level hint used to pick beta (20 or 30)");
  deblur->add_option("--p", db.p, "Exponent in (0, 1]")->capture_default_str();
  deblur->add_option("--epsilon", db.epsilon, "Reweighting guard")->capture_default_str();
  deblur->add_option("--lipschitz", db.lipschitz, "L in lambda = mu / (L beta)")->capture_default_str();
  deblur->add_option("--tol", db.tol, "Relative-change stopping tolerance")->capture_default_str();
  deblur->add_option("--max-iter", db.max_iter, "Iteration cap")->capture_default_str();
  deblur->add_flag("--accelerated", db.accelerated, "Use Nesterov extrapolation (APIRL1-AM)");
  deblur->add_option("--accel-variant", db.accel_variant, "extrapolate-into-u | extrapolate-into-prox")
      ->check(CLI::IsMember({"extrapolate-into-u", "extrapolate-into-prox"}))
      ->capture_default_str();
  deblur->add_flag("--quantize-input", db.quantize_input, "Round the observation to 8-bit first");
  deblur->add_option("--reference", db.reference, "Ground truth for per-iteration PSNR")->check(CLI::ExistingFile);
  deblur->add_option("--trace", db.trace, "Trace CSV (default <output>.trace.csv)");
  deblur->add_option("--output", db.output, "Restored image")->required();
  deblur->add_option("--manifest", db.manifest, "Manifest JSON (default <output>.manifest.json)");
  deblur->add_flag("-v,--verbose", db.verbose, "Log every iteration to stderr");

  std::string ma, mb;
  double peak = 255.0;
  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM between two images");
  metrics->add_option("a", ma, "First image")->required()->check(CLI::ExistingFile);
  metrics->add_option("b", mb, "Second image")->required()->check(CLI::ExistingFile);
  metrics->add_option("--peak", peak, "Peak intensity")->capture_default_str();

  ReproduceArgs rp;
  auto* reproduce = app.add_subcommand("reproduce", "Run the 2-image x 2-BSNR x 2-algorithm benchmark");
  reproduce->add_option("--images-dir", rp.images_dir, "Directory with peppers and cameraman images")
      ->capture_default_str();
  reproduce->add_option("--seeds", rp.seeds, "Noise realizations per cell")->capture_default_str();
  reproduce->add_option("--first-seed", rp.first_seed, "First seed")->capture_default_str();
  reproduce->add_option("--max-iter", rp.max_iter, "Iteration cap")->capture_default_str();
  reproduce->add_option("--tol", rp.tol, "Stopping tolerance")->capture_default_str();
  reproduce->add_option("--accel-variant", rp.accel_variant, "Acceleration wiring")
      ->check(CLI::IsMember({"extrapolate-into-u", "extrapolate-into-prox"}))
      ->capture_default_str();
  reproduce->add_option("--output", rp.output, "Table CSV")->capture_default_str();
  reproduce->add_option("--runs-json", rp.runs_json, "Per-run details as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*degrade) return cmd_degrade(dg);
    if (*deblur) return cmd_deblur(db);
    if (*metrics) return cmd_metrics(ma, mb, peak);
    if (*reproduce) return cmd_reproduce(rp);
  } catch (const lptv::DivergenceError& e) {
    std::cerr << "error: solver diverged at iteration " << e.iteration() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
