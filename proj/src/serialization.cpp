#include "lptv/serialization.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lptv/spectral.hpp"

namespace lptv {
namespace {

// JSON has no infinities; +inf PSNR (identical images) is written as null.
nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json kernel_to_json(const Kernel& kernel) {
  std::vector<double> taps(kernel.taps().data(), kernel.taps().data() + kernel.taps().size());
  nlohmann::json j;
  j["size"] = kernel.size();
  j["sigma"] = kernel.sigma() > 0 ? nlohmann::json(kernel.sigma()) : nlohmann::json(nullptr);
  j["taps"] = taps;
  return j;
}

Kernel kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("taps")) {
    throw std::invalid_argument("kernel JSON needs 'size' and 'taps'");
  }
  const auto size = j.at("size").get<Index>();
  const auto taps = j.at("taps").get<std::vector<double>>();
  if (size <= 0 || static_cast<Index>(taps.size()) != size * size) {
    throw std::invalid_argument("kernel JSON: taps length does not match size^2");
  }
  Raster<double> raster(size, size);
  std::copy(taps.begin(), taps.end(), raster.data());
  const double sigma = j.contains("sigma") && j["sigma"].is_number() ? j["sigma"].get<double>() : 0.0;
  return Kernel(std::move(raster), sigma);
}

void write_kernel(const Kernel& kernel, const std::filesystem::path& path) {
  write_json(kernel_to_json(kernel), path);
}

Kernel read_kernel(const std::filesystem::path& path) { return kernel_from_json(read_json(path)); }

Kernel parse_kernel_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  try {
    if (!parts.empty() && parts[0] == "gaussian" && parts.size() == 3) {
      return gaussian_kernel<double>(std::stol(parts[1]), std::stod(parts[2]));
    }
    if (!parts.empty() && parts[0] == "delta" && parts.size() <= 2) {
      const Index size = parts.size() == 2 ? std::stol(parts[1]) : 1;
      if (size <= 0 || size % 2 == 0) throw std::invalid_argument("delta size must be odd");
      return delta_kernel<double>(size);
    }
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("bad kernel spec '" + spec + "': " + e.what());
  }
  throw std::invalid_argument("bad kernel spec '" + spec +
                              "' (expected gaussian:<size>:<sigma> or delta[:<size>])");
}

nlohmann::json config_to_json(const SolverConfig<double>& cfg) {
  return {
      {"mu", cfg.mu},
      {"beta", cfg.beta},
      {"p", cfg.p},
      {"lipschitz", cfg.lipschitz},
      {"epsilon", cfg.epsilon},
      {"lambda", cfg.lambda()},
      {"tol", cfg.tol},
      {"max_iter", cfg.max_iter},
      {"accelerated", cfg.accelerated},
      {"accel_variant", std::string(to_string(cfg.accel_variant))},
      {"momentum", cfg.momentum ? "custom" : "nesterov (k-1)/(k+2)"},
  };
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  out << "iter,rel_err,objective,psnr,elapsed_ms\n";
  out << std::setprecision(17);
  for (const IterationRecord& r : trace.records) {
    out << r.k << ',' << r.relative_error << ',' << r.objective << ',';
    if (r.psnr && std::isfinite(*r.psnr)) out << *r.psnr;
    out << ',' << std::setprecision(6) << r.elapsed_ms << std::setprecision(17) << '\n';
  }
}

void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  write_trace_csv(trace, out);
  if (!out) throw std::runtime_error("write failed for trace " + path.string());
}

nlohmann::json run_summary(const ConvergenceTrace& trace, const SolverConfig<double>& cfg,
                           const std::optional<MetricReport>& metrics) {
  nlohmann::json j;
  j["iterations"] = trace.iterations();
  j["terminated_by"] = std::string(to_string(trace.terminated_by));
  j["final_rel_err"] = finite_or_null(trace.final_relative_error());
  j["psnr"] = metrics ? finite_or_null(metrics->psnr_db) : nlohmann::json(nullptr);
  j["ssim"] = metrics ? nlohmann::json(metrics->ssim) : nlohmann::json(nullptr);
  j["wall_ms"] = trace.wall_ms();
  j["config"] = config_to_json(cfg);
  return j;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace lptv
