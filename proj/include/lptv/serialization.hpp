#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "lptv/core.hpp"
#include "lptv/metrics.hpp"
#include "lptv/solvers.hpp"

namespace lptv {

/// {"size": n, "sigma": s|null, "taps": [row-major]}
nlohmann::json kernel_to_json(const Kernel& kernel);
Kernel kernel_from_json(const nlohmann::json& j);

void write_kernel(const Kernel& kernel, const std::filesystem::path& path);
Kernel read_kernel(const std::filesystem::path& path);

/// Parses "gaussian:<size>:<sigma>" or "delta[:<size>]".
Kernel parse_kernel_spec(const std::string& spec);

nlohmann::json config_to_json(const SolverConfig<double>& cfg);

/// Header `iter,rel_err,objective,psnr,elapsed_ms`; psnr left empty without a reference.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);
void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path);

/// {iterations, terminated_by, final_rel_err, psnr, ssim, wall_ms, config}
nlohmann::json run_summary(const ConvergenceTrace& trace, const SolverConfig<double>& cfg,
                           const std::optional<MetricReport>& metrics);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace lptv
