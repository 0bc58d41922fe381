#pragma once

#include <string>

#include "sgsim/simulator.hpp"

namespace sgsim {

/// One CSV row per iteration: t, f, grad_norm, hess_min_eig (blank
/// off-cadence), good_count, ejected_ids (semicolon-joined), sigma_norm,
/// delta_norm, then dev_A_0..dev_A_{m-1} and dev_B_0..dev_B_{m-1} (blank for
/// absent workers). Numbers carry 17 significant digits so files round-trip
/// doubles exactly.
std::string render_trace(const ExperimentConfig& config, const RunResult& result);

/// key = value document: config echo, final statistics, ejection timeline,
/// caught count, diverged flag, wall time. Identical across reruns of the
/// same config except for wall_time_ms.
std::string render_summary(const ExperimentConfig& config, const RunResult& result);

/// Writes trace.csv and summary.txt into the directory (created if needed).
void write_run_files(const ExperimentConfig& config, const RunResult& result,
                     const std::string& out_dir);

} // namespace sgsim
