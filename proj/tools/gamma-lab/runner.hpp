#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace gammalab::cli {

/// git-describe string baked in at configure time.
std::string tool_version();

struct RunResult {
    std::string experiment;
    /// Serialized report document.
    std::string report;
    /// Files written, relative to the output directory.
    std::vector<std::string> files;
    /// Sweep results of sweep-eps, cell and sweep-T.
    std::optional<SweepReport> sweep;
};

/// Sweep setup of a sweep-eps, cell or sweep-T configuration. Parallelism goes to
/// the sweep points, so every minimization runs single-threaded.
SweepSetup make_sweep_setup(const ExperimentConfig& config);

/// Runs `config.experiment` and writes report.json, the CSV tables and optional
/// field dumps into `out_dir` (created when missing). Module errors propagate.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Human-readable catalog of every built-in density and kernel.
std::string builtin_catalog_text();

}  // namespace gammalab::cli
