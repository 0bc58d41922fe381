#pragma once

#include <string>
#include <vector>

#include "sgsim/simulator.hpp"

namespace sgsim {

/// One attack x defense grid over a base configuration. Cell entries use the
/// compact `name` or `name:param` grammar described in docs/config-schema.md.
struct SweepSpec {
    ExperimentConfig base;
    std::vector<std::string> attacks;
    std::vector<std::string> defenses;
    std::vector<std::uint64_t> seeds;
};

struct SweepCell {
    std::string attack;
    std::string defense;
    bool valid = false;
    std::string error;             // set when the cell configuration is invalid
    double median_final_grad = 0.0; // median over seeds
    double median_caught = 0.0;
    int diverged_runs = 0;
};

struct SweepTable {
    std::vector<std::string> attacks;
    std::vector<std::string> defenses;
    std::vector<SweepCell> cells; // row-major: defenses x attacks
};

/// Parses a sweep file: the base experiment schema plus sweep_attacks,
/// sweep_defenses and sweep_seeds keys.
SweepSpec parse_sweep(const std::string& text);
SweepSpec parse_sweep_file(const std::string& path);

/// Applies a compact cell entry to a copy of the base config. Throws
/// ConfigError when the entry is malformed or inconsistent with the base.
ExperimentConfig apply_attack_entry(const ExperimentConfig& base, const std::string& entry);
ExperimentConfig apply_defense_entry(const ExperimentConfig& base, const std::string& entry);

/// Runs every cell (cells may run concurrently); invalid cells are recorded
/// in the table and never abort the sweep.
SweepTable run_sweep(const SweepSpec& spec, int jobs = 1);

/// Rows = defenses, columns = attacks; each cell holds
/// median_grad_norm/median_caught or invalid.
std::string render_sweep_table(const SweepTable& table);

} // namespace sgsim
