#pragma once

#include <stdexcept>
#include <string>

#include "sgsim/simulator.hpp"

namespace sgsim {

/// Raised on malformed configuration text; `key` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Parses the key = value experiment schema (see docs/config-schema.md) and
/// fills documented defaults. Throws ConfigError on unknown keys, missing
/// required keys, and out-of-range values.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig parse_config_file(const std::string& path);

/// Renders a configuration so that parse_config(render_config(c)) == c,
/// with floats carrying 17 significant digits.
std::string render_config(const ExperimentConfig& config);

std::string attack_name(AttackKind kind);
std::string defense_name(DefenseKind kind);
std::string objective_name(ObjectiveKind kind);

} // namespace sgsim
