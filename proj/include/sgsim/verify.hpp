#pragma once

#include <functional>
#include <string>
#include <vector>

namespace sgsim {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the full verification suite; the callback receives one line per
/// criterion as it finishes (may be null).
std::vector<CriterionResult> run_verification(
    const std::function<void(const CriterionResult&)>& on_result = nullptr);

/// Formats "PASS criterion 3 (variance-attack detection) ... detail".
std::string format_criterion_line(const CriterionResult& r);

} // namespace sgsim
