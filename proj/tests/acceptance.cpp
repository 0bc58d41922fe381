// Acceptance suite: runs every verification criterion at its pinned
// tolerances and prints one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <cstdio>

#include "sgsim/verify.hpp"

int main() {
    int failed = 0;
    sgsim::run_verification([&](const sgsim::CriterionResult& r) {
        std::printf("%s\n", sgsim::format_criterion_line(r).c_str());
        std::fflush(stdout);
        if (!r.passed) ++failed;
    });
    if (failed == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failed);
    return 1;
}
