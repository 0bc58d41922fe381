#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgsim/attacks.hpp"
#include "sgsim/defenses.hpp"
#include "sgsim/objectives.hpp"

namespace sgsim {

struct ScheduleStep {
    long epoch = 0;
    double factor = 1.0;
};

struct ExperimentConfig {
    ObjectiveSpec objective;
    int m = 10;
    AttackSpec attack;
    DefenseSpec defense;
    double eta = 0.1;
    std::vector<ScheduleStep> schedule; // cumulative learning-rate decays
    double nu = 0.0;                    // perturbation standard deviation
    long T = 1000;
    long iterations_per_epoch = 50;
    double epsilon = 0.1;
    double p = 0.01;
    std::uint64_t master_seed = 1;
    bool wlog_clip = false;
    long metrics_cadence = 10;
    // Initial point: scalar broadcast unless an explicit vector is given.
    double x0_fill = 0.0;
    std::vector<double> x0_values;

    double byzantine_fraction() const {
        return static_cast<double>(attack.byzantine_ids.size()) / static_cast<double>(m);
    }

    /// Throws std::invalid_argument naming the offending field when the
    /// configuration is inconsistent.
    void validate() const;

    DenseVector initial_point() const;
    double eta_at(long t) const;
};

struct DerivedConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    long T0 = 0;
    long T1 = 0;
    double threshold0 = 0.0;
    double threshold1 = 0.0;
};

/// Multipliers for every constant the asymptotic recipe leaves unspecified.
struct RecipeOverrides {
    double c_eta = 1.0;
    double c_nu = 1.0;
    double c_T0 = 1.0;
    double c_T1 = 1.0;
    double c_T = 1.0;
};

struct RecipeParams {
    DerivedConstants constants;
    double eta = 0.0;
    double nu = 0.0;
    long T = 0;
};

/// Parameter recipe: C3 = alpha^2 + 1/m, T = ceil(c_T * C3 / eps^4),
/// C1 = ln(T/p), C2 = alpha^2 ln(mT/p) + ln(T/p)/m,
/// eta = c_eta * eps^2 / (d C3 C1), nu = sqrt(c_nu * C3),
/// T0 = ceil(c_T0 / eta), T1 = ceil(c_T1 / (eta sqrt(eps))), and the safeguard
/// thresholds from the two-window threshold formula.
RecipeParams recipe_params(double epsilon, double alpha, int m, int d, double p,
                            const RecipeOverrides& ov = {});

struct IterationRecord {
    long t = 0;
    double f = 0.0;
    double grad_norm = 0.0;
    double hess_min_eig = std::numeric_limits<double>::quiet_NaN(); // NaN off-cadence
    int good_count = 0;
    std::vector<int> ejected;
    double sigma_norm = 0.0;
    double delta_norm = 0.0;
    std::vector<double> dev_long;  // ||A_i - A_med||, NaN when absent
    std::vector<double> dev_short; // ||B_i - B_med||, NaN when absent
    // Ground-truth running sums (in-memory diagnostics, not trace columns).
    double sigma_prefix_norm = 0.0; // ||sigma_0 + ... + sigma_t||
    double delta_prefix_norm = 0.0;
    bool sosp_known = false;
    bool sosp_satisfied = false;
};

struct RunSummary {
    double final_grad_norm = 0.0;
    double final_f = 0.0;
    double sosp_fraction = 0.0;
    std::vector<Ejection> ejections;
    int caught_count = 0; // distinct byzantine ids ever ejected
    bool diverged = false;
    long iterations_run = 0;
    long median_fallbacks = 0;
    double wall_time_ms = 0.0;
    std::vector<int> final_good;
};

struct RunResult {
    std::vector<IterationRecord> records;
    RunSummary summary;
};

/// Runs one experiment. jobs > 1 evaluates the per-round worker reports on
/// that many threads; traces are bit-identical for every jobs value.
RunResult run(const ExperimentConfig& config, int jobs = 1);

struct EscapeResult {
    bool escaped = false;
    std::optional<long> t_escape;
    double max_distance_a = 0.0;
    double max_distance_b = 0.0;
};

/// Two coupled executions from the same start sharing all randomness except
/// the sign of the first coordinate of the perturbation. Reports whether
/// either iterate leaves the radius-R ball around the start within config.T.
EscapeResult run_coupled_escape(const ExperimentConfig& config, double delta, double R);

/// Ground-truth round diagnostics: the averaged honest-noise vector and the
/// averaged deviation contributed by byzantine members still in the good set.
std::pair<DenseVector, DenseVector> ground_truth_diagnostics(
    const std::vector<int>& good_now, const AttackSpec& attack,
    const std::vector<std::optional<DenseVector>>& reports, const DenseVector& true_grad);

} // namespace sgsim
