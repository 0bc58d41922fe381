#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgsim/vec.hpp"

namespace sgsim {

enum class DefenseKind {
    Mean,
    GeoMedoid,
    CoordMedian,
    Krum,
    Zeno,
    SafeguardSingle,
    SafeguardDouble,
};

enum class ThresholdMode { Theoretical, Empirical, Fixed };

struct DefenseSpec {
    DefenseKind kind = DefenseKind::SafeguardDouble;
    int krum_b = 0;
    int zeno_b = 0;
    double zeno_rho = 0.0005;
    int zeno_nr = 10;
    // Safeguard windows, in iterations. For SafeguardSingle only t0 is used.
    long t0 = 0;
    long t1 = 0;
    ThresholdMode threshold_mode = ThresholdMode::Empirical;
    double threshold_scale = 1.0;      // theoretical mode: multiplies the formula value
    double threshold_floor = 5.0;      // empirical mode
    double threshold_multiplier = 1.5; // empirical mode
    double threshold_fixed0 = 0.0;     // fixed mode: absolute values
    double threshold_fixed1 = 0.0;
    std::optional<long> reset_every;

    bool is_safeguard() const {
        return kind == DefenseKind::SafeguardSingle || kind == DefenseKind::SafeguardDouble;
    }
};

// ---- Round aggregators (historyless baselines) ----

/// Arithmetic mean. Throws on an empty list.
DenseVector aggregate_mean(const std::vector<DenseVector>& reports);

/// The input point minimizing the summed Euclidean distance to all inputs
/// (ties broken by lowest index).
DenseVector geometric_medoid(const std::vector<DenseVector>& reports);
std::size_t geometric_medoid_index(const std::vector<DenseVector>& reports);

/// Per-coordinate median; even counts take the lower-middle order statistic.
DenseVector coordinate_median(const std::vector<DenseVector>& reports);

/// Krum: the report whose summed squared distance to its m-b-2 nearest
/// neighbours is smallest (ties by lowest index). Requires 2b+2 < m.
DenseVector krum(const std::vector<DenseVector>& reports, int b);
std::size_t krum_index(const std::vector<DenseVector>& reports, int b);

/// Zeno: scores each report u by f_r(x) - f_r(x - eta*u) - rho*||u||^2 and
/// averages the m-b highest-scoring reports (ties by lowest index). The same
/// f_r is used for every evaluation in the round.
DenseVector zeno(const std::vector<DenseVector>& reports, int b, double rho,
                 const DenseVector& x, double eta,
                 const std::function<double(const DenseVector&)>& f_r);

// ---- Threshold selection ----

/// 8 * sqrt(T * ln(16 m T / p)). The two-window variant passes the longer
/// window as log_T while keeping its own length under the square root.
double theoretical_threshold(long T, int m, double p);
double theoretical_threshold(long T, long log_T, int m, double p);

struct EmpiricalThreshold {
    int med_id = -1;
    double med_score = 0.0; // the selected worker's order-statistic score
    double threshold = 0.0; // multiplier * max(score, floor)
};

/// Order-statistic median selection: each member's score is the
/// ceil(m/2 + 1)-th smallest of its distances to all members (self included),
/// the member with the smallest score is the median, and the ejection
/// threshold is multiplier * max(score, floor). total_m is the full machine
/// count; the order statistic is clamped to the current member count.
EmpiricalThreshold empirical_median_threshold(const std::map<int, DenseVector>& accumulators,
                                              int total_m, double floor, double multiplier);

// ---- Safeguard state machine ----

struct Ejection {
    long iteration = 0;
    int worker = 0;
};

struct SafeguardState {
    int total_workers = 0;
    std::size_t dim = 0;
    bool double_mode = true;
    long window_short = 0; // B window (or the single window)
    long window_long = 0;  // A window (double mode only)
    std::vector<int> good; // ascending worker ids
    std::map<int, DenseVector> acc_long;  // A_i
    std::map<int, DenseVector> acc_short; // B_i
    std::vector<Ejection> ejection_log;
    long median_fallbacks = 0; // rounds where no worker met the majority rule

    static SafeguardState create(int m, std::size_t dim, const DefenseSpec& spec);
};

struct SafeguardRoundInfo {
    DenseVector direction;       // mean of this round's reports over the pre-ejection good set
    std::vector<int> ejected;    // ids removed this round
    std::vector<double> dev_long;  // ||A_i - A_med|| per worker id (NaN when absent)
    std::vector<double> dev_short; // ||B_i - B_med|| per worker id (NaN when absent)
    int med_long = -1;
    int med_short = -1;
    bool median_fallback = false;
};

struct SafeguardThresholds {
    double long_threshold = 0.0;  // compared against ||A_i - A_med||
    double short_threshold = 0.0; // compared against ||B_i - B_med||
};

/// Resolves the per-run ejection radii for theoretical/fixed modes. In
/// theoretical mode the ejection radius is 2 * scale * formula value, with the
/// long window supplying the log argument of both thresholds in double mode.
SafeguardThresholds resolve_thresholds(const DefenseSpec& spec, int m, double p);

/// One filtering round: reset window accumulators at their anchors,
/// accumulate report/|good|, pick medians, eject deviants, and return the
/// update direction averaged over the pre-ejection good set.
SafeguardRoundInfo safeguard_step(SafeguardState& state, const std::map<int, DenseVector>& reports,
                                  long t, const DefenseSpec& spec, double p);

/// Restores good to all workers and zeroes the accumulators; the ejection log
/// is retained.
void reset_good(SafeguardState& state);

} // namespace sgsim
