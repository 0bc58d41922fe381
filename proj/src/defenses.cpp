#include "sgsim/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgsim {

DenseVector aggregate_mean(const std::vector<DenseVector>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate_mean: empty report list");
    DenseVector sum(reports[0].dim());
    for (const DenseVector& r : reports) sum += r;
    sum *= 1.0 / static_cast<double>(reports.size());
    return sum;
}

std::size_t geometric_medoid_index(const std::vector<DenseVector>& reports) {
    if (reports.empty()) throw std::invalid_argument("geometric_medoid: empty report list");
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < reports.size(); ++j)
            sum += distance(reports[i], reports[j]);
        if (sum < best_sum) {
            best_sum = sum;
            best = i;
        }
    }
    return best;
}

DenseVector geometric_medoid(const std::vector<DenseVector>& reports) {
    return reports[geometric_medoid_index(reports)];
}

DenseVector coordinate_median(const std::vector<DenseVector>& reports) {
    if (reports.empty()) throw std::invalid_argument("coordinate_median: empty report list");
    const std::size_t d = reports[0].dim();
    const std::size_t n = reports.size();
    DenseVector out(d);
    std::vector<double> column(n);
    // Lower-middle order statistic, so the output stays inside the value set.
    const std::size_t k = (n - 1) / 2;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = reports[i][j];
        std::nth_element(column.begin(), column.begin() + static_cast<long>(k), column.end());
        out[j] = column[k];
    }
    return out;
}

std::size_t krum_index(const std::vector<DenseVector>& reports, int b) {
    const int m = static_cast<int>(reports.size());
    if (m == 0) throw std::invalid_argument("krum: empty report list");
    if (b < 0 || 2 * b + 2 >= m)
        throw std::invalid_argument("krum: requires 2b+2 < m");
    const int neighbors = m - b - 2;
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<double> dists(reports.size() - 1);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < reports.size(); ++j) {
            if (j == i) continue;
            const double dd = distance(reports[i], reports[j]);
            dists[k++] = dd * dd;
        }
        std::nth_element(dists.begin(), dists.begin() + neighbors, dists.end());
        double score = 0.0;
        for (int q = 0; q < neighbors; ++q) score += dists[q];
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

DenseVector krum(const std::vector<DenseVector>& reports, int b) {
    return reports[krum_index(reports, b)];
}

DenseVector zeno(const std::vector<DenseVector>& reports, int b, double rho,
                 const DenseVector& x, double eta,
                 const std::function<double(const DenseVector&)>& f_r) {
    const int m = static_cast<int>(reports.size());
    if (m == 0) throw std::invalid_argument("zeno: empty report list");
    if (b < 0 || b >= m) throw std::invalid_argument("zeno: requires 0 <= b < m");
    const double fx = f_r(x);
    std::vector<double> scores(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const DenseVector moved = x - eta * reports[i];
        scores[i] = fx - f_r(moved) - rho * squared_norm(reports[i]);
    }
    // Keep the m-b highest scores, ties by lowest index.
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return scores[a] > scores[c]; });
    const std::size_t keep = reports.size() - static_cast<std::size_t>(b);
    DenseVector sum(reports[0].dim());
    for (std::size_t q = 0; q < keep; ++q) sum += reports[order[q]];
    sum *= 1.0 / static_cast<double>(keep);
    return sum;
}

double theoretical_threshold(long T, int m, double p) {
    return theoretical_threshold(T, T, m, p);
}

double theoretical_threshold(long T, long log_T, int m, double p) {
    if (T < 1 || log_T < 1) throw std::invalid_argument("theoretical_threshold: T must be >= 1");
    if (m < 1) throw std::invalid_argument("theoretical_threshold: m must be >= 1");
    // p > 1 is tolerated so the formula structure can be probed with a pinned
    // log argument; run configurations restrict p to (0,1).
    if (!(p > 0.0)) throw std::invalid_argument("theoretical_threshold: p must be > 0");
    const double arg = 16.0 * static_cast<double>(m) * static_cast<double>(log_T) / p;
    return 8.0 * std::sqrt(static_cast<double>(T) * std::log(arg));
}

EmpiricalThreshold empirical_median_threshold(const std::map<int, DenseVector>& accumulators,
                                              int total_m, double floor, double multiplier) {
    if (accumulators.empty())
        throw std::invalid_argument("empirical_median_threshold: empty good set");
    if (floor < 0.0) throw std::invalid_argument("empirical_median_threshold: negative floor");
    if (multiplier <= 0.0)
        throw std::invalid_argument("empirical_median_threshold: multiplier must be > 0");
    const std::size_t count = accumulators.size();
    std::size_t k = static_cast<std::size_t>((total_m + 2 + 1) / 2); // ceil(m/2 + 1)
    k = std::min(k, count);
    EmpiricalThreshold out;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<double> dists(count);
    for (const auto& [id, acc] : accumulators) {
        std::size_t q = 0;
        for (const auto& [jd, other] : accumulators) dists[q++] = distance(acc, other);
        std::nth_element(dists.begin(), dists.begin() + static_cast<long>(k - 1), dists.end());
        const double score = dists[k - 1];
        if (score < best_score) {
            best_score = score;
            out.med_id = id;
        }
    }
    out.med_score = best_score;
    out.threshold = multiplier * std::max(best_score, floor);
    return out;
}

SafeguardState SafeguardState::create(int m, std::size_t dim, const DefenseSpec& spec) {
    SafeguardState st;
    st.total_workers = m;
    st.dim = dim;
    st.double_mode = spec.kind == DefenseKind::SafeguardDouble;
    st.window_short = spec.is_safeguard() ? spec.t0 : 1;
    st.window_long = st.double_mode ? spec.t1 : 0;
    if (st.window_short < 1 || (st.double_mode && st.window_long < st.window_short))
        throw std::invalid_argument("safeguard: windows must satisfy 1 <= T0 <= T1");
    st.good.resize(m);
    for (int i = 0; i < m; ++i) st.good[i] = i;
    for (int i = 0; i < m; ++i) {
        st.acc_short.emplace(i, DenseVector(dim));
        if (st.double_mode) st.acc_long.emplace(i, DenseVector(dim));
    }
    return st;
}

SafeguardThresholds resolve_thresholds(const DefenseSpec& spec, int m, double p) {
    SafeguardThresholds thr;
    switch (spec.threshold_mode) {
    case ThresholdMode::Theoretical: {
        if (spec.kind == DefenseKind::SafeguardDouble) {
            thr.long_threshold =
                2.0 * spec.threshold_scale * theoretical_threshold(spec.t1, spec.t1, m, p);
            thr.short_threshold =
                2.0 * spec.threshold_scale * theoretical_threshold(spec.t0, spec.t1, m, p);
        } else {
            thr.short_threshold =
                2.0 * spec.threshold_scale * theoretical_threshold(spec.t0, spec.t0, m, p);
        }
        break;
    }
    case ThresholdMode::Fixed:
        thr.short_threshold = spec.threshold_fixed0;
        thr.long_threshold = spec.threshold_fixed1;
        break;
    case ThresholdMode::Empirical:
        break; // per-round, derived from the accumulators
    }
    return thr;
}

namespace {

// Median radius for the majority rule in theoretical/fixed mode: half the
// ejection radius (the rule admits within D, ejects beyond 2D).
struct GuardDecision {
    int med_id = -1;
    bool fallback = false;
};

GuardDecision pick_median(const std::map<int, DenseVector>& accs, const std::vector<int>& good,
                          int total_m, double median_radius, double emp_floor, double emp_mult) {
    GuardDecision out;
    // Lowest-indexed member around which a strict majority of all machines
    // concentrates.
    for (int i : good) {
        const DenseVector& ci = accs.at(i);
        int close = 0;
        for (int j : good)
            if (distance(accs.at(j), ci) <= median_radius) ++close;
        if (2 * close > total_m) {
            out.med_id = i;
            return out;
        }
    }
    // No member satisfies the majority rule; fall back to the order-statistic
    // selection for this round and report the event.
    out.fallback = true;
    out.med_id = empirical_median_threshold(accs, total_m, emp_floor, emp_mult).med_id;
    return out;
}

} // namespace

SafeguardRoundInfo safeguard_step(SafeguardState& state, const std::map<int, DenseVector>& reports,
                                  long t, const DefenseSpec& spec, double p) {
    if (state.good.empty())
        throw std::runtime_error("safeguard_step: the good set is empty");
    if (reports.size() != state.good.size())
        throw std::invalid_argument("safeguard_step: reports must cover exactly the good set");
    for (int i : state.good)
        if (reports.find(i) == reports.end())
            throw std::invalid_argument("safeguard_step: missing report for a good worker");

    const std::size_t dim = state.dim;
    const double good_count = static_cast<double>(state.good.size());

    // Window anchors: each accumulator restarts at multiples of its window.
    if (state.double_mode && state.window_long > 0 && t % state.window_long == 0)
        for (auto& [id, acc] : state.acc_long) acc = DenseVector(dim);
    if (t % state.window_short == 0)
        for (auto& [id, acc] : state.acc_short) acc = DenseVector(dim);

    SafeguardRoundInfo info;
    info.direction = DenseVector(dim);
    for (int i : state.good) {
        const DenseVector& r = reports.at(i);
        info.direction += r;
        DenseVector scaled = r;
        scaled *= 1.0 / good_count;
        state.acc_short.at(i) += scaled;
        if (state.double_mode) state.acc_long.at(i) += scaled;
    }
    info.direction *= 1.0 / good_count;

    info.dev_long.assign(state.total_workers, std::numeric_limits<double>::quiet_NaN());
    info.dev_short.assign(state.total_workers, std::numeric_limits<double>::quiet_NaN());

    const SafeguardThresholds thr = resolve_thresholds(spec, state.total_workers, p);
    const bool empirical = spec.threshold_mode == ThresholdMode::Empirical;

    auto run_guard = [&](const std::map<int, DenseVector>& accs, double fixed_threshold,
                         std::vector<double>& devs, int& med_out,
                         std::vector<int>& eject_set) {
        double eject_radius = fixed_threshold;
        int med = -1;
        if (empirical) {
            // The accumulator maps hold exactly the current good set.
            const EmpiricalThreshold sel = empirical_median_threshold(
                accs, state.total_workers, spec.threshold_floor, spec.threshold_multiplier);
            med = sel.med_id;
            eject_radius = sel.threshold;
        } else {
            const GuardDecision gd =
                pick_median(accs, state.good, state.total_workers, 0.5 * fixed_threshold,
                            spec.threshold_floor, spec.threshold_multiplier);
            med = gd.med_id;
            if (gd.fallback) {
                info.median_fallback = true;
                ++state.median_fallbacks;
            }
        }
        med_out = med;
        const DenseVector& center = accs.at(med);
        for (int i : state.good) {
            const double dev = distance(accs.at(i), center);
            devs[static_cast<std::size_t>(i)] = dev;
            // Theoretical mode ejects strictly beyond the radius; the
            // order-statistic mode ejects at or beyond it.
            const bool out = empirical ? dev >= eject_radius : dev > eject_radius;
            if (out) eject_set.push_back(i);
        }
    };

    std::vector<int> ejected;
    if (state.double_mode)
        run_guard(state.acc_long, thr.long_threshold, info.dev_long, info.med_long, ejected);
    run_guard(state.acc_short, thr.short_threshold, info.dev_short, info.med_short, ejected);

    std::sort(ejected.begin(), ejected.end());
    ejected.erase(std::unique(ejected.begin(), ejected.end()), ejected.end());
    for (int id : ejected) {
        state.good.erase(std::remove(state.good.begin(), state.good.end(), id), state.good.end());
        state.acc_short.erase(id);
        if (state.double_mode) state.acc_long.erase(id);
        state.ejection_log.push_back({t, id});
    }
    info.ejected = std::move(ejected);
    return info;
}

void reset_good(SafeguardState& state) {
    state.good.clear();
    state.acc_short.clear();
    state.acc_long.clear();
    for (int i = 0; i < state.total_workers; ++i) {
        state.good.push_back(i);
        state.acc_short.emplace(i, DenseVector(state.dim));
        if (state.double_mode) state.acc_long.emplace(i, DenseVector(state.dim));
    }
}

} // namespace sgsim
