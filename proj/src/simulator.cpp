#include "sgsim/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

namespace sgsim {

namespace {

constexpr double kDivergenceLimit = 1e12;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

} // namespace

void ExperimentConfig::validate() const {
    if (objective.d == 0) throw std::invalid_argument("config: d must be >= 1");
    if (m < 1) throw std::invalid_argument("config: m must be >= 1");
    if (T < 1) throw std::invalid_argument("config: T must be >= 1");
    if (eta <= 0.0) throw std::invalid_argument("config: eta must be > 0");
    if (nu < 0.0) throw std::invalid_argument("config: nu must be >= 0");
    if (iterations_per_epoch < 1)
        throw std::invalid_argument("config: iterations_per_epoch must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("config: p must be in (0,1)");
    if (epsilon <= 0.0) throw std::invalid_argument("config: epsilon must be > 0");
    if (metrics_cadence < 1) throw std::invalid_argument("config: metrics_cadence must be >= 1");
    if (objective.noise_bound < 0.0) throw std::invalid_argument("config: V must be >= 0");
    for (int id : attack.byzantine_ids)
        if (id < 0 || id >= m)
            throw std::invalid_argument("config: byzantine_ids must lie in [0, m)");
    if (defense.is_safeguard() && defense.threshold_mode == ThresholdMode::Theoretical &&
        2 * attack.byzantine_ids.size() >= static_cast<std::size_t>(m))
        throw std::invalid_argument(
            "config: byzantine_ids must cover less than half the workers in theoretical mode");
    if (defense.kind == DefenseKind::Krum && 2 * defense.krum_b + 2 >= m)
        throw std::invalid_argument("config: krum_b violates 2b+2 < m");
    if (defense.kind == DefenseKind::Zeno && (defense.zeno_b < 0 || defense.zeno_b >= m))
        throw std::invalid_argument("config: zeno_b must satisfy 0 <= b < m");
    if (defense.is_safeguard()) {
        if (defense.t0 < 1) throw std::invalid_argument("config: t0 must be >= 1");
        if (defense.kind == DefenseKind::SafeguardDouble && defense.t1 < defense.t0)
            throw std::invalid_argument("config: t1 must be >= t0");
    }
    if (attack.kind == AttackKind::Rescale && !std::isfinite(attack.rescale_factor))
        throw std::invalid_argument("config: rescale_factor must be finite");
    if (attack.kind == AttackKind::DelayedGradient && attack.delay < 1)
        throw std::invalid_argument("config: delay_D must be >= 1");
    const AttackKind effective = attack.kind == AttackKind::Transient ? attack.transient_inner
                                                                      : attack.kind;
    if (effective == AttackKind::LabelFlip &&
        objective.kind != ObjectiveKind::SyntheticSoftmax)
        throw std::invalid_argument("config: attack label_flip requires the softmax objective");
    if (!x0_values.empty() && x0_values.size() != objective.d)
        throw std::invalid_argument("config: x0 must have exactly d entries");
}

DenseVector ExperimentConfig::initial_point() const {
    if (!x0_values.empty()) return DenseVector(x0_values);
    return DenseVector(objective.d, x0_fill);
}

double ExperimentConfig::eta_at(long t) const {
    const long epoch = t / iterations_per_epoch;
    double value = eta;
    for (const ScheduleStep& s : schedule)
        if (epoch >= s.epoch) value *= s.factor;
    return value;
}

RecipeParams recipe_params(double epsilon, double alpha, int m, int d, double p,
                            const RecipeOverrides& ov) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("recipe_params: epsilon must be > 0");
    if (!(alpha >= 0.0 && alpha < 0.5))
        throw std::invalid_argument("recipe_params: alpha must be in [0, 0.5)");
    if (m < 1) throw std::invalid_argument("recipe_params: m must be >= 1");
    if (d < 1) throw std::invalid_argument("recipe_params: d must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("recipe_params: p must be in (0,1)");

    RecipeParams out;
    DerivedConstants& k = out.constants;
    k.C3 = alpha * alpha + 1.0 / static_cast<double>(m);
    // The horizon comes first so the log factors below have an argument.
    out.T = static_cast<long>(std::ceil(ov.c_T * k.C3 / std::pow(epsilon, 4.0)));
    out.T = std::max<long>(out.T, 1);
    const double Td = static_cast<double>(out.T);
    k.C1 = std::log(Td / p);
    k.C2 = alpha * alpha * std::log(static_cast<double>(m) * Td / p) + std::log(Td / p) / m;
    out.eta = ov.c_eta * epsilon * epsilon / (static_cast<double>(d) * k.C3 * k.C1);
    out.nu = std::sqrt(ov.c_nu * k.C3);
    k.T0 = std::max<long>(1, static_cast<long>(std::ceil(ov.c_T0 / out.eta)));
    k.T1 = std::max<long>(
        k.T0, static_cast<long>(std::ceil(ov.c_T1 / (out.eta * std::sqrt(epsilon)))));
    k.threshold1 = theoretical_threshold(k.T1, k.T1, m, p);
    k.threshold0 = theoretical_threshold(k.T0, k.T1, m, p);
    return out;
}

std::pair<DenseVector, DenseVector> ground_truth_diagnostics(
    const std::vector<int>& good_now, const AttackSpec& attack,
    const std::vector<std::optional<DenseVector>>& reports, const DenseVector& true_grad) {
    DenseVector sigma(true_grad.dim());
    DenseVector delta(true_grad.dim());
    const double denom = static_cast<double>(good_now.size());
    for (int i : good_now) {
        const auto& rep = reports[static_cast<std::size_t>(i)];
        if (!rep) continue;
        DenseVector diff = *rep - true_grad;
        diff *= 1.0 / denom;
        if (attack.is_byzantine(i))
            delta += diff;
        else
            sigma += diff;
    }
    return {sigma, delta};
}

namespace {

struct Engine {
    const ExperimentConfig& config;
    const Objective objective;
    const std::vector<int> all_workers;
    const bool safeguard;
    SafeguardState state;
    PointHistory history;
    DenseVector x;
    DenseVector sigma_sum;
    DenseVector delta_sum;
    long sosp_evaluated = 0;
    long sosp_hits = 0;

    explicit Engine(const ExperimentConfig& cfg)
        : config(cfg),
          objective(cfg.objective),
          all_workers([&] {
              std::vector<int> ids(static_cast<std::size_t>(cfg.m));
              for (int i = 0; i < cfg.m; ++i) ids[static_cast<std::size_t>(i)] = i;
              return ids;
          }()),
          safeguard(cfg.defense.is_safeguard()),
          state(SafeguardState::create(cfg.m, cfg.objective.d, cfg.defense)),
          history(static_cast<std::size_t>(
              cfg.attack.kind == AttackKind::DelayedGradient ||
                      (cfg.attack.kind == AttackKind::Transient &&
                       cfg.attack.transient_inner == AttackKind::DelayedGradient)
                  ? cfg.attack.delay + 1
                  : 1)),
          x(cfg.initial_point()),
          sigma_sum(cfg.objective.d),
          delta_sum(cfg.objective.d) {
        history.push(0, x);
    }

    const std::vector<int>& reporting_set() const {
        return safeguard ? state.good : all_workers;
    }

    /// Computes the reports of every member of the reporting set at iteration
    /// t. Honest members first (so colluding attackers can read them), then
    /// the byzantine members; each stage may fan out over threads.
    void compute_reports(long t, int jobs, std::vector<std::optional<DenseVector>>& reports,
                         std::vector<DenseVector>& honest_reports) const {
        const std::vector<int>& members = reporting_set();
        std::vector<int> honest_ids, byz_ids;
        for (int i : members)
            (config.attack.is_byzantine(i) ? byz_ids : honest_ids).push_back(i);

        reports.assign(static_cast<std::size_t>(config.m), std::nullopt);
        const DenseVector true_grad =
            config.wlog_clip ? objective.grad(x) : DenseVector();

        std::vector<DenseVector> honest(honest_ids.size());
        parallel_for(honest_ids.size(), jobs, [&](std::size_t q) {
            const int id = honest_ids[q];
            RngStream stream(config.master_seed, static_cast<std::uint64_t>(id),
                             static_cast<std::uint64_t>(t));
            honest[q] = objective.stochastic_grad(x, stream);
        });
        honest_reports = honest;
        for (std::size_t q = 0; q < honest_ids.size(); ++q)
            reports[static_cast<std::size_t>(honest_ids[q])] = honest[q];

        parallel_for(byz_ids.size(), jobs, [&](std::size_t q) {
            const int id = byz_ids[q];
            RngStream stream(config.master_seed, static_cast<std::uint64_t>(id),
                             static_cast<std::uint64_t>(t));
            RoundContext ctx;
            ctx.t = t;
            ctx.x_t = &x;
            ctx.history = &history;
            ctx.honest_reports = &honest_reports;
            ctx.own_gradient = objective.stochastic_grad(x, stream);
            DenseVector rep = byzantine_report(config.attack, ctx, id, objective, stream);
            if (config.wlog_clip)
                rep = clip_to_ball(rep, true_grad, objective.noise_bound());
            reports[static_cast<std::size_t>(id)] = std::move(rep);
        });
    }

    DenseVector defended_direction(long t, const std::vector<std::optional<DenseVector>>& reports,
                                   SafeguardRoundInfo* info, RngStream& zeno_stream) {
        if (safeguard) {
            std::map<int, DenseVector> by_id;
            for (int i : state.good) by_id.emplace(i, *reports[static_cast<std::size_t>(i)]);
            *info = safeguard_step(state, by_id, t, config.defense, config.p);
            return info->direction;
        }
        std::vector<DenseVector> all;
        all.reserve(reports.size());
        for (const auto& rep : reports) all.push_back(*rep);
        switch (config.defense.kind) {
        case DefenseKind::Mean:
            return aggregate_mean(all);
        case DefenseKind::GeoMedoid:
            return geometric_medoid(all);
        case DefenseKind::CoordMedian:
            return coordinate_median(all);
        case DefenseKind::Krum:
            return krum(all, config.defense.krum_b);
        case DefenseKind::Zeno: {
            // Paired objective estimate: the same noise samples back every
            // evaluation in the round.
            std::vector<DenseVector> noise(static_cast<std::size_t>(config.defense.zeno_nr));
            for (auto& z : noise)
                z = uniform_ball_vector(objective.dim(), objective.noise_bound(), zeno_stream);
            auto f_r = [&](const DenseVector& y) {
                double v = objective.eval(y);
                double lin = 0.0;
                for (const DenseVector& z : noise) lin += dot(z, y);
                return v + lin / static_cast<double>(noise.size());
            };
            return zeno(all, config.defense.zeno_b, config.defense.zeno_rho, x,
                        config.eta_at(t), f_r);
        }
        default:
            throw std::logic_error("unhandled defense kind");
        }
    }
};

} // namespace

RunResult run(const ExperimentConfig& config, int jobs) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    Engine eng(config);
    RunResult result;
    result.records.reserve(static_cast<std::size_t>(config.T));
    RunSummary& summary = result.summary;

    std::vector<std::optional<DenseVector>> reports;
    std::vector<DenseVector> honest_reports;

    for (long t = 0; t < config.T; ++t) {
        if (eng.safeguard && config.defense.reset_every && t > 0 &&
            t % *config.defense.reset_every == 0)
            reset_good(eng.state);

        const std::vector<int> good_before = eng.reporting_set();
        eng.compute_reports(t, jobs, reports, honest_reports);

        SafeguardRoundInfo info;
        RngStream zeno_stream(config.master_seed, stream_id::zeno_oracle,
                              static_cast<std::uint64_t>(t));
        const DenseVector direction = eng.defended_direction(t, reports, &info, zeno_stream);

        RngStream master(config.master_seed, stream_id::master_noise,
                         static_cast<std::uint64_t>(t));
        const DenseVector xi = gaussian_vector(config.objective.d, config.nu, master);

        const DenseVector true_grad = eng.objective.grad(eng.x);
        auto [sigma, delta] =
            ground_truth_diagnostics(good_before, config.attack, reports, true_grad);
        eng.sigma_sum += sigma;
        eng.delta_sum += delta;

        IterationRecord rec;
        rec.t = t;
        rec.f = eng.objective.eval(eng.x);
        rec.grad_norm = norm(true_grad);
        rec.good_count = static_cast<int>(good_before.size());
        rec.ejected = info.ejected;
        rec.sigma_norm = norm(sigma);
        rec.delta_norm = norm(delta);
        rec.sigma_prefix_norm = norm(eng.sigma_sum);
        rec.delta_prefix_norm = norm(eng.delta_sum);
        rec.dev_long = info.dev_long;
        rec.dev_short = info.dev_short;
        if (rec.dev_long.empty())
            rec.dev_long.assign(static_cast<std::size_t>(config.m),
                                std::numeric_limits<double>::quiet_NaN());
        if (rec.dev_short.empty())
            rec.dev_short.assign(static_cast<std::size_t>(config.m),
                                 std::numeric_limits<double>::quiet_NaN());
        if (eng.objective.constant_hessian() || t % config.metrics_cadence == 0) {
            rec.hess_min_eig = eng.objective.hessian_min_eig(eng.x);
            rec.sosp_known = true;
            rec.sosp_satisfied = rec.grad_norm <= config.epsilon &&
                                 rec.hess_min_eig >= -std::sqrt(config.epsilon);
            ++eng.sosp_evaluated;
            if (rec.sosp_satisfied) ++eng.sosp_hits;
        }
        result.records.push_back(std::move(rec));

        const double eta_t = config.eta_at(t);
        DenseVector step = xi + direction;
        step *= eta_t;
        eng.x -= step;
        eng.history.push(t + 1, eng.x);

        const double f_now = result.records.back().f;
        if (!eng.x.all_finite() || !std::isfinite(f_now) || std::abs(f_now) > kDivergenceLimit ||
            norm(eng.x) > kDivergenceLimit) {
            summary.diverged = true;
            summary.iterations_run = t + 1;
            break;
        }
        summary.iterations_run = t + 1;
    }

    const DenseVector final_grad = eng.objective.grad(eng.x);
    summary.final_grad_norm = norm(final_grad);
    summary.final_f = eng.objective.eval(eng.x);
    if (!std::isfinite(summary.final_grad_norm) || !std::isfinite(summary.final_f))
        summary.diverged = true;
    summary.sosp_fraction =
        eng.sosp_evaluated > 0
            ? static_cast<double>(eng.sosp_hits) / static_cast<double>(eng.sosp_evaluated)
            : 0.0;
    summary.ejections = eng.state.ejection_log;
    summary.median_fallbacks = eng.state.median_fallbacks;
    std::set<int> caught;
    for (const Ejection& e : eng.state.ejection_log)
        if (config.attack.is_byzantine(e.worker)) caught.insert(e.worker);
    summary.caught_count = static_cast<int>(caught.size());
    summary.final_good = eng.safeguard ? eng.state.good : eng.all_workers;
    summary.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    return result;
}

EscapeResult run_coupled_escape(const ExperimentConfig& config, double delta, double R) {
    ExperimentConfig cfg = config;
    cfg.objective.kind = ObjectiveKind::QuadraticSaddle;
    cfg.objective.delta = delta;
    cfg.validate();
    if (cfg.nu <= 0.0)
        throw std::invalid_argument("coupled escape: nu must be > 0");
    if (R <= 0.0) throw std::invalid_argument("coupled escape: R must be > 0");

    Engine a(cfg);
    Engine b(cfg);
    const DenseVector origin = cfg.initial_point();

    EscapeResult out;
    std::vector<std::optional<DenseVector>> reports;
    std::vector<DenseVector> honest_reports;
    for (long t = 0; t < cfg.T; ++t) {
        for (Engine* eng : {&a, &b}) {
            if (eng->safeguard && cfg.defense.reset_every && t > 0 &&
                t % *cfg.defense.reset_every == 0)
                reset_good(eng->state);
            eng->compute_reports(t, 1, reports, honest_reports);
            SafeguardRoundInfo info;
            RngStream zeno_stream(cfg.master_seed, stream_id::zeno_oracle,
                                  static_cast<std::uint64_t>(t));
            const DenseVector direction = eng->defended_direction(t, reports, &info, zeno_stream);
            RngStream master(cfg.master_seed, stream_id::master_noise,
                             static_cast<std::uint64_t>(t));
            DenseVector xi = gaussian_vector(cfg.objective.d, cfg.nu, master);
            if (eng == &b) xi[0] = -xi[0]; // coupled: mirrored first coordinate
            DenseVector step = xi + direction;
            step *= cfg.eta_at(t);
            eng->x -= step;
            eng->history.push(t + 1, eng->x);
        }
        const double da = distance(a.x, origin);
        const double db = distance(b.x, origin);
        out.max_distance_a = std::max(out.max_distance_a, da);
        out.max_distance_b = std::max(out.max_distance_b, db);
        if (da > R || db > R) {
            out.escaped = true;
            out.t_escape = t + 1;
            break;
        }
    }
    return out;
}

} // namespace sgsim
