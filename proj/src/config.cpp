#include "sgsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace sgsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class KeyValues {
public:
    explicit KeyValues(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(line, "expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(line, "empty key");
            if (kv_.count(key)) throw ConfigError(key, "duplicate key");
            kv_[key] = value;
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        consumed_.insert(key);
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) {
        consumed_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, "expected a number, got '" + it->second + "'");
        }
    }

    long integer(const std::string& key, long fallback) {
        consumed_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, "expected an integer, got '" + it->second + "'");
        }
    }

    bool boolean(const std::string& key, bool fallback) {
        consumed_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError(key, "expected true/false");
    }

    void reject_unknown() const {
        for (const auto& [key, value] : kv_)
            if (!consumed_.count(key)) throw ConfigError(key, "unknown key");
    }

private:
    std::map<std::string, std::string> kv_;
    std::set<std::string> consumed_;
};

AttackKind parse_attack_name(const std::string& name, const std::string& key) {
    if (name == "honest") return AttackKind::Honest;
    if (name == "sign_flip") return AttackKind::SignFlip;
    if (name == "rescale") return AttackKind::Rescale;
    if (name == "delayed") return AttackKind::DelayedGradient;
    if (name == "variance") return AttackKind::VarianceAttack;
    if (name == "label_flip") return AttackKind::LabelFlip;
    if (name == "transient") return AttackKind::Transient;
    throw ConfigError(key, "unknown attack '" + name + "'");
}

} // namespace

std::string attack_name(AttackKind kind) {
    switch (kind) {
    case AttackKind::Honest: return "honest";
    case AttackKind::SignFlip: return "sign_flip";
    case AttackKind::Rescale: return "rescale";
    case AttackKind::DelayedGradient: return "delayed";
    case AttackKind::VarianceAttack: return "variance";
    case AttackKind::LabelFlip: return "label_flip";
    case AttackKind::Transient: return "transient";
    }
    return "?";
}

std::string defense_name(DefenseKind kind) {
    switch (kind) {
    case DefenseKind::Mean: return "mean";
    case DefenseKind::GeoMedoid: return "geomed";
    case DefenseKind::CoordMedian: return "coord_median";
    case DefenseKind::Krum: return "krum";
    case DefenseKind::Zeno: return "zeno";
    case DefenseKind::SafeguardSingle: return "safeguard_single";
    case DefenseKind::SafeguardDouble: return "safeguard_double";
    }
    return "?";
}

std::string objective_name(ObjectiveKind kind) {
    switch (kind) {
    case ObjectiveKind::QuadraticSaddle: return "quadratic_saddle";
    case ObjectiveKind::SeparableDoubleWell: return "double_well";
    case ObjectiveKind::SyntheticSoftmax: return "softmax";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text) {
    KeyValues kv(text);
    ExperimentConfig cfg;

    const std::string obj = kv.str("objective", "quadratic_saddle");
    if (obj == "quadratic_saddle")
        cfg.objective.kind = ObjectiveKind::QuadraticSaddle;
    else if (obj == "double_well")
        cfg.objective.kind = ObjectiveKind::SeparableDoubleWell;
    else if (obj == "softmax")
        cfg.objective.kind = ObjectiveKind::SyntheticSoftmax;
    else
        throw ConfigError("objective", "unknown objective '" + obj + "'");

    const long d = kv.integer("d", 10);
    if (d < 1) throw ConfigError("d", "must be >= 1");
    cfg.objective.d = static_cast<std::size_t>(d);
    cfg.objective.delta = kv.num("delta", 0.1);
    cfg.objective.classes = static_cast<int>(kv.integer("classes", 4));
    cfg.objective.samples = static_cast<int>(kv.integer("samples", 64));
    cfg.objective.noise_bound = kv.num("V", 1.0);
    if (cfg.objective.noise_bound < 0.0) throw ConfigError("V", "must be >= 0");

    cfg.m = static_cast<int>(kv.integer("m", 10));
    if (cfg.m < 1) throw ConfigError("m", "must be >= 1");

    for (const std::string& tok : split(kv.str("byzantine_ids", ""), ',')) {
        if (tok.empty()) continue;
        long id = 0;
        try {
            id = std::stol(tok);
        } catch (const std::exception&) {
            throw ConfigError("byzantine_ids", "expected integer ids, got '" + tok + "'");
        }
        if (id < 0 || id >= cfg.m) throw ConfigError("byzantine_ids", "id out of [0, m)");
        cfg.attack.byzantine_ids.insert(static_cast<int>(id));
    }

    cfg.attack.kind = parse_attack_name(kv.str("attack", "honest"), "attack");
    cfg.attack.rescale_factor = kv.num("rescale_factor", 0.6);
    cfg.attack.delay = kv.integer("delay_D", 1000);
    cfg.attack.z_max = kv.num("z_max", 0.3);
    cfg.attack.transient_start = kv.integer("transient_start", 0);
    cfg.attack.transient_stop = kv.integer("transient_stop", 0);
    const std::string inner = kv.str("transient_inner", "honest");
    cfg.attack.transient_inner = parse_attack_name(inner, "transient_inner");
    if (cfg.attack.transient_inner == AttackKind::Transient)
        throw ConfigError("transient_inner", "cannot nest transient attacks");

    const std::string def = kv.str("defense", "safeguard_double");
    if (def == "mean")
        cfg.defense.kind = DefenseKind::Mean;
    else if (def == "geomed")
        cfg.defense.kind = DefenseKind::GeoMedoid;
    else if (def == "coord_median")
        cfg.defense.kind = DefenseKind::CoordMedian;
    else if (def == "krum")
        cfg.defense.kind = DefenseKind::Krum;
    else if (def == "zeno")
        cfg.defense.kind = DefenseKind::Zeno;
    else if (def == "safeguard_single")
        cfg.defense.kind = DefenseKind::SafeguardSingle;
    else if (def == "safeguard_double")
        cfg.defense.kind = DefenseKind::SafeguardDouble;
    else
        throw ConfigError("defense", "unknown defense '" + def + "'");

    cfg.iterations_per_epoch = kv.integer("iterations_per_epoch", 50);
    if (cfg.iterations_per_epoch < 1) throw ConfigError("iterations_per_epoch", "must be >= 1");

    cfg.defense.krum_b = static_cast<int>(kv.integer("krum_b", 0));
    if (cfg.defense.kind == DefenseKind::Krum && 2 * cfg.defense.krum_b + 2 >= cfg.m)
        throw ConfigError("krum_b", "violates 2b+2 < m");
    cfg.defense.zeno_b = static_cast<int>(kv.integer("zeno_b", 0));
    if (cfg.defense.kind == DefenseKind::Zeno &&
        (cfg.defense.zeno_b < 0 || cfg.defense.zeno_b >= cfg.m))
        throw ConfigError("zeno_b", "must satisfy 0 <= b < m");
    cfg.defense.zeno_rho = kv.num("zeno_rho", 0.0005);
    cfg.defense.zeno_nr = static_cast<int>(kv.integer("zeno_nr", 10));
    if (cfg.defense.zeno_nr < 1) throw ConfigError("zeno_nr", "must be >= 1");

    // Window defaults (in iterations): 1 epoch / 6 epochs for the double
    // safeguard, 3 epochs for the single one.
    const long default_t0 = cfg.defense.kind == DefenseKind::SafeguardSingle
                                ? 3 * cfg.iterations_per_epoch
                                : cfg.iterations_per_epoch;
    cfg.defense.t0 = kv.integer("t0", default_t0);
    cfg.defense.t1 = kv.integer("t1", 6 * cfg.iterations_per_epoch);
    if (cfg.defense.is_safeguard()) {
        if (cfg.defense.t0 < 1) throw ConfigError("t0", "must be >= 1");
        if (cfg.defense.kind == DefenseKind::SafeguardDouble && cfg.defense.t1 < cfg.defense.t0)
            throw ConfigError("t1", "must be >= t0");
    }

    const std::string tmode = kv.str("threshold_mode", "empirical");
    if (tmode == "theoretical")
        cfg.defense.threshold_mode = ThresholdMode::Theoretical;
    else if (tmode == "empirical")
        cfg.defense.threshold_mode = ThresholdMode::Empirical;
    else if (tmode == "fixed")
        cfg.defense.threshold_mode = ThresholdMode::Fixed;
    else
        throw ConfigError("threshold_mode", "expected theoretical/empirical/fixed");
    cfg.defense.threshold_scale = kv.num("threshold_scale", 1.0);
    if (cfg.defense.threshold_scale <= 0.0) throw ConfigError("threshold_scale", "must be > 0");
    cfg.defense.threshold_floor = kv.num("threshold_floor", 5.0);
    if (cfg.defense.threshold_floor < 0.0) throw ConfigError("threshold_floor", "must be >= 0");
    cfg.defense.threshold_multiplier = kv.num("threshold_multiplier", 1.5);
    if (cfg.defense.threshold_multiplier <= 0.0)
        throw ConfigError("threshold_multiplier", "must be > 0");
    cfg.defense.threshold_fixed0 = kv.num("threshold_fixed0", 0.0);
    cfg.defense.threshold_fixed1 = kv.num("threshold_fixed1", 0.0);

    const long reset_every = kv.integer("reset_every", 0);
    if (reset_every < 0) throw ConfigError("reset_every", "must be >= 1 when set");
    if (reset_every > 0) cfg.defense.reset_every = reset_every;

    cfg.eta = kv.num("eta", 0.1);
    if (cfg.eta <= 0.0) throw ConfigError("eta", "must be > 0");
    for (const std::string& tok : split(kv.str("schedule", ""), ',')) {
        if (tok.empty()) continue;
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos)
            throw ConfigError("schedule", "expected epoch:factor entries");
        try {
            ScheduleStep step;
            step.epoch = std::stol(tok.substr(0, colon));
            step.factor = std::stod(tok.substr(colon + 1));
            cfg.schedule.push_back(step);
        } catch (const std::exception&) {
            throw ConfigError("schedule", "expected epoch:factor entries, got '" + tok + "'");
        }
    }

    cfg.nu = kv.num("nu", 0.0);
    if (cfg.nu < 0.0) throw ConfigError("nu", "must be >= 0");
    if (!kv.has("T")) throw ConfigError("T", "missing required key");
    cfg.T = kv.integer("T", 0);
    if (cfg.T < 1) throw ConfigError("T", "must be >= 1");
    cfg.epsilon = kv.num("epsilon", 0.1);
    if (cfg.epsilon <= 0.0) throw ConfigError("epsilon", "must be > 0");
    cfg.p = kv.num("p", 0.01);
    if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw ConfigError("p", "must be in (0,1)");
    cfg.master_seed = static_cast<std::uint64_t>(kv.integer("seed", 1));
    cfg.wlog_clip = kv.boolean("wlog_clip", false);
    cfg.metrics_cadence = kv.integer("metrics_cadence", 10);
    if (cfg.metrics_cadence < 1) throw ConfigError("metrics_cadence", "must be >= 1");

    const std::string x0 = kv.str("x0", "0");
    if (x0.find(',') != std::string::npos) {
        for (const std::string& tok : split(x0, ',')) {
            try {
                cfg.x0_values.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("x0", "expected numbers, got '" + tok + "'");
            }
        }
        if (cfg.x0_values.size() != cfg.objective.d)
            throw ConfigError("x0", "expected exactly d entries");
    } else {
        try {
            cfg.x0_fill = std::stod(x0);
        } catch (const std::exception&) {
            throw ConfigError("x0", "expected a number or comma list");
        }
    }

    kv.reject_unknown();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        // validate() prefixes messages with "config: "; surface them under a
        // generic key so CLI users still see which constraint failed.
        throw ConfigError("config", e.what());
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "objective = " << objective_name(cfg.objective.kind) << "\n";
    out << "d = " << cfg.objective.d << "\n";
    out << "delta = " << fmt17(cfg.objective.delta) << "\n";
    out << "classes = " << cfg.objective.classes << "\n";
    out << "samples = " << cfg.objective.samples << "\n";
    out << "V = " << fmt17(cfg.objective.noise_bound) << "\n";
    out << "m = " << cfg.m << "\n";
    {
        out << "byzantine_ids = ";
        bool first = true;
        for (int id : cfg.attack.byzantine_ids) {
            if (!first) out << ",";
            out << id;
            first = false;
        }
        out << "\n";
    }
    out << "attack = " << attack_name(cfg.attack.kind) << "\n";
    out << "rescale_factor = " << fmt17(cfg.attack.rescale_factor) << "\n";
    out << "delay_D = " << cfg.attack.delay << "\n";
    out << "z_max = " << fmt17(cfg.attack.z_max) << "\n";
    out << "transient_start = " << cfg.attack.transient_start << "\n";
    out << "transient_stop = " << cfg.attack.transient_stop << "\n";
    out << "transient_inner = " << attack_name(cfg.attack.transient_inner) << "\n";
    out << "defense = " << defense_name(cfg.defense.kind) << "\n";
    out << "krum_b = " << cfg.defense.krum_b << "\n";
    out << "zeno_b = " << cfg.defense.zeno_b << "\n";
    out << "zeno_rho = " << fmt17(cfg.defense.zeno_rho) << "\n";
    out << "zeno_nr = " << cfg.defense.zeno_nr << "\n";
    out << "t0 = " << cfg.defense.t0 << "\n";
    out << "t1 = " << cfg.defense.t1 << "\n";
    switch (cfg.defense.threshold_mode) {
    case ThresholdMode::Theoretical: out << "threshold_mode = theoretical\n"; break;
    case ThresholdMode::Empirical: out << "threshold_mode = empirical\n"; break;
    case ThresholdMode::Fixed: out << "threshold_mode = fixed\n"; break;
    }
    out << "threshold_scale = " << fmt17(cfg.defense.threshold_scale) << "\n";
    out << "threshold_floor = " << fmt17(cfg.defense.threshold_floor) << "\n";
    out << "threshold_multiplier = " << fmt17(cfg.defense.threshold_multiplier) << "\n";
    out << "threshold_fixed0 = " << fmt17(cfg.defense.threshold_fixed0) << "\n";
    out << "threshold_fixed1 = " << fmt17(cfg.defense.threshold_fixed1) << "\n";
    out << "reset_every = " << (cfg.defense.reset_every ? *cfg.defense.reset_every : 0) << "\n";
    out << "eta = " << fmt17(cfg.eta) << "\n";
    {
        out << "schedule = ";
        bool first = true;
        for (const ScheduleStep& s : cfg.schedule) {
            if (!first) out << ",";
            out << s.epoch << ":" << fmt17(s.factor);
            first = false;
        }
        out << "\n";
    }
    out << "nu = " << fmt17(cfg.nu) << "\n";
    out << "T = " << cfg.T << "\n";
    out << "iterations_per_epoch = " << cfg.iterations_per_epoch << "\n";
    out << "epsilon = " << fmt17(cfg.epsilon) << "\n";
    out << "p = " << fmt17(cfg.p) << "\n";
    out << "seed = " << cfg.master_seed << "\n";
    out << "wlog_clip = " << (cfg.wlog_clip ? "true" : "false") << "\n";
    out << "metrics_cadence = " << cfg.metrics_cadence << "\n";
    {
        out << "x0 = ";
        if (!cfg.x0_values.empty()) {
            bool first = true;
            for (double v : cfg.x0_values) {
                if (!first) out << ",";
                out << fmt17(v);
                first = false;
            }
        } else {
            out << fmt17(cfg.x0_fill);
        }
        out << "\n";
    }
    return out.str();
}

} // namespace sgsim
