#include "sgsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "sgsim/config.hpp"

namespace sgsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::pair<std::string, std::vector<std::string>> split_entry(const std::string& entry) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : entry) {
        if (c == ':') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(trim(cur));
    const std::string name = parts.front();
    parts.erase(parts.begin());
    return {name, parts};
}

double arg_num(const std::vector<std::string>& args, std::size_t idx, double fallback,
               const std::string& entry) {
    if (idx >= args.size()) return fallback;
    try {
        return std::stod(args[idx]);
    } catch (const std::exception&) {
        throw ConfigError(entry, "bad numeric parameter '" + args[idx] + "'");
    }
}

} // namespace

ExperimentConfig apply_attack_entry(const ExperimentConfig& base, const std::string& entry) {
    ExperimentConfig cfg = base;
    auto [name, args] = split_entry(entry);
    if (name == "honest") {
        cfg.attack.kind = AttackKind::Honest;
    } else if (name == "sign_flip") {
        cfg.attack.kind = AttackKind::SignFlip;
    } else if (name == "rescale") {
        cfg.attack.kind = AttackKind::Rescale;
        cfg.attack.rescale_factor = arg_num(args, 0, cfg.attack.rescale_factor, entry);
    } else if (name == "delayed") {
        cfg.attack.kind = AttackKind::DelayedGradient;
        cfg.attack.delay = static_cast<long>(arg_num(args, 0, static_cast<double>(cfg.attack.delay), entry));
    } else if (name == "variance") {
        cfg.attack.kind = AttackKind::VarianceAttack;
        cfg.attack.z_max = arg_num(args, 0, cfg.attack.z_max, entry);
    } else if (name == "label_flip") {
        cfg.attack.kind = AttackKind::LabelFlip;
    } else {
        throw ConfigError("sweep_attacks", "unknown attack entry '" + entry + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig apply_defense_entry(const ExperimentConfig& base, const std::string& entry) {
    ExperimentConfig cfg = base;
    auto [name, args] = split_entry(entry);
    if (name == "mean") {
        cfg.defense.kind = DefenseKind::Mean;
    } else if (name == "geomed") {
        cfg.defense.kind = DefenseKind::GeoMedoid;
    } else if (name == "coord_median") {
        cfg.defense.kind = DefenseKind::CoordMedian;
    } else if (name == "krum") {
        cfg.defense.kind = DefenseKind::Krum;
        cfg.defense.krum_b = static_cast<int>(arg_num(args, 0, cfg.defense.krum_b, entry));
    } else if (name == "zeno") {
        cfg.defense.kind = DefenseKind::Zeno;
        cfg.defense.zeno_b = static_cast<int>(arg_num(args, 0, cfg.defense.zeno_b, entry));
    } else if (name == "safeguard_single") {
        cfg.defense.kind = DefenseKind::SafeguardSingle;
        cfg.defense.t0 = static_cast<long>(
            arg_num(args, 0, static_cast<double>(3 * cfg.iterations_per_epoch), entry));
    } else if (name == "safeguard_double") {
        cfg.defense.kind = DefenseKind::SafeguardDouble;
        cfg.defense.t0 = static_cast<long>(
            arg_num(args, 0, static_cast<double>(cfg.defense.t0), entry));
        cfg.defense.t1 = static_cast<long>(
            arg_num(args, 1, static_cast<double>(cfg.defense.t1), entry));
    } else {
        throw ConfigError("sweep_defenses", "unknown defense entry '" + entry + "'");
    }
    cfg.validate();
    return cfg;
}

SweepSpec parse_sweep(const std::string& text) {
    // Pull the sweep_* keys out; the remainder is a plain experiment config.
    std::istringstream in(text);
    std::string line, base_text, attacks, defenses, seeds;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line.substr(0, line.find('#')));
        const std::size_t eq = stripped.find('=');
        const std::string key = eq == std::string::npos ? "" : trim(stripped.substr(0, eq));
        if (key == "sweep_attacks") {
            attacks = trim(stripped.substr(eq + 1));
        } else if (key == "sweep_defenses") {
            defenses = trim(stripped.substr(eq + 1));
        } else if (key == "sweep_seeds") {
            seeds = trim(stripped.substr(eq + 1));
        } else {
            base_text += line + "\n";
        }
    }
    SweepSpec spec;
    spec.base = parse_config(base_text);
    spec.attacks = split_list(attacks);
    spec.defenses = split_list(defenses);
    for (const std::string& tok : split_list(seeds)) {
        try {
            spec.seeds.push_back(static_cast<std::uint64_t>(std::stoll(tok)));
        } catch (const std::exception&) {
            throw ConfigError("sweep_seeds", "expected integers, got '" + tok + "'");
        }
    }
    if (spec.attacks.empty()) throw ConfigError("sweep_attacks", "missing or empty");
    if (spec.defenses.empty()) throw ConfigError("sweep_defenses", "missing or empty");
    if (spec.seeds.empty()) spec.seeds.push_back(spec.base.master_seed);
    return spec;
}

SweepSpec parse_sweep_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sweep(ss.str());
}

SweepTable run_sweep(const SweepSpec& spec, int jobs) {
    SweepTable table;
    table.attacks = spec.attacks;
    table.defenses = spec.defenses;
    table.cells.resize(spec.attacks.size() * spec.defenses.size());

    struct Task {
        std::size_t cell;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<double>> grads(table.cells.size());
    std::vector<std::vector<double>> caughts(table.cells.size());
    std::vector<std::atomic<int>> diverged(table.cells.size());
    std::vector<ExperimentConfig> cell_config(table.cells.size());

    for (std::size_t r = 0; r < spec.defenses.size(); ++r) {
        for (std::size_t c = 0; c < spec.attacks.size(); ++c) {
            const std::size_t idx = r * spec.attacks.size() + c;
            SweepCell& cell = table.cells[idx];
            cell.attack = spec.attacks[c];
            cell.defense = spec.defenses[r];
            try {
                ExperimentConfig cfg = apply_attack_entry(spec.base, spec.attacks[c]);
                cfg = apply_defense_entry(cfg, spec.defenses[r]);
                cell_config[idx] = cfg;
                cell.valid = true;
                grads[idx].resize(spec.seeds.size());
                caughts[idx].resize(spec.seeds.size());
                for (std::size_t s = 0; s < spec.seeds.size(); ++s)
                    tasks.push_back({idx, spec.seeds[s]});
            } catch (const std::exception& e) {
                cell.valid = false;
                cell.error = e.what();
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t q = next.fetch_add(1);
            if (q >= tasks.size()) return;
            const Task& task = tasks[q];
            ExperimentConfig cfg = cell_config[task.cell];
            cfg.master_seed = task.seed;
            const std::size_t slot =
                static_cast<std::size_t>(std::find(spec.seeds.begin(), spec.seeds.end(), task.seed) -
                                         spec.seeds.begin());
            try {
                const RunResult res = run(cfg, 1);
                grads[task.cell][slot] = res.summary.final_grad_norm;
                caughts[task.cell][slot] = res.summary.caught_count;
                if (res.summary.diverged) diverged[task.cell].fetch_add(1);
            } catch (const std::exception&) {
                grads[task.cell][slot] = std::nan("");
                caughts[task.cell][slot] = std::nan("");
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    for (std::size_t idx = 0; idx < table.cells.size(); ++idx) {
        SweepCell& cell = table.cells[idx];
        if (!cell.valid) continue;
        cell.median_final_grad = median_of(grads[idx]);
        cell.median_caught = median_of(caughts[idx]);
        cell.diverged_runs = diverged[idx].load();
    }
    return table;
}

std::string render_sweep_table(const SweepTable& table) {
    std::ostringstream out;
    out << "defense";
    for (const std::string& a : table.attacks) out << "," << a;
    out << "\n";
    char buf[64];
    for (std::size_t r = 0; r < table.defenses.size(); ++r) {
        out << table.defenses[r];
        for (std::size_t c = 0; c < table.attacks.size(); ++c) {
            const SweepCell& cell = table.cells[r * table.attacks.size() + c];
            if (!cell.valid) {
                out << ",invalid";
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g/%.17g", cell.median_final_grad,
                              cell.median_caught);
                out << "," << buf;
            }
        }
        out << "\n";
    }
    return out.str();
}

} // namespace sgsim
