#include <doctest.h>

#include <fstream>
#include <sstream>

#include "sgsim/config.hpp"
#include "sgsim/report.hpp"
#include "sgsim/sweep.hpp"

using namespace sgsim;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "missing file: ", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("minimal document fills documented defaults") {
    try {
        parse_config("eta = 0.1\n"); // T is the one required key
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "T");
    }
    const ExperimentConfig cfg = parse_config("T = 100\n");
    CHECK(cfg.m == 10);
    CHECK(cfg.objective.kind == ObjectiveKind::QuadraticSaddle);
    CHECK(cfg.attack.kind == AttackKind::Honest);
    CHECK(cfg.attack.byzantine_ids.empty());
    CHECK(cfg.defense.kind == DefenseKind::SafeguardDouble);
    CHECK(cfg.defense.threshold_mode == ThresholdMode::Empirical);
    CHECK(cfg.defense.t0 == 50);   // one epoch
    CHECK(cfg.defense.t1 == 300);  // six epochs
    CHECK(cfg.objective.noise_bound == 1.0);
    CHECK(cfg.p == 0.01);
}

TEST_CASE("variance attack defaults its shift to 0.3 deviations") {
    const ExperimentConfig cfg =
        parse_config("T = 10\nattack = variance\nbyzantine_ids = 6,7,8,9\n");
    CHECK(cfg.attack.kind == AttackKind::VarianceAttack);
    CHECK(cfg.attack.z_max == 0.3);
}

TEST_CASE("invalid configurations name the offending key") {
    // Krum fault bound: 2b+2 < m fails for b = 4, m = 10.
    try {
        parse_config("T = 10\ndefense = krum\nkrum_b = 4\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "krum_b");
    }
    try {
        parse_config("T = 10\nattack = nosuch\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "attack");
    }
    try {
        parse_config("T = 10\nbananas = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "bananas");
    }
    CHECK_THROWS_AS(parse_config("T = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("T = 10\np = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("T = 10\nattack = label_flip\nbyzantine_ids = 1\n"),
                    ConfigError); // label flip needs the softmax objective
}

TEST_CASE("configs round-trip through render and parse") {
    ExperimentConfig cfg = parse_config(
        "T = 64\n"
        "objective = softmax\n"
        "d = 8\n"
        "classes = 2\n"
        "m = 8\n"
        "byzantine_ids = 5,6\n"
        "attack = variance\n"
        "z_max = 0.17\n"
        "defense = safeguard_double\n"
        "t0 = 25\n"
        "t1 = 75\n"
        "threshold_mode = theoretical\n"
        "threshold_scale = 0.125\n"
        "eta = 0.271828\n"
        "schedule = 80:0.1,110:0.1\n"
        "nu = 0.0625\n"
        "seed = 99\n"
        "wlog_clip = true\n"
        "x0 = 0.5\n");
    const std::string text = render_config(cfg);
    const ExperimentConfig again = parse_config(text);
    CHECK(render_config(again) == text);
    CHECK(again.attack.z_max == cfg.attack.z_max);
    CHECK(again.master_seed == cfg.master_seed);
    CHECK(again.schedule.size() == 2);
    CHECK(again.wlog_clip);
}

TEST_CASE("trace layout is stable against the golden file") {
    const ExperimentConfig cfg = parse_config(read_file(std::string(SGSIM_TEST_DATA_DIR) +
                                                        "/golden_config.txt"));
    const RunResult res = run(cfg);
    const std::string expected = read_file(std::string(SGSIM_TEST_DATA_DIR) +
                                           "/golden_trace.csv");
    CHECK(render_trace(cfg, res) == expected);
}

TEST_CASE("summaries are identical across reruns except wall time") {
    const ExperimentConfig cfg = parse_config("T = 40\nbyzantine_ids = 8,9\nattack = sign_flip\n");
    auto strip_wall = [](const std::string& text) {
        std::istringstream in(text);
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("wall_time_ms", 0) != 0) out << line << "\n";
        return out.str();
    };
    const std::string a = render_summary(cfg, run(cfg));
    const std::string b = render_summary(cfg, run(cfg));
    CHECK(strip_wall(a) == strip_wall(b));
    CHECK(a.find("config.attack = sign_flip") != std::string::npos);
    CHECK(a.find("caught_count") != std::string::npos);
}

TEST_CASE("sweep of a single cell reduces to that run's summary") {
    SweepSpec spec;
    spec.base = parse_config("T = 40\nbyzantine_ids = 8,9\n");
    spec.attacks = {"sign_flip"};
    spec.defenses = {"mean"};
    spec.seeds = {7};
    const SweepTable table = run_sweep(spec, 1);
    REQUIRE(table.cells.size() == 1);
    CHECK(table.cells[0].valid);
    ExperimentConfig cell = apply_attack_entry(spec.base, "sign_flip");
    cell = apply_defense_entry(cell, "mean");
    cell.master_seed = 7;
    const RunResult direct = run(cell);
    CHECK(table.cells[0].median_final_grad ==
          doctest::Approx(direct.summary.final_grad_norm).epsilon(1e-15));
}

TEST_CASE("sweep grids record invalid cells and honest columns catch nobody") {
    SweepSpec spec;
    spec.base = parse_config("T = 60\nbyzantine_ids = 6,7,8,9\nthreshold_floor = 0.8\n");
    spec.attacks = {"honest", "sign_flip"};
    spec.defenses = {"krum:4", "safeguard_double", "mean"};
    spec.seeds = {1, 2, 3};
    const SweepTable table = run_sweep(spec, 2);
    REQUIRE(table.cells.size() == 6);
    // Row 0: krum with b=4 at m=10 violates 2b+2 < m in every column.
    CHECK_FALSE(table.cells[0].valid);
    CHECK_FALSE(table.cells[1].valid);
    // Honest column of the safeguard row catches nobody.
    const SweepCell& honest_guard = table.cells[2];
    CHECK(honest_guard.valid);
    CHECK(honest_guard.attack == "honest");
    CHECK(honest_guard.median_caught == 0.0);
    const std::string rendered = render_sweep_table(table);
    CHECK(rendered.find("invalid") != std::string::npos);
    CHECK(rendered.rfind("defense,honest,sign_flip\n", 0) == 0);
}

TEST_CASE("sweep tables are order independent") {
    SweepSpec spec;
    spec.base = parse_config("T = 30\nbyzantine_ids = 9\n");
    spec.attacks = {"honest", "sign_flip", "variance"};
    spec.defenses = {"mean", "coord_median"};
    spec.seeds = {1, 2};
    const std::string serial = render_sweep_table(run_sweep(spec, 1));
    const std::string parallel = render_sweep_table(run_sweep(spec, 4));
    CHECK(serial == parallel);
}

TEST_CASE("sweep spec parsing validates its keys") {
    CHECK_THROWS_AS(parse_sweep("T = 10\nsweep_defenses = mean\n"), ConfigError);
    const SweepSpec spec = parse_sweep(
        "T = 10\nsweep_attacks = honest\nsweep_defenses = mean\nsweep_seeds = 4,5\n");
    CHECK(spec.seeds.size() == 2);
    CHECK_THROWS_AS(apply_defense_entry(spec.base, "zeno:99"), std::exception);
}
