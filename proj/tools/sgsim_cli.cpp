// Experiment runner for the Byzantine-resilient SGD simulation library.
// Talks to the core exclusively through the C API in sgsim.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "sgsim.h"

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("SGSIM_OUT");
    return env && *env ? env : "out";
}

void print_line(const char* line, void* user) {
    const bool quiet = user && *static_cast<bool*>(user);
    if (!quiet) std::printf("%s\n", line);
    else if (line && line[0] == 'F') std::printf("%s\n", line); // failures always surface
}

int fail(const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, sgsim_last_error());
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic attack x defense laboratory for Byzantine-resilient "
                 "distributed SGD"};
    app.require_subcommand(1);
    app.footer(
        "Config schema (key = value per line, # comments; see docs/config-schema.md):\n"
        "  objective = quadratic_saddle|double_well|softmax   delta, classes, samples\n"
        "  d, m, T (required), iterations_per_epoch, eta, schedule = epoch:factor,...\n"
        "  nu (perturbation std), V (worker noise bound), epsilon, p, seed\n"
        "  byzantine_ids = comma ids\n"
        "  attack = honest|sign_flip|rescale|delayed|variance|label_flip|transient\n"
        "    rescale_factor, delay_D, z_max (default 0.3), transient_start/stop/inner\n"
        "  defense = mean|geomed|coord_median|krum|zeno|safeguard_single|safeguard_double\n"
        "    krum_b, zeno_b, zeno_rho, zeno_nr, t0, t1, reset_every\n"
        "    threshold_mode = theoretical|empirical|fixed with threshold_scale,\n"
        "    threshold_floor, threshold_multiplier, threshold_fixed0/1\n"
        "  wlog_clip, metrics_cadence, x0 (scalar broadcast or comma list)\n"
        "Sweep files add: sweep_attacks, sweep_defenses (name[:param] entries), sweep_seeds.\n"
        "SGSIM_OUT sets the default output directory.");

    std::string config_path;
    std::string out_dir = default_out_dir();
    std::int64_t seed_override = -1;
    int jobs = 1;
    bool quiet = false;
    app.add_flag("--quiet", quiet, "Suppress progress output");

    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write trace + summary");
    run_cmd->fallthrough();
    run_cmd->add_option("--config", config_path, "Experiment config file (key = value schema)")
        ->required();
    run_cmd->add_option("--out", out_dir, "Output directory (default $SGSIM_OUT or ./out)");
    run_cmd->add_option("--seed", seed_override, "Override the config master seed");
    run_cmd->add_option("--jobs", jobs, "Worker evaluation threads (results identical)");

    auto* sweep_cmd =
        app.add_subcommand("sweep", "Run an attack x defense x seed grid and write the table");
    sweep_cmd->fallthrough();
    sweep_cmd->add_option("--config", config_path, "Sweep file: base config plus sweep_* keys")
        ->required();
    sweep_cmd->add_option("--out", out_dir, "Output directory (default $SGSIM_OUT or ./out)");
    sweep_cmd->add_option("--jobs", jobs, "Concurrent cells");

    auto* verify_cmd =
        app.add_subcommand("verify", "Run the built-in verification suite (one line per check)");
    verify_cmd->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        sgsim_config* cfg = nullptr;
        if (sgsim_config_parse_file(config_path.c_str(), &cfg) != SGSIM_OK)
            return fail("config");
        if (seed_override >= 0)
            sgsim_config_set_seed(cfg, static_cast<std::uint64_t>(seed_override));
        sgsim_result* result = nullptr;
        if (sgsim_run(cfg, jobs, &result) != SGSIM_OK) {
            sgsim_config_free(cfg);
            return fail("run");
        }
        if (sgsim_result_write(result, out_dir.c_str()) != SGSIM_OK) {
            sgsim_result_free(result);
            sgsim_config_free(cfg);
            return fail("write");
        }
        if (!quiet) {
            std::printf("iterations = %ld\n", sgsim_result_iterations(result));
            std::printf("final_grad_norm = %.17g\n", sgsim_result_final_grad_norm(result));
            std::printf("caught_count = %d\n", sgsim_result_caught_count(result));
            std::printf("diverged = %s\n", sgsim_result_diverged(result) ? "true" : "false");
            std::printf("wrote %s/trace.csv and %s/summary.txt\n", out_dir.c_str(),
                        out_dir.c_str());
        }
        sgsim_result_free(result);
        sgsim_config_free(cfg);
        return 0;
    }

    if (sweep_cmd->parsed()) {
        if (sgsim_sweep_file(config_path.c_str(), out_dir.c_str(), jobs) != SGSIM_OK)
            return fail("sweep");
        if (!quiet) std::printf("wrote %s/sweep_table.csv\n", out_dir.c_str());
        return 0;
    }

    if (verify_cmd->parsed()) {
        const int failed = sgsim_verify_run(print_line, &quiet);
        if (failed < 0) return fail("verify");
        if (!quiet) std::printf("%s\n", failed == 0 ? "all criteria passed" : "criteria FAILED");
        return failed == 0 ? 0 : 1;
    }

    return 1;
}
