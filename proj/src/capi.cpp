#include "sgsim.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "sgsim/config.hpp"
#include "sgsim/report.hpp"
#include "sgsim/simulator.hpp"
#include "sgsim/sweep.hpp"
#include "sgsim/verify.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
sgsim_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const sgsim::ConfigError& e) {
        set_error(e.what());
        return SGSIM_ERR_PARSE;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return SGSIM_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SGSIM_ERR_INTERNAL;
    }
}

} // namespace

struct sgsim_config {
    sgsim::ExperimentConfig cfg;
};

struct sgsim_result {
    sgsim::ExperimentConfig cfg;
    sgsim::RunResult result;
};

extern "C" {

const char* sgsim_version(void) { return "1.0.0"; }

const char* sgsim_last_error(void) { return g_last_error.c_str(); }

sgsim_status sgsim_config_parse_string(const char* text, sgsim_config** out) {
    if (!text || !out) {
        set_error("null argument");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto handle = new sgsim_config{sgsim::parse_config(text)};
        *out = handle;
        return SGSIM_OK;
    });
}

sgsim_status sgsim_config_parse_file(const char* path, sgsim_config** out) {
    if (!path || !out) {
        set_error("null argument");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> sgsim_status {
        std::ifstream in(path);
        if (!in) {
            set_error(std::string("cannot open config file: ") + path);
            return SGSIM_ERR_IO;
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        auto handle = new sgsim_config{sgsim::parse_config(text)};
        *out = handle;
        return SGSIM_OK;
    });
}

sgsim_status sgsim_config_set_seed(sgsim_config* config, uint64_t seed) {
    if (!config) {
        set_error("null config");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    config->cfg.master_seed = seed;
    return SGSIM_OK;
}

sgsim_status sgsim_config_render(const sgsim_config* config, char** out_text) {
    if (!config || !out_text) {
        set_error("null argument");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const std::string text = sgsim::render_config(config->cfg);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out_text = buf;
        return SGSIM_OK;
    });
}

void sgsim_config_free(sgsim_config* config) { delete config; }

void sgsim_string_free(char* text) { delete[] text; }

sgsim_status sgsim_run(const sgsim_config* config, int jobs, sgsim_result** out) {
    if (!config || !out) {
        set_error("null argument");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto handle = new sgsim_result{config->cfg, sgsim::run(config->cfg, jobs)};
        *out = handle;
        return SGSIM_OK;
    });
}

sgsim_status sgsim_result_write(const sgsim_result* result, const char* out_dir) {
    if (!result || !out_dir) {
        set_error("null argument");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> sgsim_status {
        try {
            sgsim::write_run_files(result->cfg, result->result, out_dir);
        } catch (const std::exception& e) {
            set_error(e.what());
            return SGSIM_ERR_IO;
        }
        return SGSIM_OK;
    });
}

double sgsim_result_final_grad_norm(const sgsim_result* r) {
    return r ? r->result.summary.final_grad_norm : 0.0;
}

double sgsim_result_final_objective(const sgsim_result* r) {
    return r ? r->result.summary.final_f : 0.0;
}

double sgsim_result_sosp_fraction(const sgsim_result* r) {
    return r ? r->result.summary.sosp_fraction : 0.0;
}

int sgsim_result_caught_count(const sgsim_result* r) {
    return r ? r->result.summary.caught_count : 0;
}

int sgsim_result_diverged(const sgsim_result* r) {
    return r && r->result.summary.diverged ? 1 : 0;
}

long sgsim_result_iterations(const sgsim_result* r) {
    return r ? r->result.summary.iterations_run : 0;
}

long sgsim_result_ejection_count(const sgsim_result* r) {
    return r ? static_cast<long>(r->result.summary.ejections.size()) : 0;
}

long sgsim_result_ejections(const sgsim_result* r, long* iterations, int* workers, long cap) {
    if (!r || !iterations || !workers || cap < 0) return 0;
    const auto& log = r->result.summary.ejections;
    const long n = std::min<long>(cap, static_cast<long>(log.size()));
    for (long i = 0; i < n; ++i) {
        iterations[i] = log[static_cast<std::size_t>(i)].iteration;
        workers[i] = log[static_cast<std::size_t>(i)].worker;
    }
    return n;
}

void sgsim_result_free(sgsim_result* result) { delete result; }

sgsim_status sgsim_sweep_file(const char* sweep_path, const char* out_dir, int jobs) {
    if (!sweep_path || !out_dir) {
        set_error("null argument");
        return SGSIM_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> sgsim_status {
        const sgsim::SweepSpec spec = sgsim::parse_sweep_file(sweep_path);
        const sgsim::SweepTable table = sgsim::run_sweep(spec, jobs);
        std::filesystem::create_directories(out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / "sweep_table.csv", std::ios::binary);
        if (!f) {
            set_error(std::string("cannot write sweep table in: ") + out_dir);
            return SGSIM_ERR_IO;
        }
        f << sgsim::render_sweep_table(table);
        return SGSIM_OK;
    });
}

int sgsim_verify_run(void (*line_cb)(const char* line, void* user), void* user) {
    try {
        int failed = 0;
        sgsim::run_verification([&](const sgsim::CriterionResult& r) {
            if (!r.passed) ++failed;
            if (line_cb) {
                const std::string line = sgsim::format_criterion_line(r);
                line_cb(line.c_str(), user);
            }
        });
        return failed;
    } catch (const std::exception& e) {
        set_error(e.what());
        return -1;
    }
}

} // extern "C"
