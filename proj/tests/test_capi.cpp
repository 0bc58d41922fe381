#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sgsim.h"

namespace {

const char* kConfigText =
    "T = 60\n"
    "m = 10\n"
    "byzantine_ids = 6,7,8,9\n"
    "attack = sign_flip\n"
    "defense = safeguard_double\n"
    "threshold_mode = fixed\n"
    "threshold_fixed0 = 8\n"
    "threshold_fixed1 = 8\n"
    "eta = 0.03\n"
    "x0 = 3\n"
    "seed = 11\n";

} // namespace

TEST_CASE("C API runs an experiment end to end") {
    sgsim_config* cfg = nullptr;
    REQUIRE(sgsim_config_parse_string(kConfigText, &cfg) == SGSIM_OK);
    REQUIRE(cfg != nullptr);

    char* rendered = nullptr;
    REQUIRE(sgsim_config_render(cfg, &rendered) == SGSIM_OK);
    CHECK(std::strstr(rendered, "attack = sign_flip") != nullptr);
    sgsim_string_free(rendered);

    sgsim_result* result = nullptr;
    REQUIRE(sgsim_run(cfg, 2, &result) == SGSIM_OK);
    CHECK(sgsim_result_iterations(result) == 60);
    CHECK(sgsim_result_diverged(result) == 0);
    CHECK(sgsim_result_final_grad_norm(result) >= 0.0);
    const long ejections = sgsim_result_ejection_count(result);
    CHECK(ejections >= 0);
    if (ejections > 0) {
        std::vector<long> when(static_cast<std::size_t>(ejections));
        std::vector<int> who(static_cast<std::size_t>(ejections));
        CHECK(sgsim_result_ejections(result, when.data(), who.data(), ejections) == ejections);
    }

    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "sgsim_capi_test";
    std::filesystem::remove_all(dir);
    REQUIRE(sgsim_result_write(result, dir.string().c_str()) == SGSIM_OK);
    CHECK(std::filesystem::exists(dir / "trace.csv"));
    CHECK(std::filesystem::exists(dir / "summary.txt"));
    std::filesystem::remove_all(dir);

    sgsim_result_free(result);
    sgsim_config_free(cfg);
}

TEST_CASE("seed overrides flow through the handle") {
    sgsim_config* cfg = nullptr;
    REQUIRE(sgsim_config_parse_string(kConfigText, &cfg) == SGSIM_OK);
    REQUIRE(sgsim_config_set_seed(cfg, 7) == SGSIM_OK);
    char* rendered = nullptr;
    REQUIRE(sgsim_config_render(cfg, &rendered) == SGSIM_OK);
    CHECK(std::strstr(rendered, "seed = 7") != nullptr);
    sgsim_string_free(rendered);
    sgsim_config_free(cfg);
}

TEST_CASE("parse failures surface error codes and messages") {
    sgsim_config* cfg = nullptr;
    CHECK(sgsim_config_parse_string("T = 10\nno_such_key = 1\n", &cfg) == SGSIM_ERR_PARSE);
    CHECK(std::strlen(sgsim_last_error()) > 0);
    CHECK(std::string(sgsim_last_error()).find("no_such_key") != std::string::npos);
    CHECK(sgsim_config_parse_string(nullptr, &cfg) == SGSIM_ERR_INVALID_ARGUMENT);
    CHECK(sgsim_config_parse_file("/definitely/not/here.cfg", &cfg) == SGSIM_ERR_IO);
    CHECK(sgsim_version() != nullptr);
}

TEST_CASE("sweeps run through the C surface") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "sgsim_capi_sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path spec_path = dir / "sweep.cfg";
    {
        std::ofstream f(spec_path);
        f << "T = 30\nbyzantine_ids = 9\n"
          << "sweep_attacks = honest,sign_flip\n"
          << "sweep_defenses = mean\n"
          << "sweep_seeds = 1,2\n";
    }
    REQUIRE(sgsim_sweep_file(spec_path.string().c_str(), dir.string().c_str(), 2) == SGSIM_OK);
    CHECK(fs::exists(dir / "sweep_table.csv"));
    fs::remove_all(dir);
}
