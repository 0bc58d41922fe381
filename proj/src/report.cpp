#include "sgsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgsim/config.hpp"

namespace sgsim {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string opt17(double v) {
    return std::isnan(v) ? std::string() : fmt17(v);
}

} // namespace

std::string render_trace(const ExperimentConfig& config, const RunResult& result) {
    std::ostringstream out;
    out << "t,f,grad_norm,hess_min_eig,good_count,ejected_ids,sigma_norm,delta_norm";
    for (int i = 0; i < config.m; ++i) out << ",dev_A_" << i;
    for (int i = 0; i < config.m; ++i) out << ",dev_B_" << i;
    out << "\n";
    for (const IterationRecord& rec : result.records) {
        out << rec.t << "," << fmt17(rec.f) << "," << fmt17(rec.grad_norm) << ","
            << opt17(rec.hess_min_eig) << "," << rec.good_count << ",";
        for (std::size_t q = 0; q < rec.ejected.size(); ++q) {
            if (q) out << ";";
            out << rec.ejected[q];
        }
        out << "," << fmt17(rec.sigma_norm) << "," << fmt17(rec.delta_norm);
        for (int i = 0; i < config.m; ++i)
            out << "," << opt17(rec.dev_long[static_cast<std::size_t>(i)]);
        for (int i = 0; i < config.m; ++i)
            out << "," << opt17(rec.dev_short[static_cast<std::size_t>(i)]);
        out << "\n";
    }
    return out.str();
}

std::string render_summary(const ExperimentConfig& config, const RunResult& result) {
    std::ostringstream out;
    std::istringstream cfg_lines(render_config(config));
    std::string line;
    while (std::getline(cfg_lines, line)) out << "config." << line << "\n";
    const RunSummary& s = result.summary;
    out << "final_grad_norm = " << fmt17(s.final_grad_norm) << "\n";
    out << "final_f = " << fmt17(s.final_f) << "\n";
    out << "sosp_fraction = " << fmt17(s.sosp_fraction) << "\n";
    out << "ejections = ";
    for (std::size_t q = 0; q < s.ejections.size(); ++q) {
        if (q) out << ";";
        out << s.ejections[q].iteration << ":" << s.ejections[q].worker;
    }
    out << "\n";
    out << "caught_count = " << s.caught_count << "\n";
    out << "diverged = " << (s.diverged ? "true" : "false") << "\n";
    out << "wall_time_ms = " << fmt17(s.wall_time_ms) << "\n";
    return out.str();
}

void write_run_files(const ExperimentConfig& config, const RunResult& result,
                     const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    {
        std::ofstream f(dir / "trace.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write trace file in: " + out_dir);
        f << render_trace(config, result);
    }
    {
        std::ofstream f(dir / "summary.txt", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write summary file in: " + out_dir);
        f << render_summary(config, result);
    }
}

} // namespace sgsim
