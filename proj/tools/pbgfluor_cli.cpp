// pbgfluor — command-line driver: run / sweep / list-presets / validate

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pbgfluor/config.hpp"
#include "pbgfluor/error.hpp"
#include "pbgfluor/experiment.hpp"
#include "pbgfluor/presets.hpp"

namespace fs = std::filesystem;
using namespace pbgfluor;

namespace {

struct Source {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
};

void add_source_options(CLI::App* cmd, Source& src) {
    auto* c = cmd->add_option("--config", src.config_path, "experiment config file");
    auto* p = cmd->add_option("--preset", src.preset, "named preset (see list-presets)");
    c->excludes(p);
    cmd->add_option("--override", src.overrides, "section.key=value, repeatable")->allow_extra_args(false);
}

config::ExperimentConfig load(const Source& src) {
    if (!src.config_path.empty()) return config::parse_config(src.config_path, src.overrides);
    if (!src.preset.empty()) return config::load_preset(src.preset, src.overrides);
    throw Error("cli", "give --config PATH or --preset NAME");
}

std::string first_comment(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# ", 0) == 0) return line.substr(2);
    return {};
}

std::string sanitize(std::string s) {
    for (char& ch : s)
        if (ch == '/' || ch == ' ' || ch == '\\') ch = '_';
    return s;
}

void report(const experiment::RunResult& r, const std::vector<fs::path>& files) {
    for (const auto& s : r.spectra) {
        std::cout << "  " << s.pipeline << ": " << s.omega.size() << " points";
        if (!s.flags.empty()) {
            std::cout << ", flags:";
            for (const auto& f : s.flags) std::cout << ' ' << f;
        }
        std::cout << '\n';
    }
    if (r.crosscheck) std::cout << "  crosscheck " << (r.crosscheck->passed ? "pass" : "FAIL") << ": " << r.crosscheck->message << '\n';
    for (const auto& w : r.warnings) std::cout << "  warning: " << w << '\n';
    for (const auto& f : files) std::cout << "  wrote " << f.string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fluorescence spectra of a two-level atom in a structured (photonic band-gap) reservoir"};
    app.require_subcommand(1);

    Source run_src;
    std::string run_out;
    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    add_source_options(run_cmd, run_src);
    run_cmd->add_option("--out", run_out, "output directory (default out/<name>)");

    Source sweep_src;
    std::string sweep_out, sweep_key, sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "repeat a run over values of one key");
    add_source_options(sweep_cmd, sweep_src);
    sweep_cmd->add_option("--param", sweep_key, "section.key to sweep")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values (may be empty)")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory (default out/<name>-sweep)");

    auto* list_cmd = app.add_subcommand("list-presets", "list built-in presets");

    Source val_src;
    auto* val_cmd = app.add_subcommand("validate", "check a config and print the effective configuration");
    add_source_options(val_cmd, val_src);

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& n : presets::names()) std::cout << n << "\t" << first_comment(presets::text(n)) << '\n';
            return 0;
        }
        if (val_cmd->parsed()) {
            const auto cfg = load(val_src);
            std::cout << cfg.to_text();
            return 0;
        }
        if (run_cmd->parsed()) {
            const auto cfg = load(run_src);
            const fs::path out = run_out.empty() ? fs::path("out") / sanitize(cfg.name) : fs::path(run_out);
            const auto t0 = std::chrono::steady_clock::now();
            const auto result = experiment::run(cfg);
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const auto files = experiment::write_outputs(result, out, wall);
            std::cout << cfg.name << " (" << wall << " s)\n";
            report(result, files);
            return 0;
        }
        if (sweep_cmd->parsed()) {
            const auto cfg = load(sweep_src);
            std::vector<std::string> values;
            std::stringstream ss(sweep_values);
            for (std::string v; std::getline(ss, v, ',');)
                if (!v.empty()) values.push_back(v);
            const fs::path out = sweep_out.empty() ? fs::path("out") / (sanitize(cfg.name) + "-sweep") : fs::path(sweep_out);
            auto t0 = std::chrono::steady_clock::now();
            experiment::sweep(cfg, sweep_key, values, [&](const experiment::RunResult& r, std::size_t i) {
                const auto t1 = std::chrono::steady_clock::now();
                const double wall = std::chrono::duration<double>(t1 - t0).count();
                t0 = t1;
                const auto dir = out / sanitize(sweep_key + "=" + values[i]);
                const auto files = experiment::write_outputs(r, dir, wall);
                std::cout << sweep_key << " = " << values[i] << " (" << wall << " s)\n";
                report(r, files);
            });
            if (values.empty()) std::cout << "nothing to sweep\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error in " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
