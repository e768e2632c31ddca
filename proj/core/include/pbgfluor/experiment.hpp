// experiment.hpp — Run orchestration: config -> dynamics -> spectra -> files

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbgfluor/config.hpp"
#include "pbgfluor/dynamics.hpp"
#include "pbgfluor/environment.hpp"
#include "pbgfluor/oracle.hpp"
#include "pbgfluor/spectrum.hpp"

namespace pbgfluor::experiment {

environment::CorrelationKernel build_kernel(const config::KernelSpec& spec);

// Everything the spectrum stage needs, computed once per dynamics configuration.
struct DynamicsProducts {
    std::optional<algebra::DressedAtom> atom;
    dynamics::TwoLevelModel model;
    environment::CorrelationKernel kernel;        // absolute frequencies
    environment::CorrelationKernel frame_kernel;  // frame shift applied
    TimeGrid grid;
    dynamics::OneTimeTrajectory trajectory;
    std::optional<dynamics::StationaryCorrelation> stationary;
    std::optional<dynamics::CorrelationField> field;
    std::vector<cplx> coupling_means;             // <L(t_n)>
    std::optional<dynamics::StationaryCorrelation> markov_stationary;
    double markov_rate{0.0};
    std::optional<oracle::OneExcitationResult> oracle;
    std::vector<std::string> warnings;
};

struct RunResult {
    config::ExperimentConfig config;
    std::shared_ptr<const DynamicsProducts> dynamics;
    std::vector<spectrum::SpectrumResult> spectra;
    std::optional<spectrum::CrosscheckReport> crosscheck;
    std::vector<std::string> warnings;
};

std::vector<double> omega_grid(const config::ExperimentConfig& cfg);

std::shared_ptr<const DynamicsProducts> run_dynamics(const config::ExperimentConfig& cfg);
RunResult run_spectra(const config::ExperimentConfig& cfg, std::shared_ptr<const DynamicsProducts> dyn);
RunResult run(const config::ExperimentConfig& cfg);

// Keys that only influence the spectrum stage (dynamics can be reused).
bool spectrum_only_key(std::string_view key);

// One result per value; dynamics are shared when `key` is spectrum-only.
// `sink` receives each result as soon as it is ready.
std::vector<RunResult> sweep(const config::ExperimentConfig& base, const std::string& key,
                             const std::vector<std::string>& values,
                             const std::function<void(const RunResult&, std::size_t)>& sink = {});

// Spectrum CSVs, optional dumps and manifest.txt into out_dir. On failure the
// files written so far are removed. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& out_dir,
                                                 double wall_seconds);

// Manifest text: the effective config (re-runnable with --config) preceded by
// comment lines carrying flags and wall time.
std::string manifest_text(const RunResult& result, double wall_seconds);

} // namespace pbgfluor::experiment
