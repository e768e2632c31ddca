// config.hpp — Sectioned key = value experiment configuration
//
//   # comment
//   [kernel]
//   type = periodic_band_3d
//   g = 0.05
//
// Every key is addressed as section.key. Unknown keys are rejected with the
// nearest valid key as a suggestion; values are validated before any run.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pbgfluor::config {

struct KeySpec {
    std::string_view key;
    std::string_view default_value;
    std::string_view help;
};

// All valid keys in canonical order, with their defaults.
const std::vector<KeySpec>& schema();
bool is_known_key(std::string_view key);
std::string nearest_key(std::string_view key);

// Ordered key -> value map holding explicitly set entries.
class ConfigDocument {
public:
    // Syntax errors carry "<source>:<line>"; unknown keys are rejected.
    static ConfigDocument parse(std::string_view text, std::string_view source);

    void set(const std::string& key, const std::string& value);
    // "section.key=value"
    void apply_override(std::string_view assignment);
    // Entries of `other` replace ours.
    void merge(const ConfigDocument& other);

    std::optional<std::string> get(const std::string& key) const;
    // Explicit value or the schema default.
    std::string value(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

struct KernelSpec {
    std::string type;
    double g{0.0};
    double center{1.0};
    double half_width{1.0};
    std::optional<double> sqrt_beta;
    double edge{0.0};
    double tau_min{0.1};
    double rate{0.0};
    std::string file;
};

struct AtomSpec {
    std::string mode;          // driven | spontaneous
    double epsilon{0.0};
    double detuning{0.0};
    double laser_frequency{1.0};
    double transition_frequency{1.0};
    std::optional<double> frame;
    std::string initial;       // excited | ground | dressed_upper | dressed_lower
};

struct SpatialSpec {
    bool enabled{false};
    double gamma{1.0};
    double lattice_period{1.0};
    double theta{0.0};
    double theta_detector{0.0};
    std::vector<Eigen::Vector3d> k0;
    Eigen::Vector3d direction{1.0, 0.0, 0.0};
    double curvature{1.0};
    std::optional<double> edge;
    double distance{10.0};
};

struct GridSpec {
    double horizon{100.0};
    std::size_t steps{1000};
};

struct OmegaSpec {
    std::optional<double> min;
    std::optional<double> max;
    std::size_t points{801};
};

struct StationarySpec {
    double tolerance{1e-6};
    double probation{0.0};
    double tail_tolerance{1e-3};
    bool taper{false};
};

struct LaplaceSpec {
    double window{2000.0};
    double step{0.05};
    bool infinite{true};
    double tolerance{1e-2};
};

struct OracleSpec {
    bool enabled{false};
    std::size_t modes{4000};
    std::optional<double> lo;
    std::optional<double> hi;
    double max_error{0.02};
};

struct ExperimentConfig {
    std::string name;
    std::string preset;
    std::vector<std::string> pipelines;
    KernelSpec kernel;
    AtomSpec atom;
    SpatialSpec spatial;
    GridSpec grid;
    OmegaSpec omega;
    StationarySpec stationary;
    LaplaceSpec laplace;
    std::optional<double> markov_rate;        // comparison pipeline; auto = pi rho(w_L)
    std::optional<bool> subtract_coherent;    // finite-T; auto = driven
    OracleSpec oracle;
    bool dump_trajectory{false};
    bool dump_correlation{false};

    ConfigDocument document;  // effective entries (explicit ones only)

    bool has_pipeline(std::string_view p) const;
    // Full effective configuration, every key, re-parseable.
    std::string to_text() const;
};

// Defaults filled, presets expanded (run.preset), every value validated.
ExperimentConfig resolve(const ConfigDocument& doc);

ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config_text(std::string_view text, std::string_view source,
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig load_preset(std::string_view name, const std::vector<std::string>& overrides = {});

} // namespace pbgfluor::config
