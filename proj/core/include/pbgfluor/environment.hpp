// environment.hpp — Reservoir memory kernels, their transforms and the detector kernel

#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pbgfluor/algebra.hpp"
#include "pbgfluor/time_grid.hpp"

namespace pbgfluor::environment {

// alpha(tau) = Gamma delta(tau); handled analytically, never sampled.
struct MarkovKernel {
    double rate{0.0};
};

// alpha(tau) = g^2 e^{-i A tau} J0^3(B tau / 3)
struct PeriodicBand3DKernel {
    double coupling{0.0};
    double center{1.0};
    double half_width{1.0};
};

// alpha(tau) = sqrt(beta) e^{i(pi/4 - w_c tau)} / tau^{3/2}, frozen at tau_min below it.
struct ParabolicEdgeKernel {
    double sqrt_beta{0.0};
    double edge{0.0};
    double tau_min{0.1};
};

// Uniform samples alpha(n * step), linearly interpolated.
struct TabulatedKernel {
    double step{0.0};
    std::vector<cplx> values;
};

class CorrelationKernel {
public:
    using Variant = std::variant<MarkovKernel, PeriodicBand3DKernel, ParabolicEdgeKernel, TabulatedKernel>;

    static CorrelationKernel markov(double rate);
    static CorrelationKernel periodic_band_3d(double coupling, double center, double half_width);
    static CorrelationKernel parabolic_edge(double sqrt_beta, double edge, double tau_min);
    // sqrt(beta) = g^2 (6/B)^{3/2} / 8
    static CorrelationKernel parabolic_from_band(double coupling, double half_width, double edge, double tau_min);
    static CorrelationKernel tabulated(double step, std::vector<cplx> values);
    // Header line, then rows "tau,re,im" on a uniform tau grid starting at 0.
    static CorrelationKernel load_csv(const std::filesystem::path& path);

    const Variant& variant() const noexcept { return kernel_; }
    std::string_view variant_name() const noexcept;
    bool is_markov() const noexcept { return std::holds_alternative<MarkovKernel>(kernel_); }
    double markov_rate() const;

    double frame_shift() const noexcept { return frame_shift_; }
    CorrelationKernel with_frame_shift(double shift) const;

    // alpha(tau) e^{i frame_shift tau}; tau >= 0. Throws for the Markov variant.
    cplx evaluate(double tau) const;

    // Largest angular frequency present in alpha (including the frame shift),
    // plus the inverse correlation-time scale. Used for grid checks.
    double bandwidth_rate() const noexcept;

private:
    explicit CorrelationKernel(Variant v) : kernel_(std::move(v)) {}

    Variant kernel_;
    double frame_shift_{0.0};
};

cplx evaluate_kernel(const CorrelationKernel& k, double tau);

// Running trapezoid of int_0^t alpha(tau) e^{i phase tau} dtau, one grid step
// per advance(). Markov: Gamma at every t >= 0 (full endpoint weight).
class MemoryAccumulator {
public:
    MemoryAccumulator(const CorrelationKernel& k, double phase, double dt);

    cplx value() const noexcept { return value_; }
    std::size_t step() const noexcept { return step_; }
    void advance();

private:
    const CorrelationKernel* kernel_;
    double phase_;
    double dt_;
    std::size_t step_{0};
    cplx last_sample_{};
    cplx value_{};
};

// Batch trapezoid over grid points up to t; t must lie on the grid.
cplx memory_coefficient(const CorrelationKernel& k, double phase, double t, const TimeGrid& grid);

// M(phase_j, t_n) for every phase and grid point, filled incrementally.
struct MemoryTable {
    std::vector<double> phases;
    std::vector<std::vector<cplx>> values; // [phase][n]

    const std::vector<cplx>& at_phase(double phase) const;
};

MemoryTable build_memory_table(const CorrelationKernel& k, std::span<const double> phases, const TimeGrid& grid);

struct LaplaceResult {
    cplx value{};
    double tail_change{0.0}; // relative change of the running integral over the last 10% of the window
    bool converged{true};
};

struct LaplaceOptions {
    double window{2000.0};
    double step{0.05};
    bool infinite{false};      // Abel-damped limit T -> infinity
    double tolerance{1e-2};
};

// int_0^T alpha(tau) e^{i w tau} dtau by trapezoid. The transform "at w" pairs
// e^{+i w tau} with alpha; emission at frequency w0 shows up at w = w0.
LaplaceResult kernel_laplace(const CorrelationKernel& k, double omega, const LaplaceOptions& opt);
std::vector<LaplaceResult> kernel_laplace(const CorrelationKernel& k, std::span<const double> omegas,
                                          const LaplaceOptions& opt);

// Spectral density rho(w) with alpha(tau) = int rho(w) e^{-i w tau} dw, recovered
// as Re[int_0^W alpha e^{i w tau}] / pi. Markov gives Gamma / (2 pi).
std::vector<double> spectral_density_check(const CorrelationKernel& k, std::span<const double> omegas,
                                           double window, double step);

// Closed-form density implied by the periodic 3D band (elliptic-integral route):
// rho(w) = g^2 D((w - A) / b) / b, b = B/3, D the density of cos k1 + cos k2 + cos k3.
double band_density_3d(double omega, double coupling, double center, double half_width);
// Density of cos k1 + cos k2 for uniform k on [0, pi].
double cosine_pair_density(double x);

struct SymmetryPoint {
    Eigen::Vector3d k0;
    double theta{0.0};           // angle between k0 and the emitter dipole
    double theta_detector{0.0};  // angle between k0 and the detector dipole
};

// Q = gamma (a / 2 pi)^3 sum_i e^{i k0_i . d} sin^2 theta_i sin^2 theta_i^D
cplx q_constant(double gamma, double lattice_period, std::span<const SymmetryPoint> points,
                const Eigen::Vector3d& displacement);

class SpatialKernelTransform {
public:
    SpatialKernelTransform(cplx q, double curvature, double edge, double distance);

    cplx q() const noexcept { return q_; }
    double curvature() const noexcept { return curvature_; }
    double edge() const noexcept { return edge_; }
    double distance() const noexcept { return distance_; }

    // sqrt(A / |w - w_c|); infinite at the edge.
    double localization_length(double omega) const;
    cplx evaluate(double omega) const;
    SpatialKernelTransform at_distance(double distance) const;

    // Non-empty when d is below the far-field floor (3 lattice periods).
    std::string far_field_warning() const;

    static constexpr double far_field_floor = 3.0;

private:
    cplx q_;
    double curvature_;
    double edge_;
    double distance_;
};

cplx spatial_kernel_ft(const SpatialKernelTransform& s, double omega);

} // namespace pbgfluor::environment
