// spectrum.hpp — Emission spectra from two-time correlations
//
// Sign convention: P(w) = sum W_t W_t' e^{-iw(t-t')} g1(t,t'), g1 = <E^-(t) E^+(t')>,
// so a line emitted at w0 appears at +w0. Stationary pipelines report
// P(w) = |T(w)|^2 S_LL(w - w_L) with S_LL(nu) = 2 Re int_0^smax e^{i nu s} (C_ss(s) - offset) ds
// and the elastic weight |T(w_L)|^2 offset kept out of the curve.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbgfluor/dynamics.hpp"
#include "pbgfluor/environment.hpp"
#include "pbgfluor/time_grid.hpp"

namespace pbgfluor::spectrum {

struct SpectrumResult {
    std::vector<double> omega;               // absolute frequency
    std::vector<double> power;
    std::optional<std::vector<double>> d2_power;
    double coherent_weight{0.0};
    std::string pipeline;
    double horizon{0.0};
    std::optional<double> distance;
    std::string preset;
    std::vector<std::string> flags;
    double max_imag_residue{0.0};

    bool has_flag(const std::string& f) const;
    double max_power() const;
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);
// [w_L - 4 Omega, w_L + 4 Omega], 801 points.
std::vector<double> default_omega_grid(double laser_frequency, double rabi, std::size_t points = 801);

// Detector transfer T(w) on an absolute frequency grid.
std::vector<cplx> transfer_spatial(const environment::SpatialKernelTransform& s, std::span<const double> omegas);
// No-spatial case: alpha(w) of the lab-frame kernel (frame shift removed).
std::vector<cplx> transfer_laplace(const environment::CorrelationKernel& k, std::span<const double> omegas,
                                   const environment::LaplaceOptions& opt, std::vector<std::string>* flags = nullptr);

struct StationaryOptions {
    bool taper{false}; // cosine taper on the s window
};

// S_LL(nu) for each nu.
std::vector<double> incoherent_density(const dynamics::StationaryCorrelation& css, std::span<const double> nus,
                                       const StationaryOptions& opt = {});

// transfer[i] belongs to omegas[i]; transfer_at_laser is T(w_L) for the elastic weight.
SpectrumResult spectrum_stationary(const dynamics::StationaryCorrelation& css, std::span<const cplx> transfer,
                                   cplx transfer_at_laser, std::span<const double> omegas, double laser_frequency,
                                   const StationaryOptions& opt = {});

// Gamma^2 S_LL.
SpectrumResult spectrum_markov(const dynamics::StationaryCorrelation& css, double rate, std::span<const double> omegas,
                               double laser_frequency, const StationaryOptions& opt = {});

struct FiniteTOptions {
    // Replace C_L by its connected part C_L - conj<L(t)> <L(t')> and report the
    // removed elastic piece as coherent_weight.
    bool subtract_coherent{false};
    double residue_tolerance{1e-6};
};

// Finite-T double convolution with the kernel used by the dynamics (its frame
// shift defines the reporting frame: nu = w - frame_shift). Markov kernels use
// the delta (full-weight) rule E^+(t) = Gamma L(t).
// `means` holds <L(t_n)> and is only needed with subtract_coherent.
SpectrumResult spectrum_finite_T(const dynamics::CorrelationField& field, const environment::CorrelationKernel& k,
                                 const TimeGrid& grid, std::span<const double> omegas,
                                 std::span<const cplx> means = {}, const FiniteTOptions& opt = {});

// g1(t,t') = sum w w alpha*(t - tau) alpha(t' - tau') C_L(tau,tau') by two
// lower-triangular Toeplitz products (reference route, O(N^3)).
Eigen::MatrixXcd first_order_correlation(const dynamics::CorrelationField& field,
                                         const environment::CorrelationKernel& k, const TimeGrid& grid);
// P from g1 as a bilinear form; must agree with spectrum_finite_T.
SpectrumResult spectrum_from_g1(const Eigen::MatrixXcd& g1, const environment::CorrelationKernel& k,
                                const TimeGrid& grid, std::span<const double> omegas,
                                double residue_tolerance = 1e-6);

struct Peak {
    std::size_t index{0};
    double omega{0.0};
    double height{0.0};
};

// Interior local maxima with height >= rel_threshold * max.
std::vector<Peak> find_peaks(std::span<const double> omega, std::span<const double> values,
                             double rel_threshold = 0.01);

struct CrosscheckReport {
    bool passed{false};
    std::vector<Peak> finite_peaks;
    std::vector<Peak> stationary_peaks;
    double max_position_error{0.0};   // in bins
    double max_ratio_error{0.0};      // relative, of heights normalized to the tallest peak
    std::string message;
};

CrosscheckReport pipeline_crosscheck(const SpectrumResult& finite, const SpectrumResult& stationary,
                                     double rel_threshold = 0.01, double ratio_tolerance = 0.1);

} // namespace pbgfluor::spectrum
