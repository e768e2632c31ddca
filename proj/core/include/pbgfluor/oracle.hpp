// oracle.hpp — Exact one-excitation solution of the undriven atom + discretized bath
//
// |psi(t)> = b(t) |2, vac> + sum_l c_l(t) |1, 1_l>, alpha(tau) = sum_l g_l^2 e^{-i w_l tau}.
// The density passed in is rho(w) with alpha(tau) = int rho(w) e^{-i w tau} dw,
// so g_l = sqrt(rho(w_l) dw) on a uniform midpoint grid.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "pbgfluor/algebra.hpp"
#include "pbgfluor/time_grid.hpp"

namespace pbgfluor::oracle {

struct BathDiscretization {
    std::vector<double> omegas;
    std::vector<double> couplings;
    double spacing{0.0};
    double recurrence_time{0.0};       // 2 pi / spacing
    double check_horizon{0.0};
    double reconstruction_error{0.0};  // max |alpha_M - alpha_ref| / |alpha_ref(0)| over [0, check_horizon]

    cplx kernel(double tau) const;     // sum g^2 e^{-i w tau}
};

using Density = std::function<double(double)>;
using KernelReference = std::function<cplx(double)>;

// Uniform midpoint sampling of [lo, hi] with M modes. The reconstruction is
// checked on [0, horizon] against `reference` when given, else against a 4x finer
// sampling of the same density. Throws if horizon exceeds 0.6 of the recurrence
// time or the reconstruction error exceeds max_error.
BathDiscretization discretize_bath(const Density& density, double lo, double hi, std::size_t modes, double horizon,
                                   const KernelReference& reference = {}, double max_error = 0.02);

struct OneExcitationResult {
    TimeGrid grid;
    std::vector<cplx> excited_amplitude;   // b(t_n), Schrodinger picture
    std::vector<double> excited_population;
    std::vector<double> mode_omegas;
    std::vector<double> mode_population;   // |c_l(T)|^2
    double max_norm_drift{0.0};

    // |c_l(T)|^2 / dw: emission line as a density in w.
    std::vector<double> line_density() const;
};

// Fourth-order Runge-Kutta in the interaction picture.
OneExcitationResult one_excitation_exact(const BathDiscretization& bath, double transition_frequency,
                                         const TimeGrid& grid, double norm_tolerance = 1e-8);

} // namespace pbgfluor::oracle
