// dynamics.hpp — Weak-coupling Heisenberg evolution of mean values and two-time correlations
//
// For a basis element A the one-time equation is
//   d<A>/dt = i<[H,A]> + <Lt^dag [A,L]> + <[L^dag,A] Lt>,
//   Lt(t)   = int_0^t dtau alpha(t - tau) V_{tau - t} L,
// which for a diagonalizable H reduces to three scalar memory integrals at the
// phases 0 and +-(h_1 - h_0). The two-time equation adds
//   <[L^dag, E_k](t1) [E_m, Lh(t1,t2)](t2)>,  Lh = int_0^{t2} dtau alpha(t1 - tau) V_{tau - t2} L,
// which couples both indices of C_km(t1, t2) = <E_k(t1) E_m(t2)>.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pbgfluor/algebra.hpp"
#include "pbgfluor/environment.hpp"
#include "pbgfluor/time_grid.hpp"

namespace pbgfluor::dynamics {

using algebra::Coeffs;
using algebra::SystemOperator;
using Matrix4 = Eigen::Matrix4cd;
using State = Eigen::Vector2cd;

// The two-level problem in its working frame. Kernels passed to the solver
// must carry frame_shift = frame_frequency; spectra are reported at
// omega = frame_frequency + nu.
struct TwoLevelModel {
    SystemOperator hamiltonian;
    SystemOperator coupling;
    State initial_state;
    double frame_frequency{0.0};

    // Laser frame, dressed basis; default initial state is the bare excited level.
    static TwoLevelModel driven(const algebra::DressedAtom& atom);
    static TwoLevelModel driven(const algebra::DressedAtom& atom, const State& initial_state);
    // Undriven atom (L = sigma12) in a frame rotating at frame_frequency, excited start.
    static TwoLevelModel spontaneous(double transition_frequency, double frame_frequency);
};

// <E_k(t_n)> for every grid point, basis order (R11, R12, R21, R22).
struct OneTimeTrajectory {
    TimeGrid grid;
    State initial_state;
    std::vector<Coeffs> values;
    std::vector<std::string> warnings;

    cplx mean(const SystemOperator& x, std::size_t n) const { return x.expectation(values[n]); }
};

// Expectations of E_k for a pure state.
Coeffs basis_means(const State& psi);

// C_km = <E_k E_m> from one-time means (E_k E_m = sum_j mu_km^j E_j).
Matrix4 equal_time_contraction(const Coeffs& means);

class WeakCouplingSolver {
public:
    WeakCouplingSolver(SystemOperator coupling, SystemOperator hamiltonian,
                       environment::CorrelationKernel kernel, TimeGrid grid);

    const TimeGrid& grid() const noexcept { return grid_; }
    const environment::CorrelationKernel& kernel() const noexcept { return kernel_; }
    const SystemOperator& coupling() const noexcept { return coupling_; }
    const SystemOperator& hamiltonian() const noexcept { return hamiltonian_; }
    // h_1 - h_0 of the system Hamiltonian (2 Omega for the dressed atom).
    double level_splitting() const noexcept { return splitting_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    // d<E>/dt = G(t_n) <E>
    Matrix4 generator(std::size_t n) const;
    // Lt(t_n) above.
    SystemOperator memory_operator(std::size_t n) const;
    // Lh(t_n1, t_n2) above; zero for the Markov kernel.
    SystemOperator correlation_memory_operator(std::size_t n1, std::size_t n2) const;

    OneTimeTrajectory evolve_one_time(const State& psi0) const;

    // C(t1, t_row) for t1 = t_row .. T (element i holds t1 = t_{row + i}).
    std::vector<Matrix4> evolve_two_time(const OneTimeTrajectory& traj, std::size_t row) const;

    // <A(t1) B(t_row)> along the same row, contracted on the fly.
    std::vector<cplx> correlation_row(const OneTimeTrajectory& traj, std::size_t row,
                                      const SystemOperator& a, const SystemOperator& b) const;

private:
    Matrix4 build_generator(std::size_t n) const;
    Matrix4 two_time_rhs(std::size_t n1, std::size_t n2, const Matrix4& c) const;

    SystemOperator coupling_;
    SystemOperator hamiltonian_;
    environment::CorrelationKernel kernel_;
    TimeGrid grid_;

    algebra::Matrix2 eigvecs_;           // columns: eigenbasis of H
    algebra::Matrix2 coupling_eig_;      // L in the eigenbasis
    double splitting_{0.0};
    double phase_of_[2][2]{};            // memory phase for entry (i, j): -(h_i - h_j)
    std::size_t phase_slot_[2][2]{};
    environment::MemoryTable memory_;
    Matrix4 free_part_;                  // rows: expand(i[H, E_k])
    std::vector<Matrix4> generators_;    // G(t_n), built once
    SystemOperator comm_e_l_[4];         // [E_k, L]
    SystemOperator comm_ld_e_[4];        // [L^dag, E_k]
    Matrix4 left_factor_;                // rows: expand([L^dag, E_k])
    Matrix4 right_basis_[4];             // rows m: expand([E_m, E_b]) for b = 0..3
    bool diagonal_h_{true};
    std::vector<std::string> warnings_;
};

OneTimeTrajectory evolve_one_time(const State& psi0, const SystemOperator& coupling, const SystemOperator& hamiltonian,
                                  const environment::CorrelationKernel& kernel, const TimeGrid& grid);

std::vector<Matrix4> evolve_two_time(const OneTimeTrajectory& traj, double t2, const SystemOperator& coupling,
                                     const SystemOperator& hamiltonian, const environment::CorrelationKernel& kernel,
                                     const TimeGrid& grid);

// Lower triangle C(t_i, t_j), i >= j, with hermitian completion above it.
class TwoTimeCorrelation {
public:
    TwoTimeCorrelation(TimeGrid grid, std::vector<std::vector<Matrix4>> rows);

    const TimeGrid& grid() const noexcept { return grid_; }
    Matrix4 at(std::size_t i, std::size_t j) const;

private:
    TimeGrid grid_;
    std::vector<std::vector<Matrix4>> rows_; // rows_[j][i - j]
};

TwoTimeCorrelation compute_two_time(const WeakCouplingSolver& solver, const OneTimeTrajectory& traj,
                                    std::size_t workers);

// C_L(t_i, t_j) = <L^dag(t_i) L(t_j)> on the full square.
using CorrelationField = Eigen::MatrixXcd;

CorrelationField correlation_of_L(const TwoTimeCorrelation& corr, const SystemOperator& coupling);

// Same field computed row by row without storing the 4x4 triangle.
CorrelationField correlation_field(const WeakCouplingSolver& solver, const OneTimeTrajectory& traj,
                                   std::size_t workers);

struct StationaryOptions {
    double tolerance{1e-6};  // per unit time, every component
    double probation{0.0};   // <= 0: 5 / (h_1 - h_0)
    double tail_tolerance{1e-3}; // relative to |C_ss(0) - offset|
};

// C_ss(s) = <L^dag(t*) L(t* + s)>, s = 0 .. T - t*.
struct StationaryCorrelation {
    double step{0.0};
    std::vector<cplx> values;
    double offset{0.0};        // |<L>_ss|^2
    std::size_t t_star_index{0};
    double t_star{0.0};
    double tail_residual{0.0};
    bool tail_decayed{true};
    // Mean of C_ss over the last 10% of the window, and whether it is flat there
    // (within tail_tolerance of the initial variance). A settled asymptote above
    // the offset means a frozen (non-relaxing) population: a quasi-elastic part.
    cplx asymptote{};
    bool settled{false};

    // Value removed before transforming: the settled asymptote when the tail
    // has not decayed to the offset but is flat, otherwise the offset.
    double subtracted() const noexcept { return (!tail_decayed && settled) ? asymptote.real() : offset; }
};

StationaryCorrelation stationary_correlation(const WeakCouplingSolver& solver, const OneTimeTrajectory& traj,
                                             const StationaryOptions& opt = {});

// First grid index n at which the trajectory has been steady (all components
// changing slower than tolerance per unit time) for a full probation window;
// throws when that happens after 0.6 T.
std::size_t detect_steady_state(const OneTimeTrajectory& traj, double tolerance, double probation);

} // namespace pbgfluor::dynamics
