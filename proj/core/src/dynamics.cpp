#include "pbgfluor/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbgfluor/error.hpp"
#include "pbgfluor/parallel.hpp"

namespace pbgfluor::dynamics {

namespace {

Error dyn_error(const std::string& msg) { return Error("dynamics", msg); }

bool all_finite(const Matrix4& m) { return m.allFinite(); }
bool all_finite(const Coeffs& v) { return v.allFinite(); }

} // namespace

TwoLevelModel TwoLevelModel::driven(const algebra::DressedAtom& atom) {
    return driven(atom, algebra::bare_state_in_dressed(2, atom));
}

TwoLevelModel TwoLevelModel::driven(const algebra::DressedAtom& atom, const State& initial_state) {
    return {algebra::dressed_hamiltonian(atom), algebra::coupling_operator(atom), initial_state,
            atom.laser_frequency};
}

TwoLevelModel TwoLevelModel::spontaneous(double transition_frequency, double frame_frequency) {
    // Bare basis: |1> ground, |2> excited; (w12 - frame)/2 sigma3.
    const double detuning = transition_frequency - frame_frequency;
    return {0.5 * detuning * SystemOperator::R3(), SystemOperator::R12(), State(0.0, 1.0), frame_frequency};
}

Coeffs basis_means(const State& psi) {
    // <R_ij> = conj(psi_i) psi_j
    Coeffs m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(algebra::basis_index(i, j)) = std::conj(psi(i)) * psi(j);
    return m;
}

Matrix4 equal_time_contraction(const Coeffs& means) {
    // R_ab R_cd = delta_bc R_ad
    Matrix4 c = Matrix4::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d)
                c(algebra::basis_index(a, b), algebra::basis_index(b, d)) = means(algebra::basis_index(a, d));
    return c;
}

WeakCouplingSolver::WeakCouplingSolver(SystemOperator coupling, SystemOperator hamiltonian,
                                       environment::CorrelationKernel kernel, TimeGrid grid)
    : coupling_(std::move(coupling)), hamiltonian_(std::move(hamiltonian)), kernel_(std::move(kernel)),
      grid_(grid) {
    if (!hamiltonian_.is_hermitian(1e-12)) throw dyn_error("H_S must be hermitian");

    const auto& h = hamiltonian_.matrix();
    double levels[2];
    diagonal_h_ = std::abs(h(0, 1)) == 0.0 && std::abs(h(1, 0)) == 0.0;
    if (diagonal_h_) {
        eigvecs_ = algebra::Matrix2::Identity();
        levels[0] = h(0, 0).real();
        levels[1] = h(1, 1).real();
    } else {
        Eigen::SelfAdjointEigenSolver<algebra::Matrix2> es(h);
        eigvecs_ = es.eigenvectors();
        levels[0] = es.eigenvalues()(0);
        levels[1] = es.eigenvalues()(1);
    }
    splitting_ = levels[1] - levels[0];
    coupling_eig_ = eigvecs_.adjoint() * coupling_.matrix() * eigvecs_;

    std::vector<double> phases;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double p = -(levels[i] - levels[j]);
            phase_of_[i][j] = p;
            auto it = std::find(phases.begin(), phases.end(), p);
            if (it == phases.end()) {
                phase_slot_[i][j] = phases.size();
                phases.push_back(p);
            } else {
                phase_slot_[i][j] = static_cast<std::size_t>(it - phases.begin());
            }
        }
    memory_ = environment::build_memory_table(kernel_, phases, grid_);

    const SystemOperator ld = coupling_.adjoint();
    for (int k = 0; k < 4; ++k) {
        const SystemOperator e = SystemOperator::basis(k);
        free_part_.row(k) = (cplx(0.0, 1.0) * algebra::commutator(hamiltonian_, e)).expand().transpose();
        comm_e_l_[k] = algebra::commutator(e, coupling_);
        comm_ld_e_[k] = algebra::commutator(ld, e);
        left_factor_.row(k) = comm_ld_e_[k].expand().transpose();
        for (int m = 0; m < 4; ++m)
            right_basis_[k].row(m) = algebra::commutator(SystemOperator::basis(m), e).expand().transpose();
    }

    generators_.reserve(grid_.size());
    for (std::size_t n = 0; n < grid_.size(); ++n) generators_.push_back(build_generator(n));

    const double rate = std::max(std::abs(splitting_), kernel_.is_markov() ? 0.0 : kernel_.bandwidth_rate());
    if (auto w = grid_.resolution_warning(rate)) warnings_.push_back(*w);
}

SystemOperator WeakCouplingSolver::memory_operator(std::size_t n) const {
    algebra::Matrix2 m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = coupling_eig_(i, j) * memory_.values[phase_slot_[i][j]][n];
    return SystemOperator(eigvecs_ * m * eigvecs_.adjoint());
}

SystemOperator WeakCouplingSolver::correlation_memory_operator(std::size_t n1, std::size_t n2) const {
    if (kernel_.is_markov()) return SystemOperator();
    const std::size_t ns = n1 - n2;
    const double s = grid_.time(ns);
    algebra::Matrix2 m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto& col = memory_.values[phase_slot_[i][j]];
            m(i, j) = coupling_eig_(i, j) * std::polar(1.0, -phase_of_[i][j] * s) * (col[n1] - col[ns]);
        }
    if (diagonal_h_) return SystemOperator(m);
    return SystemOperator(eigvecs_ * m * eigvecs_.adjoint());
}

Matrix4 WeakCouplingSolver::generator(std::size_t n) const { return generators_.at(n); }

Matrix4 WeakCouplingSolver::build_generator(std::size_t n) const {
    const SystemOperator lt = memory_operator(n);
    const SystemOperator ltd = lt.adjoint();
    Matrix4 g = free_part_;
    for (int k = 0; k < 4; ++k) g.row(k) += (ltd * comm_e_l_[k] + comm_ld_e_[k] * lt).expand().transpose();
    return g;
}

OneTimeTrajectory WeakCouplingSolver::evolve_one_time(const State& psi0) const {
    const double norm = psi0.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-10) throw dyn_error("initial state must be normalized");

    OneTimeTrajectory traj{grid_, psi0, {}, warnings_};
    traj.values.resize(grid_.size());
    traj.values[0] = basis_means(psi0);
    const double dt = grid_.dt();
    Matrix4 g_now = generator(0);
    for (std::size_t n = 0; n + 1 < grid_.size(); ++n) {
        const Coeffs& x = traj.values[n];
        const Matrix4 g_next = generator(n + 1);
        const Coeffs k1 = g_now * x;
        const Coeffs pred = x + dt * k1;
        const Coeffs k2 = g_next * pred;
        traj.values[n + 1] = x + 0.5 * dt * (k1 + k2);
        if (!all_finite(traj.values[n + 1]))
            throw dyn_error("non-finite mean values at step " + std::to_string(n + 1));
        g_now = g_next;
    }
    return traj;
}

Matrix4 WeakCouplingSolver::two_time_rhs(std::size_t n1, std::size_t n2, const Matrix4& c) const {
    Matrix4 out = generators_[n1] * c;
    if (!kernel_.is_markov()) {
        // [E_m, Lh] = sum_b lh_b [E_m, E_b]
        const Coeffs lh = correlation_memory_operator(n1, n2).expand();
        Matrix4 right = lh(0) * right_basis_[0];
        for (int b = 1; b < 4; ++b) right += lh(b) * right_basis_[b];
        const Matrix4 pc = left_factor_ * c;
        out.noalias() += pc * right.transpose();
    }
    return out;
}

std::vector<Matrix4> WeakCouplingSolver::evolve_two_time(const OneTimeTrajectory& traj, std::size_t row) const {
    if (traj.values.size() != grid_.size()) throw dyn_error("trajectory was computed on a different grid");
    if (row >= grid_.size()) throw dyn_error("t2 lies beyond the horizon T");
    const double dt = grid_.dt();
    std::vector<Matrix4> out;
    out.reserve(grid_.size() - row);
    out.push_back(equal_time_contraction(traj.values[row]));
    Matrix4 f_now = two_time_rhs(row, row, out.back());
    for (std::size_t n1 = row; n1 + 1 < grid_.size(); ++n1) {
        const Matrix4& c = out.back();
        const Matrix4 pred = c + dt * f_now;
        const Matrix4 f_pred = two_time_rhs(n1 + 1, row, pred);
        Matrix4 next = c + 0.5 * dt * (f_now + f_pred);
        if (!all_finite(next))
            throw dyn_error("non-finite two-time correlation at step " + std::to_string(n1 + 1) + " of row " +
                            std::to_string(row));
        out.push_back(next);
        f_now = two_time_rhs(n1 + 1, row, out.back());
    }
    return out;
}

std::vector<cplx> WeakCouplingSolver::correlation_row(const OneTimeTrajectory& traj, std::size_t row,
                                                      const SystemOperator& a, const SystemOperator& b) const {
    const Coeffs ca = a.expand();
    const Coeffs cb = b.expand();
    const auto rows = evolve_two_time(traj, row);
    std::vector<cplx> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = ca.transpose() * rows[i] * cb;
    return out;
}

OneTimeTrajectory evolve_one_time(const State& psi0, const SystemOperator& coupling, const SystemOperator& hamiltonian,
                                  const environment::CorrelationKernel& kernel, const TimeGrid& grid) {
    return WeakCouplingSolver(coupling, hamiltonian, kernel, grid).evolve_one_time(psi0);
}

std::vector<Matrix4> evolve_two_time(const OneTimeTrajectory& traj, double t2, const SystemOperator& coupling,
                                     const SystemOperator& hamiltonian, const environment::CorrelationKernel& kernel,
                                     const TimeGrid& grid) {
    if (t2 > grid.horizon() * (1.0 + 1e-12)) throw dyn_error("t2 lies beyond the horizon T");
    return WeakCouplingSolver(coupling, hamiltonian, kernel, grid).evolve_two_time(traj, grid.index_of(t2));
}

TwoTimeCorrelation::TwoTimeCorrelation(TimeGrid grid, std::vector<std::vector<Matrix4>> rows)
    : grid_(grid), rows_(std::move(rows)) {
    if (rows_.size() != grid_.size()) throw dyn_error("two-time triangle has the wrong number of rows");
    for (std::size_t j = 0; j < rows_.size(); ++j)
        if (rows_[j].size() != grid_.size() - j) throw dyn_error("two-time triangle row has the wrong length");
}

Matrix4 TwoTimeCorrelation::at(std::size_t i, std::size_t j) const {
    if (i >= j) return rows_[j][i - j];
    // C_km(t_i, t_j) = conj C_{m'k'}(t_j, t_i), ' = adjoint index
    const Matrix4& lower = rows_[i][j - i];
    Matrix4 out;
    for (int k = 0; k < 4; ++k)
        for (int m = 0; m < 4; ++m)
            out(k, m) = std::conj(lower(algebra::adjoint_index(m), algebra::adjoint_index(k)));
    return out;
}

TwoTimeCorrelation compute_two_time(const WeakCouplingSolver& solver, const OneTimeTrajectory& traj,
                                    std::size_t workers) {
    const std::size_t n = solver.grid().size();
    std::vector<std::vector<Matrix4>> rows(n);
    parallel_for(n, workers, [&](std::size_t j) { rows[j] = solver.evolve_two_time(traj, j); });
    return TwoTimeCorrelation(solver.grid(), std::move(rows));
}

CorrelationField correlation_of_L(const TwoTimeCorrelation& corr, const SystemOperator& coupling) {
    const Coeffs a = coupling.adjoint().expand();
    const Coeffs b = coupling.expand();
    const std::size_t n = corr.grid().size();
    CorrelationField f(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j; i < n; ++i) {
            const cplx v = a.transpose() * corr.at(i, j) * b;
            f(i, j) = v;
            if (i != j) f(j, i) = std::conj(v);
        }
    return f;
}

CorrelationField correlation_field(const WeakCouplingSolver& solver, const OneTimeTrajectory& traj,
                                   std::size_t workers) {
    const std::size_t n = solver.grid().size();
    constexpr double max_bytes = 4.0 * 1024 * 1024 * 1024;
    if (static_cast<double>(n) * static_cast<double>(n) * sizeof(cplx) > max_bytes)
        throw dyn_error("the full correlation field for N = " + std::to_string(n - 1) +
                        " exceeds 4 GiB; reduce grid.N for the finite_T pipeline");
    CorrelationField f(n, n);
    const SystemOperator ld = solver.coupling().adjoint();
    parallel_for(n, workers, [&](std::size_t j) {
        const auto row = solver.correlation_row(traj, j, ld, solver.coupling());
        for (std::size_t i = 0; i < row.size(); ++i) f(j + i, j) = row[i];
    });
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i) f(j, i) = std::conj(f(i, j));
    return f;
}

std::size_t detect_steady_state(const OneTimeTrajectory& traj, double tolerance, double probation) {
    const TimeGrid& grid = traj.grid;
    const double dt = grid.dt();
    const auto window = static_cast<std::size_t>(std::ceil(probation / dt));
    const double limit = 0.6 * grid.horizon();
    std::size_t run = 0;
    for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
        const double rate = (traj.values[n + 1] - traj.values[n]).cwiseAbs().maxCoeff() / dt;
        run = rate < tolerance ? run + 1 : 0;
        if (run >= std::max<std::size_t>(window, 1)) {
            const std::size_t idx = n + 1;
            if (grid.time(idx) > limit) break;
            return idx;
        }
        if (grid.time(n + 1) > limit) break;
    }
    throw dyn_error("steady state not reached before 0.6 T (tolerance " + std::to_string(tolerance) +
                    " per unit time); increase grid.T or check that the kernel damps the dynamics");
}

StationaryCorrelation stationary_correlation(const WeakCouplingSolver& solver, const OneTimeTrajectory& traj,
                                             const StationaryOptions& opt) {
    double probation = opt.probation;
    if (probation <= 0.0) {
        const double split = std::abs(solver.level_splitting());
        probation = split > 0.0 ? 5.0 / split : 0.05 * traj.grid.horizon();
    }
    const std::size_t star = detect_steady_state(traj, opt.tolerance, probation);
    const SystemOperator& l = solver.coupling();

    StationaryCorrelation out;
    out.step = traj.grid.dt();
    out.t_star_index = star;
    out.t_star = traj.grid.time(star);
    out.offset = std::norm(traj.mean(l, star));
    // <L^dag(t*+s) L(t*)> along the row, conjugated to <L^dag(t*) L(t*+s)>.
    auto row = solver.correlation_row(traj, star, l.adjoint(), l);
    for (auto& v : row) v = std::conj(v);
    out.values = std::move(row);

    const double scale = std::abs(out.values.front() - out.offset);
    const double tail = std::abs(out.values.back() - out.offset);
    out.tail_residual = scale > 0.0 ? tail / scale : 0.0;
    out.tail_decayed = out.tail_residual <= opt.tail_tolerance;

    const std::size_t n = out.values.size();
    const std::size_t from = n - std::max<std::size_t>(1, n / 10);
    cplx mean = 0.0;
    for (std::size_t i = from; i < n; ++i) mean += out.values[i];
    mean /= static_cast<double>(n - from);
    double spread = 0.0;
    for (std::size_t i = from; i < n; ++i) spread = std::max(spread, std::abs(out.values[i] - mean));
    out.asymptote = mean;
    out.settled = spread <= opt.tail_tolerance * std::max(scale, std::abs(mean - out.offset));
    return out;
}

} // namespace pbgfluor::dynamics
