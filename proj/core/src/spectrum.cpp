#include "pbgfluor/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pbgfluor/error.hpp"
#include "pbgfluor/parallel.hpp"

namespace pbgfluor::spectrum {

namespace {

Error spec_error(const std::string& msg) { return Error("spectrum", msg); }

void flag_negative(SpectrumResult& r) {
    const double top = r.max_power();
    for (double p : r.power)
        if (p < -1e-8 * top) {
            r.flags.push_back("negative-power");
            return;
        }
}

void check_finite(const SpectrumResult& r) {
    for (double p : r.power)
        if (!std::isfinite(p)) throw spec_error("non-finite spectrum value");
}

// Trapezoid weight of point n on a grid with n_last as the last index.
double trap(std::size_t n, std::size_t n_last, double dt) { return (n == 0 || n == n_last) ? 0.5 * dt : dt; }

} // namespace

bool SpectrumResult::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

double SpectrumResult::max_power() const {
    double m = 0.0;
    for (double p : power) m = std::max(m, p);
    return m;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw spec_error("frequency grid needs >= 2 points and hi > lo");
    std::vector<double> g(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + step * static_cast<double>(i);
    return g;
}

std::vector<double> default_omega_grid(double laser_frequency, double rabi, std::size_t points) {
    return uniform_grid(laser_frequency - 4.0 * rabi, laser_frequency + 4.0 * rabi, points);
}

std::vector<cplx> transfer_spatial(const environment::SpatialKernelTransform& s, std::span<const double> omegas) {
    std::vector<cplx> out(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) out[i] = s.evaluate(omegas[i]);
    return out;
}

std::vector<cplx> transfer_laplace(const environment::CorrelationKernel& k, std::span<const double> omegas,
                                   const environment::LaplaceOptions& opt, std::vector<std::string>* flags) {
    const auto lab = k.with_frame_shift(0.0);
    const auto res = environment::kernel_laplace(lab, omegas, opt);
    std::vector<cplx> out(res.size());
    bool converged = true;
    for (std::size_t i = 0; i < res.size(); ++i) {
        out[i] = res[i].value;
        converged = converged && res[i].converged;
    }
    if (!converged && flags) flags->push_back("laplace-tail-not-converged");
    return out;
}

std::vector<double> incoherent_density(const dynamics::StationaryCorrelation& css, std::span<const double> nus,
                                       const StationaryOptions& opt) {
    const std::size_t n = css.values.size();
    if (n < 2) throw spec_error("stationary correlation needs at least two samples");
    const std::size_t last = n - 1;
    std::vector<cplx> f(n);
    for (std::size_t j = 0; j < n; ++j) {
        double w = trap(j, last, css.step);
        if (opt.taper) w *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(last)));
        f[j] = w * (css.values[j] - css.subtracted());
    }
    std::vector<double> out(nus.size());
    parallel_for(nus.size(), default_worker_count(), [&](std::size_t i) {
        const double nu = nus[i];
        const cplx rot = std::polar(1.0, nu * css.step);
        cplx phasor = 1.0;
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if ((j & 1023u) == 0) phasor = std::polar(1.0, nu * css.step * static_cast<double>(j));
            acc += phasor * f[j];
            phasor *= rot;
        }
        out[i] = 2.0 * acc.real();
    });
    return out;
}

SpectrumResult spectrum_stationary(const dynamics::StationaryCorrelation& css, std::span<const cplx> transfer,
                                   cplx transfer_at_laser, std::span<const double> omegas, double laser_frequency,
                                   const StationaryOptions& opt) {
    if (transfer.size() != omegas.size()) throw spec_error("transfer and frequency grids differ in length");
    std::vector<double> nus(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) nus[i] = omegas[i] - laser_frequency;
    const auto sll = incoherent_density(css, nus, opt);

    SpectrumResult r;
    r.pipeline = "stationary";
    r.omega.assign(omegas.begin(), omegas.end());
    r.power.resize(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) r.power[i] = std::norm(transfer[i]) * sll[i];
    r.coherent_weight = std::norm(transfer_at_laser) * css.subtracted();
    r.horizon = css.t_star + css.step * static_cast<double>(css.values.size() - 1);
    if (!css.tail_decayed) r.flags.push_back(css.settled ? "quasi-elastic-tail" : "tail-not-decayed");
    check_finite(r);
    flag_negative(r);
    return r;
}

SpectrumResult spectrum_markov(const dynamics::StationaryCorrelation& css, double rate, std::span<const double> omegas,
                               double laser_frequency, const StationaryOptions& opt) {
    if (!(rate >= 0.0)) throw spec_error("Markov rate must be >= 0");
    std::vector<cplx> transfer(omegas.size(), cplx(rate));
    auto r = spectrum_stationary(css, transfer, cplx(rate), omegas, laser_frequency, opt);
    r.pipeline = "markov";
    return r;
}

namespace {

// Columns h_k with P_k = h_k^H C h_k.
Eigen::MatrixXcd projection_vectors(const environment::CorrelationKernel& k, const TimeGrid& grid,
                                    std::span<const double> nus) {
    const std::size_t n = grid.size();
    const std::size_t last = n - 1;
    const double dt = grid.dt();
    Eigen::MatrixXcd h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nus.size()));

    if (k.is_markov()) {
        const double gamma = k.markov_rate();
        for (std::size_t c = 0; c < nus.size(); ++c)
            for (std::size_t j = 0; j < n; ++j)
                h(j, c) = gamma * trap(j, last, dt) * std::polar(1.0, nus[c] * grid.time(j));
        return h;
    }

    std::vector<cplx> alpha(n);
    for (std::size_t m = 0; m < n; ++m) alpha[m] = k.evaluate(grid.time(m));

    parallel_for(nus.size(), default_worker_count(), [&](std::size_t c) {
        const double nu = nus[c];
        std::vector<cplx> a(n), prefix(n);
        for (std::size_t m = 0; m < n; ++m) a[m] = alpha[m] * std::polar(1.0, nu * grid.time(m));
        prefix[0] = 0.0;
        for (std::size_t m = 1; m < n; ++m) prefix[m] = prefix[m - 1] + a[m];
        // Outer weight W_t (trapezoid on [0,T]) times inner weight on [0,t] (halved at tau=0 and tau=t).
        for (std::size_t j = 0; j < n; ++j) {
            cplx s;
            if (j == 0) {
                s = 0.5 * dt * (dt * prefix[last] - 0.5 * dt * a[last]);
            } else if (j == last) {
                s = 0.25 * dt * dt * a[0];
            } else {
                s = 0.5 * dt * dt * a[0] + dt * (dt * prefix[last - j] - 0.5 * dt * a[last - j]);
            }
            h(j, c) = std::polar(1.0, nu * grid.time(j)) * s;
        }
    });
    return h;
}

std::vector<double> frame_detunings(std::span<const double> omegas, double shift) {
    std::vector<double> nus(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) nus[i] = omegas[i] - shift;
    return nus;
}

// `scale` bounds the residue check from below: after coherent subtraction the
// connected power can be tiny relative to the terms that produced it.
void finish_complex(SpectrumResult& r, const Eigen::VectorXcd& p, double tol, double scale = 0.0) {
    r.power.resize(static_cast<std::size_t>(p.size()));
    double top = 0.0, imag = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        r.power[static_cast<std::size_t>(i)] = p(i).real();
        top = std::max(top, std::abs(p(i).real()));
        imag = std::max(imag, std::abs(p(i).imag()));
    }
    r.max_imag_residue = imag;
    top = std::max(top, scale);
    if (imag > tol * top && imag > 0.0) {
        std::ostringstream os;
        os << "imaginary residue " << imag << " exceeds " << tol << " * max|P| (" << top
           << "); the correlation field is not hermitian";
        throw spec_error(os.str());
    }
    check_finite(r);
    flag_negative(r);
}

} // namespace

SpectrumResult spectrum_finite_T(const dynamics::CorrelationField& field, const environment::CorrelationKernel& k,
                                 const TimeGrid& grid, std::span<const double> omegas, std::span<const cplx> means,
                                 const FiniteTOptions& opt) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (field.rows() != n || field.cols() != n) throw spec_error("correlation field does not match the time grid");
    const auto nus = frame_detunings(omegas, k.frame_shift());

    SpectrumResult r;
    r.pipeline = "finite_T";
    r.omega.assign(omegas.begin(), omegas.end());
    r.horizon = grid.horizon();

    const Eigen::MatrixXcd h = projection_vectors(k, grid, nus);
    Eigen::VectorXcd p(h.cols());
    const Eigen::MatrixXcd ch = field * h;
    for (Eigen::Index c = 0; c < h.cols(); ++c) p(c) = h.col(c).dot(ch.col(c));
    const double scale = p.size() > 0 ? p.cwiseAbs().maxCoeff() : 0.0;
    if (opt.subtract_coherent) {
        if (static_cast<Eigen::Index>(means.size()) != n) throw spec_error("coherent subtraction needs <L(t)> on the grid");
        // h^H (C - conj(m) m^T) h = h^H C h - |m^T h|^2; the connected field is never formed.
        Eigen::Map<const Eigen::VectorXcd> m(means.data(), n);
        for (Eigen::Index c = 0; c < h.cols(); ++c) p(c) -= std::norm(m.cwiseProduct(h.col(c)).sum());
        const double zero[1] = {0.0};
        const Eigen::MatrixXcd h0 = projection_vectors(k, grid, zero);
        r.coherent_weight = std::norm(m.cwiseProduct(h0.col(0)).sum());
    }
    finish_complex(r, p, opt.residue_tolerance, scale);
    return r;
}

Eigen::MatrixXcd first_order_correlation(const dynamics::CorrelationField& field,
                                         const environment::CorrelationKernel& k, const TimeGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (field.rows() != n || field.cols() != n) throw spec_error("correlation field does not match the time grid");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    const double dt = grid.dt();
    if (k.is_markov()) {
        a.diagonal().setConstant(k.markov_rate());
    } else {
        std::vector<cplx> alpha(static_cast<std::size_t>(n));
        for (Eigen::Index m = 0; m < n; ++m) alpha[static_cast<std::size_t>(m)] = k.evaluate(grid.time(static_cast<std::size_t>(m)));
        for (Eigen::Index t = 1; t < n; ++t)
            for (Eigen::Index tau = 0; tau <= t; ++tau) {
                const double w = (tau == 0 || tau == t) ? 0.5 * dt : dt;
                a(t, tau) = w * alpha[static_cast<std::size_t>(t - tau)];
            }
    }
    const Eigen::MatrixXcd left = a.conjugate() * field;
    return left * a.transpose();
}

SpectrumResult spectrum_from_g1(const Eigen::MatrixXcd& g1, const environment::CorrelationKernel& k,
                                const TimeGrid& grid, std::span<const double> omegas, double residue_tolerance) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (g1.rows() != n || g1.cols() != n) throw spec_error("g1 does not match the time grid");
    const auto nus = frame_detunings(omegas, k.frame_shift());
    Eigen::MatrixXcd v(n, static_cast<Eigen::Index>(nus.size()));
    for (std::size_t c = 0; c < nus.size(); ++c)
        for (Eigen::Index j = 0; j < n; ++j)
            v(j, static_cast<Eigen::Index>(c)) =
                grid.weight(static_cast<std::size_t>(j)) * std::polar(1.0, nus[c] * grid.time(static_cast<std::size_t>(j)));
    const Eigen::MatrixXcd gv = g1 * v;
    Eigen::VectorXcd p(v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c) p(c) = v.col(c).dot(gv.col(c));

    SpectrumResult r;
    r.pipeline = "finite_T_g1";
    r.omega.assign(omegas.begin(), omegas.end());
    r.horizon = grid.horizon();
    finish_complex(r, p, residue_tolerance);
    return r;
}

std::vector<Peak> find_peaks(std::span<const double> omega, std::span<const double> values, double rel_threshold) {
    if (omega.size() != values.size()) throw spec_error("peak search: grid and values differ in length");
    std::vector<Peak> peaks;
    if (values.size() < 3) return peaks;
    const double top = *std::max_element(values.begin(), values.end());
    if (!(top > 0.0)) return peaks;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] >= rel_threshold * top)
            peaks.push_back({i, omega[i], values[i]});
    }
    return peaks;
}

CrosscheckReport pipeline_crosscheck(const SpectrumResult& finite, const SpectrumResult& stationary,
                                     double rel_threshold, double ratio_tolerance) {
    CrosscheckReport rep;
    if (finite.omega != stationary.omega) throw spec_error("cross-check needs a common frequency grid");
    rep.finite_peaks = find_peaks(finite.omega, finite.power, rel_threshold);
    rep.stationary_peaks = find_peaks(stationary.omega, stationary.power, rel_threshold);
    std::ostringstream msg;
    if (rep.finite_peaks.empty() || rep.finite_peaks.size() != rep.stationary_peaks.size()) {
        msg << "peak count differs: finite-T " << rep.finite_peaks.size() << ", stationary "
            << rep.stationary_peaks.size();
        rep.message = msg.str();
        return rep;
    }
    auto tallest = [](const std::vector<Peak>& p) {
        double m = 0.0;
        for (const auto& x : p) m = std::max(m, x.height);
        return m;
    };
    const double fa = tallest(rep.finite_peaks), sa = tallest(rep.stationary_peaks);
    for (std::size_t i = 0; i < rep.finite_peaks.size(); ++i) {
        const auto& f = rep.finite_peaks[i];
        const auto& s = rep.stationary_peaks[i];
        const double bins = std::abs(static_cast<double>(f.index) - static_cast<double>(s.index));
        rep.max_position_error = std::max(rep.max_position_error, bins);
        const double rf = f.height / fa, rs = s.height / sa;
        rep.max_ratio_error = std::max(rep.max_ratio_error, std::abs(rf - rs) / rs);
    }
    rep.passed = rep.max_position_error <= 1.0 && rep.max_ratio_error <= ratio_tolerance;
    msg << "peaks " << rep.finite_peaks.size() << ", max position error " << rep.max_position_error
        << " bins, max height-ratio error " << rep.max_ratio_error;
    rep.message = msg.str();
    return rep;
}

} // namespace pbgfluor::spectrum
