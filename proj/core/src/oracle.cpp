#include "pbgfluor/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pbgfluor/error.hpp"

namespace pbgfluor::oracle {

namespace {

Error oracle_error(const std::string& msg) { return Error("oracle", msg); }

std::vector<double> midpoints(double lo, double hi, std::size_t m) {
    std::vector<double> w(m);
    const double dw = (hi - lo) / static_cast<double>(m);
    for (std::size_t l = 0; l < m; ++l) w[l] = lo + (static_cast<double>(l) + 0.5) * dw;
    return w;
}

cplx kernel_sum(const std::vector<double>& w, const std::vector<double>& g2, double tau) {
    cplx acc = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) acc += g2[l] * std::polar(1.0, -w[l] * tau);
    return acc;
}

} // namespace

cplx BathDiscretization::kernel(double tau) const {
    cplx acc = 0.0;
    for (std::size_t l = 0; l < omegas.size(); ++l) acc += couplings[l] * couplings[l] * std::polar(1.0, -omegas[l] * tau);
    return acc;
}

BathDiscretization discretize_bath(const Density& density, double lo, double hi, std::size_t modes, double horizon,
                                   const KernelReference& reference, double max_error) {
    if (modes < 100) throw oracle_error("bath needs at least 100 modes");
    if (!(hi > lo)) throw oracle_error("bath frequency range must satisfy hi > lo");
    if (!(horizon > 0.0)) throw oracle_error("reconstruction horizon must be > 0");

    BathDiscretization bath;
    bath.omegas = midpoints(lo, hi, modes);
    bath.spacing = (hi - lo) / static_cast<double>(modes);
    bath.recurrence_time = 2.0 * std::numbers::pi / bath.spacing;
    bath.check_horizon = horizon;
    if (horizon > 0.6 * bath.recurrence_time) {
        std::ostringstream os;
        os << "horizon " << horizon << " exceeds 0.6 x recurrence time " << bath.recurrence_time
           << "; use more modes or a shorter horizon";
        throw oracle_error(os.str());
    }
    bath.couplings.resize(modes);
    std::vector<double> g2(modes);
    for (std::size_t l = 0; l < modes; ++l) {
        const double rho = density(bath.omegas[l]);
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw oracle_error("spectral density must be finite and >= 0");
        g2[l] = rho * bath.spacing;
        bath.couplings[l] = std::sqrt(g2[l]);
    }

    std::vector<double> fine_w, fine_g2;
    if (!reference) {
        fine_w = midpoints(lo, hi, 4 * modes);
        fine_g2.resize(fine_w.size());
        const double fdw = bath.spacing / 4.0;
        for (std::size_t l = 0; l < fine_w.size(); ++l) fine_g2[l] = density(fine_w[l]) * fdw;
    }
    auto ref = [&](double tau) { return reference ? reference(tau) : kernel_sum(fine_w, fine_g2, tau); };

    const double scale = std::abs(ref(0.0));
    if (!(scale > 0.0)) throw oracle_error("reference kernel vanishes at tau = 0");
    constexpr int samples = 400;
    double err = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double tau = horizon * static_cast<double>(i) / samples;
        err = std::max(err, std::abs(kernel_sum(bath.omegas, g2, tau) - ref(tau)) / scale);
    }
    bath.reconstruction_error = err;
    if (err > max_error) {
        std::ostringstream os;
        os << "bath reconstruction error " << err << " exceeds " << max_error
           << " over the horizon; use more modes or a shorter horizon";
        throw oracle_error(os.str());
    }
    return bath;
}

std::vector<double> OneExcitationResult::line_density() const {
    std::vector<double> out(mode_population.size());
    if (mode_omegas.size() < 2) return out;
    const double dw = mode_omegas[1] - mode_omegas[0];
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = mode_population[l] / dw;
    return out;
}

OneExcitationResult one_excitation_exact(const BathDiscretization& bath, double transition_frequency,
                                         const TimeGrid& grid, double norm_tolerance) {
    const std::size_t m = bath.omegas.size();
    std::vector<double> detuning(m);
    double fastest = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
        detuning[l] = bath.omegas[l] - transition_frequency;
        fastest = std::max(fastest, std::abs(detuning[l]));
    }
    // Internal RK4 steps keep |detuning| * h <= 0.05 so the norm stays put.
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(fastest * grid.dt() / 0.05)));
    const double dt = grid.dt() / static_cast<double>(substeps);

    // Interaction picture: b' = -i sum g e^{-i d t} c,  c' = -i g e^{i d t} b.
    cplx b = 1.0;
    std::vector<cplx> c(m, 0.0), k1c(m), k2c(m), k3c(m), k4c(m), tmp(m);
    std::vector<cplx> ph0(m), ph_half(m), ph1(m), step_half(m);
    for (std::size_t l = 0; l < m; ++l) {
        ph0[l] = 1.0;
        step_half[l] = std::polar(1.0, 0.5 * detuning[l] * dt);
    }

    OneExcitationResult res{grid, {}, {}, bath.omegas, {}, 0.0};
    res.excited_amplitude.resize(grid.size());
    res.excited_population.resize(grid.size());
    res.excited_amplitude[0] = 1.0;
    res.excited_population[0] = 1.0;

    const auto& g = bath.couplings;
    auto rhs = [&](const std::vector<cplx>& ph, cplx bb, const std::vector<cplx>& cc, std::vector<cplx>& dc) {
        cplx db = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
            db += g[l] * std::conj(ph[l]) * cc[l];
            dc[l] = cplx(0.0, -1.0) * g[l] * ph[l] * bb;
        }
        return cplx(0.0, -1.0) * db;
    };

    const std::size_t total = (grid.size() - 1) * substeps;
    for (std::size_t n = 0; n < total; ++n) {
        if ((n & 255u) == 0) {
            const double t = static_cast<double>(n) * dt;
            for (std::size_t l = 0; l < m; ++l) ph0[l] = std::polar(1.0, detuning[l] * t);
        }
        for (std::size_t l = 0; l < m; ++l) {
            ph_half[l] = ph0[l] * step_half[l];
            ph1[l] = ph_half[l] * step_half[l];
        }
        const cplx k1b = rhs(ph0, b, c, k1c);
        for (std::size_t l = 0; l < m; ++l) tmp[l] = c[l] + 0.5 * dt * k1c[l];
        const cplx k2b = rhs(ph_half, b + 0.5 * dt * k1b, tmp, k2c);
        for (std::size_t l = 0; l < m; ++l) tmp[l] = c[l] + 0.5 * dt * k2c[l];
        const cplx k3b = rhs(ph_half, b + 0.5 * dt * k2b, tmp, k3c);
        for (std::size_t l = 0; l < m; ++l) tmp[l] = c[l] + dt * k3c[l];
        const cplx k4b = rhs(ph1, b + dt * k3b, tmp, k4c);

        b += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        double norm2 = std::norm(b);
        for (std::size_t l = 0; l < m; ++l) {
            c[l] += dt / 6.0 * (k1c[l] + 2.0 * k2c[l] + 2.0 * k3c[l] + k4c[l]);
            norm2 += std::norm(c[l]);
        }
        const double drift = std::abs(std::sqrt(norm2) - 1.0);
        res.max_norm_drift = std::max(res.max_norm_drift, drift);
        if (!(drift <= norm_tolerance)) {
            std::ostringstream os;
            os << "norm drift " << drift << " at t = " << static_cast<double>(n + 1) * dt << " exceeds " << norm_tolerance
               << "; reduce the time step";
            throw oracle_error(os.str());
        }
        ph0.swap(ph1);
        if ((n + 1) % substeps == 0) {
            const std::size_t g_idx = (n + 1) / substeps;
            const double t1 = grid.time(g_idx);
            res.excited_amplitude[g_idx] = b * std::polar(1.0, -transition_frequency * t1);
            res.excited_population[g_idx] = std::norm(b);
        }
    }
    res.mode_population.resize(m);
    for (std::size_t l = 0; l < m; ++l) res.mode_population[l] = std::norm(c[l]);
    return res;
}

} // namespace pbgfluor::oracle
