#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pbgfluor/environment.hpp"
#include "pbgfluor/error.hpp"
#include "pbgfluor/oracle.hpp"
#include "reference.hpp"

using namespace pbgfluor;
using namespace pbgfluor::oracle;

namespace {

constexpr double pi = std::numbers::pi;

// Box density rho on [0, 2]: alpha(tau) = rho (1 - e^{-2 i tau}) / (i tau).
cplx box_kernel(double rho, double tau) {
    if (tau == 0.0) return 2.0 * rho;
    return rho * (1.0 - std::polar(1.0, -2.0 * tau)) / cplx(0.0, tau);
}

} // namespace

TEST(Bath, BoxDensityReconstruction) {
    const double rho = 0.01;
    const auto bath = discretize_bath([&](double) { return rho; }, 0.0, 2.0, 2000, 1000.0,
                                      [&](double tau) { return box_kernel(rho, tau); }, 0.01);
    EXPECT_LT(bath.reconstruction_error, 0.01);
    for (double c : bath.couplings) EXPECT_NEAR(c, std::sqrt(rho * 0.001), 1e-15);
    EXPECT_NEAR(bath.recurrence_time, 2.0 * pi / 0.001, 1e-9);
    for (double tau : {0.0, 13.0, 420.0}) EXPECT_LT(std::abs(bath.kernel(tau) - box_kernel(rho, tau)), 0.01 * 2.0 * rho);
}

TEST(Bath, RecurrenceGuard) {
    // M = 200 over [0, 2] recurs at 2 pi / 0.01 = 628; a horizon of 500 is too long.
    EXPECT_THROW(discretize_bath([](double) { return 1.0; }, 0.0, 2.0, 200, 500.0), Error);
    EXPECT_THROW(discretize_bath([](double) { return 1.0; }, 0.0, 2.0, 50, 10.0), Error);
    EXPECT_THROW(discretize_bath([](double) { return -1.0; }, 0.0, 2.0, 200, 10.0), Error);
}

TEST(Bath, ReconstructionErrorGuard) {
    // The density is far from the Bessel kernel used as reference.
    const auto k = environment::CorrelationKernel::periodic_band_3d(0.1, 1.0, 1.0);
    EXPECT_THROW(discretize_bath([](double) { return 0.005; }, 0.0, 2.0, 2000, 50.0,
                                 [&](double t) { return k.evaluate(t); }),
                 Error);
}

TEST(Bath, BandDensityReproducesBesselKernel) {
    const double g = 0.1;
    const auto k = environment::CorrelationKernel::periodic_band_3d(g, 1.0, 1.0);
    const auto bath = discretize_bath([&](double w) { return environment::band_density_3d(w, g, 1.0, 1.0); }, 0.0, 2.0,
                                      2000, 50.0, [&](double t) { return k.evaluate(t); });
    EXPECT_LT(bath.reconstruction_error, 0.02);
    for (double tau = 0.0; tau <= 50.0; tau += 0.7)
        EXPECT_LT(std::abs(bath.kernel(tau) - k.evaluate(tau)), 0.02 * g * g) << tau;
}

TEST(Exact, DecoupledAtomOnlyRotates) {
    BathDiscretization bath;
    bath.omegas = {0.5, 1.0, 1.5};
    bath.couplings = {0.0, 0.0, 0.0};
    bath.spacing = 0.5;
    bath.recurrence_time = 4 * pi;
    const TimeGrid grid(10.0, 200);
    const auto r = one_excitation_exact(bath, 0.8, grid);
    for (std::size_t n = 0; n < grid.size(); ++n) {
        EXPECT_NEAR(r.excited_population[n], 1.0, 1e-14);
        EXPECT_LT(std::abs(r.excited_amplitude[n] - std::polar(1.0, -0.8 * grid.time(n))), 1e-12);
    }
}

TEST(Exact, GoldenRuleDecay) {
    // Flat wide band: |b|^2 = e^{-2 pi rho t} (rate 2 pi rho = 2 x the full-weight Markov rate pi rho).
    const double rho = 0.002;
    // Box on [-4, 6], centred on the transition: alpha(tau) = 10 rho e^{-i tau} sinc(5 tau).
    auto box = [&](double tau) {
        const double sinc = tau == 0.0 ? 1.0 : std::sin(5.0 * tau) / (5.0 * tau);
        return 10.0 * rho * sinc * std::polar(1.0, -tau);
    };
    const auto bath = discretize_bath([&](double) { return rho; }, -4.0, 6.0, 5000, 200.0, box);
    const TimeGrid grid(200.0, 4000);
    const auto r = one_excitation_exact(bath, 1.0, grid);
    double worst = 0.0;
    for (std::size_t n = 0; n < grid.size(); n += 40)
        worst = std::max(worst, std::abs(r.excited_population[n] - std::exp(-2.0 * pi * rho * grid.time(n))));
    EXPECT_LT(worst, 5e-3);
}

TEST(Exact, NormConserved) {
    const double g = 0.05;
    const auto k = environment::CorrelationKernel::periodic_band_3d(g, 1.0, 1.0);
    const auto bath = discretize_bath([&](double w) { return environment::band_density_3d(w, g, 1.0, 1.0); }, 0.0, 2.0,
                                      1000, 200.0, [&](double t) { return k.evaluate(t); });
    const auto r = one_excitation_exact(bath, 1.0, TimeGrid(200.0, 2000));
    EXPECT_LT(r.max_norm_drift, 1e-10);
    double total = r.excited_population.back();
    for (double p : r.mode_population) total += p;
    EXPECT_NEAR(total, 1.0, 1e-10);
    // The emitted line sits at the transition frequency.
    const auto line = r.line_density();
    EXPECT_NEAR(r.mode_omegas[ref::argmax(line)], 1.0, 0.01);
}
