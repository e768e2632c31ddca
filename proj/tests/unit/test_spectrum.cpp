#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pbgfluor/dynamics.hpp"
#include "pbgfluor/error.hpp"
#include "pbgfluor/spectrum.hpp"
#include "reference.hpp"

using namespace pbgfluor;
using namespace pbgfluor::spectrum;
using environment::CorrelationKernel;

namespace {

constexpr double pi = std::numbers::pi;

struct MollowFixture {
    algebra::DressedAtom atom = algebra::dressed_parameters(0.5, 0.0, 1.0);
    double gamma = 0.01;
    dynamics::StationaryCorrelation css;

    MollowFixture() {
        const auto model = dynamics::TwoLevelModel::driven(atom);
        const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, CorrelationKernel::markov(gamma),
                                                  TimeGrid(4000.0, 40000));
        css = dynamics::stationary_correlation(solver, solver.evolve_one_time(model.initial_state));
    }
};

const MollowFixture& mollow() {
    static const MollowFixture f;
    return f;
}

dynamics::StationaryCorrelation synthetic_css(double step, std::size_t n, double offset,
                                              const std::function<cplx(double)>& f) {
    dynamics::StationaryCorrelation css;
    css.step = step;
    css.offset = offset;
    for (std::size_t i = 0; i < n; ++i) css.values.push_back(f(step * static_cast<double>(i)));
    return css;
}

} // namespace

TEST(Grids, Defaults) {
    const auto w = default_omega_grid(1.0, 0.55);
    ASSERT_EQ(w.size(), 801u);
    EXPECT_DOUBLE_EQ(w.front(), 1.0 - 2.2);
    EXPECT_DOUBLE_EQ(w.back(), 1.0 + 2.2);
    EXPECT_NEAR(w[400], 1.0, 1e-15);
}

TEST(Peaks, InteriorMaxima) {
    const std::vector<double> x{0, 1, 2, 3, 4, 5, 6};
    const std::vector<double> y{5, 1, 3, 1, 0.001, 0.002, 0};
    const auto p = find_peaks(x, y, 0.01);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].index, 2u);
}

TEST(FiniteT, ZeroFieldGivesZero) {
    const TimeGrid grid(20.0, 100);
    const Eigen::MatrixXcd field = Eigen::MatrixXcd::Zero(101, 101);
    const auto w = uniform_grid(-1.0, 1.0, 21);
    for (const auto& k : {CorrelationKernel::markov(0.2), CorrelationKernel::periodic_band_3d(0.1, 1.0, 1.0)})
        for (double p : spectrum_finite_T(field, k, grid, w).power) EXPECT_EQ(p, 0.0);
}

TEST(FiniteT, StationaryPhaseIsWindowedSinc) {
    // C_L(t, t') = e^{i nu0 (t - t')} is a line emitted at +nu0 (our sign convention).
    const double nu0 = 0.3, T = 200.0;
    const TimeGrid grid(T, 2000);
    Eigen::MatrixXcd field(grid.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) field(i, j) = std::polar(1.0, nu0 * (grid.time(i) - grid.time(j)));
    const auto w = uniform_grid(0.0, 0.6, 601);
    const auto r = spectrum_finite_T(field, CorrelationKernel::markov(1.0), grid, w);
    const auto top = ref::argmax(r.power);
    EXPECT_NEAR(r.omega[top], nu0, 1e-3);
    EXPECT_NEAR(r.power[top], T * T, 1e-6 * T * T);
    // First zero of the sinc^2 at nu0 + 2 pi / T.
    EXPECT_LT(r.power[top + static_cast<std::size_t>(std::lround(2 * pi / T / 0.001))], 1e-3 * r.power[top]);
}

TEST(FiniteT, MarkovLorentzianClosedForm) {
    // Undriven atom, resonant frame: C_L(t, t') = e^{-G (t + t')}, so
    // P(nu) = G^2 |1 - e^{-(G - i nu) T}|^2 / (G^2 + nu^2).
    const double gamma = 0.1, T = 100.0;
    const auto model = dynamics::TwoLevelModel::spontaneous(1.0, 1.0);
    const TimeGrid grid(T, 2048);
    const auto k = CorrelationKernel::markov(gamma).with_frame_shift(model.frame_frequency);
    const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, k, grid);
    const auto field = dynamics::correlation_field(solver, solver.evolve_one_time(model.initial_state), 1);
    const auto w = uniform_grid(0.0, 2.0, 201);
    const auto r = spectrum_finite_T(field, k, grid, w);
    double top = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double nu = w[i] - 1.0;
        const double expected = gamma * gamma * std::norm(1.0 - std::exp(cplx(-gamma, nu) * T)) / (gamma * gamma + nu * nu);
        top = std::max(top, expected);
        worst = std::max(worst, std::abs(r.power[i] - expected));
    }
    EXPECT_LT(worst / top, 1e-3);
    EXPECT_EQ(r.pipeline, "finite_T");
}

TEST(FiniteT, AgreesWithToeplitzRoute) {
    const auto atom = algebra::dressed_parameters(0.3, 0.0, 1.2);
    const auto model = dynamics::TwoLevelModel::driven(atom);
    const auto k = CorrelationKernel::periodic_band_3d(0.1, 1.0, 1.0).with_frame_shift(1.2);
    const TimeGrid grid(60.0, 300);
    const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, k, grid);
    const auto field = dynamics::correlation_field(solver, solver.evolve_one_time(model.initial_state), 2);
    const auto w = uniform_grid(0.0, 2.4, 121);
    const auto fast = spectrum_finite_T(field, k, grid, w);
    const auto slow = spectrum_from_g1(first_order_correlation(field, k, grid), k, grid, w);
    const double top = fast.max_power();
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(fast.power[i], slow.power[i], 1e-9 * top);
    EXPECT_LT(fast.max_imag_residue, 1e-9 * top);
}

TEST(FiniteT, NonHermitianFieldRejected) {
    const TimeGrid grid(10.0, 50);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    Eigen::MatrixXcd field(51, 51);
    for (Eigen::Index i = 0; i < 51; ++i)
        for (Eigen::Index j = 0; j < 51; ++j) field(i, j) = cplx(n(rng), n(rng));
    EXPECT_THROW(spectrum_finite_T(field, CorrelationKernel::markov(1.0), grid, uniform_grid(-1, 1, 11)), Error);
}

TEST(FiniteT, CoherentSubtraction) {
    // A purely coherent field conj(m) m^T leaves nothing after subtraction.
    const TimeGrid grid(30.0, 300);
    std::vector<cplx> m(grid.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.4 * std::polar(1.0, -0.2 * grid.time(i));
    const Eigen::Map<const Eigen::VectorXcd> mv(m.data(), static_cast<Eigen::Index>(m.size()));
    const Eigen::MatrixXcd field = mv.conjugate() * mv.transpose();
    const auto k = CorrelationKernel::periodic_band_3d(0.2, 1.0, 1.0).with_frame_shift(1.0);
    const auto w = uniform_grid(0.0, 2.0, 41);
    FiniteTOptions opt;
    opt.subtract_coherent = true;
    const auto r = spectrum_finite_T(field, k, grid, w, m, opt);
    const auto plain = spectrum_finite_T(field, k, grid, w);
    for (double p : r.power) EXPECT_LT(std::abs(p), 1e-12 * plain.max_power());
    EXPECT_GT(r.coherent_weight, 0.0);
}

TEST(Stationary, MollowTripletPositionsAndSymmetry) {
    const auto& f = mollow();
    const auto w = default_omega_grid(1.0, f.atom.rabi);
    const auto r = spectrum_markov(f.css, f.gamma, w, 1.0);
    const auto peaks = find_peaks(r.omega, r.power, 0.01);
    ASSERT_EQ(peaks.size(), 3u);
    const double bin = w[1] - w[0];
    EXPECT_NEAR(peaks[0].omega, 1.0 - 2 * f.atom.rabi, bin);
    EXPECT_NEAR(peaks[1].omega, 1.0, bin);
    EXPECT_NEAR(peaks[2].omega, 1.0 + 2 * f.atom.rabi, bin);
    EXPECT_NEAR(peaks[0].height / peaks[2].height, 1.0, 0.02);
    EXPECT_GT(r.coherent_weight, 0.0);
    EXPECT_TRUE(r.flags.empty());
}

TEST(Stationary, IncoherentDensityNonNegative) {
    const auto& f = mollow();
    const auto nus = uniform_grid(-2.0, 2.0, 801);
    const auto s = incoherent_density(f.css, nus);
    const double top = *std::max_element(s.begin(), s.end());
    for (double v : s) EXPECT_GE(v, -1e-6 * top);
}

TEST(Stationary, MarkovEqualsFlatTransfer) {
    const auto& f = mollow();
    const auto w = default_omega_grid(1.0, f.atom.rabi, 201);
    const auto markov = spectrum_markov(f.css, f.gamma, w, 1.0);
    const std::vector<cplx> flat(w.size(), cplx(f.gamma));
    const auto generic = spectrum_stationary(f.css, flat, f.gamma, w, 1.0);
    const double top = markov.max_power();
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(markov.power[i], generic.power[i], 1e-6 * top);
    EXPECT_NEAR(markov.coherent_weight, generic.coherent_weight, 1e-12);
}

TEST(Stationary, ZeroRateAndZeroVariance) {
    const auto& f = mollow();
    const auto w = uniform_grid(0.0, 2.0, 51);
    for (double p : spectrum_markov(f.css, 0.0, w, 1.0).power) EXPECT_EQ(p, 0.0);
    const auto flat = synthetic_css(0.1, 1000, 0.25, [](double) { return cplx(0.25); });
    for (double p : spectrum_markov(flat, 0.3, w, 1.0).power) EXPECT_EQ(p, 0.0);
}

TEST(Stationary, SpatialGapLaw) {
    const auto& f = mollow();
    const environment::SpatialKernelTransform s(1.0, 1.0, 0.0, 10.0);
    const auto w = uniform_grid(-0.5, 2.5, 301);
    const auto near = spectrum_stationary(f.css, transfer_spatial(s, w), s.evaluate(1.0), w, 1.0);
    const auto far = spectrum_stationary(f.css, transfer_spatial(s.at_distance(20.0), w),
                                         s.at_distance(20.0).evaluate(1.0), w, 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double ratio = (400.0 * far.power[i]) / (100.0 * near.power[i]);
        if (w[i] < 0.0) {
            EXPECT_NEAR(std::log(ratio), -2.0 * 10.0 / s.localization_length(w[i]), 1e-9);
        } else if (w[i] > 0.0) {
            EXPECT_NEAR(ratio, 1.0, 1e-12);
        }
    }
}

TEST(Stationary, TailFlags) {
    const auto w = uniform_grid(0.5, 1.5, 101);
    const std::vector<cplx> flat(w.size(), cplx(1.0));
    auto frozen = synthetic_css(0.1, 5000, 0.1, [](double s) { return 0.3 + 0.1 * std::exp(-s / 10.0); });
    frozen.tail_decayed = false;
    frozen.settled = true;
    frozen.asymptote = 0.3;
    const auto q = spectrum_stationary(frozen, flat, 1.0, w, 1.0);
    EXPECT_TRUE(q.has_flag("quasi-elastic-tail"));
    // Only the decaying part is transformed: a Lorentzian of area 2 pi * 0.1.
    EXPECT_NEAR(q.power[50], 2.0 * 0.1 * 10.0, 1e-2);

    auto ringing = synthetic_css(0.1, 5000, 0.0, [](double s) { return cplx(std::cos(0.7 * s)); });
    ringing.tail_decayed = false;
    ringing.settled = false;
    EXPECT_TRUE(spectrum_stationary(ringing, flat, 1.0, w, 1.0).has_flag("tail-not-decayed"));
}

TEST(Transfer, LaplaceUsesLabFrameKernel) {
    const auto k = CorrelationKernel::periodic_band_3d(0.2, 1.0, 1.0);
    environment::LaplaceOptions opt;
    opt.window = 500.0;
    opt.infinite = true;
    const auto w = uniform_grid(0.2, 1.8, 9);
    const auto t = transfer_laplace(k.with_frame_shift(1.3), w, opt);
    for (std::size_t i = 0; i < w.size(); ++i)
        EXPECT_NEAR(std::abs(t[i] - environment::kernel_laplace(k, w[i], opt).value), 0.0, 1e-14);
}

TEST(Crosscheck, PassAndFailModes) {
    SpectrumResult a;
    a.omega = uniform_grid(0.0, 2.0, 201);
    for (double x : a.omega)
        a.power.push_back(1.0 / (1.0 + std::pow((x - 1.0) / 0.02, 2)) + 0.3 / (1.0 + std::pow((x - 0.5) / 0.02, 2)));
    SpectrumResult b = a;
    for (double& p : b.power) p *= 7.0;
    EXPECT_TRUE(pipeline_crosscheck(a, b).passed);

    SpectrumResult shifted = a;
    std::rotate(shifted.power.begin(), shifted.power.begin() + 3, shifted.power.end());
    EXPECT_FALSE(pipeline_crosscheck(a, shifted).passed);

    SpectrumResult taller = a;
    for (std::size_t i = 0; i < taller.omega.size(); ++i)
        if (taller.omega[i] < 0.75) taller.power[i] *= 1.3;
    EXPECT_FALSE(pipeline_crosscheck(a, taller).passed);
}
