// reference.hpp — Independent reference computations used by the tests.
//
// Nothing here calls the library's generator, memory tables or quadrature; the
// Markov references are built from the Lindblad form directly, in both the
// Heisenberg (expectation) and Schrodinger (density-matrix) pictures.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ref {

using cplx = std::complex<double>;
using M2 = Eigen::Matrix2cd;
using M4 = Eigen::Matrix4cd;
using V4 = Eigen::Vector4cd;

inline M2 unit(int i, int j) {
    M2 m = M2::Zero();
    m(i, j) = 1.0;
    return m;
}
inline M2 element(int k) { return unit(k / 2, k % 2); }

// Coefficients of X on (R11, R12, R21, R22) are just its entries.
inline V4 coeffs(const M2& x) { return V4(x(0, 0), x(0, 1), x(1, 0), x(1, 1)); }

// Adjoint Lindblad generator for rate Gamma with the full-weight delta rule:
// d<A>/dt = <i[H,A] + Gamma (2 L^dag A L - {L^dag L, A})>.
inline M4 heisenberg_generator(const M2& h, const M2& l, double gamma) {
    const cplx I(0.0, 1.0);
    const M2 ld = l.adjoint();
    M4 g;
    for (int k = 0; k < 4; ++k) {
        const M2 a = element(k);
        const M2 d = I * (h * a - a * h) + gamma * (2.0 * ld * a * l - ld * l * a - a * ld * l);
        g.row(k) = coeffs(d).transpose();
    }
    return g;
}

// Same dynamics in the Schrodinger picture acting on vec(rho) = (r00, r01, r10, r11).
inline M4 liouvillian(const M2& h, const M2& l, double gamma) {
    const cplx I(0.0, 1.0);
    const M2 ld = l.adjoint();
    M4 out;
    for (int k = 0; k < 4; ++k) {
        const M2 r = element(k);
        const M2 d = -I * (h * r - r * h) + 2.0 * gamma * (l * r * ld - 0.5 * (ld * l * r + r * ld * l));
        out.col(k) = coeffs(d);
    }
    return out;
}

inline M2 unvec(const V4& v) {
    M2 m;
    m << v(0), v(1), v(2), v(3);
    return m;
}

// <E_k> for density matrix rho: Tr(|i><j| rho) = rho(j, i).
inline V4 means_of(const M2& rho) {
    V4 m;
    for (int k = 0; k < 4; ++k) m(k) = rho(k % 2, k / 2);
    return m;
}

// One Heun step with a constant generator.
inline V4 heun(const M4& g, const V4& x, double dt) {
    const V4 k1 = g * x;
    const V4 k2 = g * (x + dt * k1);
    return x + 0.5 * dt * (k1 + k2);
}

// Heun-propagated QRT: C(t1, t2) with both indices, each column evolved with g.
inline std::vector<M4> qrt_row(const M4& g, const M4& c0, double dt, std::size_t steps) {
    std::vector<M4> out{c0};
    M4 c = c0;
    for (std::size_t n = 0; n < steps; ++n) {
        const M4 k1 = g * c;
        const M4 k2 = g * (c + dt * k1);
        c += 0.5 * dt * (k1 + k2);
        out.push_back(c);
    }
    return out;
}

// Exact Markov <A(t + s) B(t)> from the density matrix rho(t).
inline cplx exact_two_time(const M4& liou, const M2& rho_t, const M2& a, const M2& b, double s) {
    const V4 v = (liou * s).exp() * coeffs(b * rho_t);
    return (a * unvec(v)).trace();
}

inline M2 exact_rho(const M4& liou, const M2& rho0, double t) {
    return unvec((liou * t).exp() * coeffs(rho0));
}

// Stationary density matrix: null vector of the Liouvillian with unit trace.
inline M2 stationary_rho(const M4& liou) {
    Eigen::Matrix<cplx, 5, 4> a;
    a.topRows<4>() = liou;
    a.row(4) << 1.0, 0.0, 0.0, 1.0;
    Eigen::Matrix<cplx, 5, 1> b = Eigen::Matrix<cplx, 5, 1>::Zero();
    b(4) = 1.0;
    const V4 v = a.colPivHouseholderQr().solve(b);
    return unvec(v);
}

// Adaptive Gauss-Kronrod integral of a complex integrand on [a, b].
inline cplx integrate(const std::function<cplx(double)>& f, double a, double b, double tol = 1e-10,
                      unsigned depth = 10) {
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x).real(); }, a, b, depth, tol);
    const double im = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x).imag(); }, a, b, depth, tol);
    return {re, im};
}

// Integral split into pieces no longer than `piece` (oscillatory integrands).
inline cplx integrate_pieces(const std::function<cplx(double)>& f, double a, double b, double piece) {
    cplx acc = 0.0;
    for (double x = a; x < b; x += piece) acc += integrate(f, x, std::min(b, x + piece));
    return acc;
}

// Least-squares fit of y = h / (1 + ((x - x0)/w)^2) by Gauss-Newton, starting
// from the tallest sample and the half-maximum crossings.
struct LorentzFit {
    double height{0.0};
    double center{0.0};
    double hwhm{0.0};
    double relative_l2{0.0};
};

inline double lorentz(double x, double h, double x0, double w) {
    const double u = (x - x0) / w;
    return h / (1.0 + u * u);
}

inline LorentzFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y) {
    const auto top = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    double h = y[top], x0 = x[top];
    std::size_t lo = top, hi = top;
    while (lo > 0 && y[lo] > 0.5 * h) --lo;
    while (hi + 1 < y.size() && y[hi] > 0.5 * h) ++hi;
    double w = std::max(0.5 * (x[hi] - x[lo]), 1e-12);

    for (int iter = 0; iter < 100; ++iter) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - x0) / w;
            const double den = 1.0 + u * u;
            const double f = h / den;
            Eigen::Vector3d jac(1.0 / den, 2.0 * h * u / (w * den * den), 2.0 * h * u * u / (w * den * den));
            jtj += jac * jac.transpose();
            jtr += jac * (y[i] - f);
        }
        const Eigen::Vector3d step = jtj.ldlt().solve(jtr);
        h += step(0);
        x0 += step(1);
        w += step(2);
        if (step.norm() < 1e-14 * (1.0 + std::abs(x0))) break;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - lorentz(x[i], h, x0, w);
        num += r * r;
        den += y[i] * y[i];
    }
    return {h, x0, std::abs(w), std::sqrt(num / den)};
}

// Full width at half maximum of the peak at `top`, linear interpolation of the crossings.
inline double fwhm(const std::vector<double>& x, const std::vector<double>& y, std::size_t top) {
    const double half = 0.5 * y[top];
    std::size_t lo = top, hi = top;
    while (lo > 0 && y[lo] > half) --lo;
    while (hi + 1 < y.size() && y[hi] > half) ++hi;
    const double xl = x[lo] + (half - y[lo]) * (x[lo + 1] - x[lo]) / (y[lo + 1] - y[lo]);
    const double xr = x[hi - 1] + (half - y[hi - 1]) * (x[hi] - x[hi - 1]) / (y[hi] - y[hi - 1]);
    return xr - xl;
}

inline std::size_t argmax(const std::vector<double>& y) {
    return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

// Local maxima of |f| sampled on [a, b] with step h, refined by golden section.
inline std::vector<std::pair<double, double>> envelope_maxima(const std::function<double(double)>& f, double a,
                                                              double b, double h) {
    std::vector<std::pair<double, double>> out;
    double x0 = a, x1 = a + h, x2 = a + 2 * h;
    double f0 = f(x0), f1 = f(x1), f2 = f(x2);
    while (x2 <= b) {
        if (f1 > f0 && f1 >= f2) {
            double lo = x0, hi = x2;
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            for (int i = 0; i < 60; ++i) {
                const double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
                if (f(c) > f(d)) hi = d; else lo = c;
            }
            const double xm = 0.5 * (lo + hi);
            out.emplace_back(xm, f(xm));
        }
        x0 = x1; f0 = f1;
        x1 = x2; f1 = f2;
        x2 += h; f2 = f(x2);
    }
    return out;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& [x, y] : pts) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace ref
