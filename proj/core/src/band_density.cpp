// band_density.cpp — Closed-form density of states of the periodic 3D band

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pbgfluor/environment.hpp"
#include "pbgfluor/error.hpp"

namespace pbgfluor::environment {

double cosine_pair_density(double x) {
    const double ax = std::abs(x);
    if (ax >= 2.0) {
        return 0.0;
    }
    if (ax == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double k = std::sqrt(1.0 - 0.25 * ax * ax);
    return std::comp_ellint_1(k) / (std::numbers::pi * std::numbers::pi);
}

double band_density_3d(double omega, double coupling, double center, double half_width) {
    if (!(half_width > 0.0)) {
        throw Error("environment", "band half-width must be > 0");
    }
    const double b = half_width / 3.0;
    const double x = (omega - center) / b;
    if (std::abs(x) >= 3.0) {
        return 0.0;
    }
    // D(x) = (1/pi) int_0^pi rho2(x - cos k) dk, split where the integrand is singular
    // (cos k = x: log) or jumps (cos k = x -+ 2).
    std::vector<double> cuts = {0.0, std::numbers::pi};
    for (double c : {x, x - 2.0, x + 2.0}) {
        if (c > -1.0 && c < 1.0) {
            cuts.push_back(std::acos(c));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    boost::math::quadrature::tanh_sinh<double> integrator;
    // The log singularity sits on a cut; an exact hit contributes nothing.
    auto f = [x](double k) {
        const double v = cosine_pair_density(x - std::cos(k));
        return std::isfinite(v) ? v : 0.0;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] > 0.0) {
            total += integrator.integrate(f, cuts[i], cuts[i + 1], 1e-7);
        }
    }
    return coupling * coupling * total / (std::numbers::pi * b);
}

} // namespace pbgfluor::environment
