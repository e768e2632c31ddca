#include "pbgfluor/time_grid.hpp"

#include <cmath>
#include <sstream>

#include "pbgfluor/error.hpp"

namespace pbgfluor {

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error("dynamics", "time grid horizon must be finite and > 0");
    }
    if (steps < 2) {
        throw Error("dynamics", "time grid needs at least 2 steps");
    }
}

std::size_t TimeGrid::index_of(double t) const {
    const double x = t / dt_;
    const double r = std::round(x);
    if (!(t >= 0.0) || r > static_cast<double>(steps_) || std::abs(x - r) > 1e-9 * std::max(1.0, r)) {
        std::ostringstream os;
        os << "time " << t << " is not on the grid (dt = " << dt_ << ", T = " << horizon_ << ")";
        throw Error("dynamics", os.str());
    }
    return static_cast<std::size_t>(r);
}

std::optional<std::string> TimeGrid::resolution_warning(double max_rate) const {
    if (dt_ * max_rate < 0.2) {
        return std::nullopt;
    }
    std::ostringstream os;
    os << "dt * max_rate = " << dt_ * max_rate << " >= 0.2; grid may not resolve the dynamics";
    return os.str();
}

} // namespace pbgfluor
