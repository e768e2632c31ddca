// time_grid.hpp — Uniform time grid t_n = n * T / N, n = 0..N

#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace pbgfluor {

class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return dt_; }
    double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt_; }

    // Grid index of t; throws if t is not a grid point (relative tolerance 1e-9 of dt).
    std::size_t index_of(double t) const;

    // Trapezoid weight of point n for an integral over [0, T].
    double weight(std::size_t n) const noexcept {
        return (n == 0 || n == steps_) ? 0.5 * dt_ : dt_;
    }

    // Warning text when dt * max_rate >= 0.2, where max_rate is the fastest
    // frequency the dynamics must resolve.
    std::optional<std::string> resolution_warning(double max_rate) const;

    TimeGrid refined() const { return TimeGrid(horizon_, 2 * steps_); }

private:
    double horizon_;
    std::size_t steps_;
    double dt_;
};

} // namespace pbgfluor
