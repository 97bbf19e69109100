#pragma once

#include <functional>

namespace cfheat {

using SpaceTimeFn = std::function<double(double x, double t)>;

/// Right-hand side g(x, t) of the heat equation, optionally with its exact t-derivative.
struct SpaceTimeForcing {
    SpaceTimeFn value;
    SpaceTimeFn time_derivative;  ///< may be empty

    double operator()(double x, double t) const { return value(x, t); }
    bool has_time_derivative() const noexcept { return static_cast<bool>(time_derivative); }

    static SpaceTimeForcing zero() {
        return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
    }
};

}  // namespace cfheat
