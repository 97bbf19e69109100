#pragma once

// Caputo-Fabrizio derivative, the Losada-Nieto integral operator and the
// exponential-kernel convolution quadrature shared by the solvers.
//
//   D^a f(t) = 1/(1-a) * int_0^t f'(s) exp(-a/(1-a) (t-s)) ds
//   I^a u(t) = (1-a) u(t) + a * int_0^t u(s) ds
//
// All integrals use composite Simpson on a uniform panel count fixed by the
// horizon of the function, so a value computed at t varies smoothly with t.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cfheat {

/// Below this distance from alpha = 1 operations dividing by (1 - alpha) refuse.
inline constexpr double alpha_singular_tol = 1e-12;

struct QuadratureOptions {
    int panels_per_unit = 512;     ///< Simpson panels per unit of horizon
    double fd_step_scale = 1e-6;   ///< central-difference step is scale * max(1, T)

    /// Even panel count used for every integral over a sub-interval of [0, horizon].
    int panels_for(double horizon) const;
    double fd_step(double horizon) const;
};

/// Fractional order alpha in (0, 1] and, for initial-value problems, the coefficient lambda.
class CFParams {
public:
    explicit CFParams(double alpha);
    CFParams(double alpha, double lambda);

    double alpha() const noexcept { return alpha_; }
    const std::optional<double>& lambda_opt() const noexcept { return lambda_; }
    /// Throws DomainError when lambda was not supplied.
    double lambda() const;

    bool is_classical() const noexcept { return alpha_ == 1.0; }
    /// Throws AlphaSingular when alpha is within alpha_singular_tol of 1.
    void require_nonsingular() const;
    /// alpha / (1 - alpha), the decay rate of the CF kernel.
    double kernel_rate() const;

private:
    double alpha_;
    std::optional<double> lambda_;
};

using ScalarFn = std::function<double(double)>;

/// A scalar function of time on [0, horizon] with an optional analytic derivative.
class TimeSignal {
public:
    TimeSignal(ScalarFn value, double horizon, ScalarFn derivative = {});

    static TimeSignal constant(double c, double horizon);

    double operator()(double t) const { return value_(t); }
    /// Analytic derivative when available, otherwise finite differences with default step.
    double derivative(double t) const;

    bool has_analytic_derivative() const noexcept { return static_cast<bool>(derivative_); }
    bool is_constant() const noexcept { return constant_; }
    double horizon() const noexcept { return horizon_; }
    const ScalarFn& value_fn() const noexcept { return value_; }
    const ScalarFn& derivative_fn() const noexcept { return derivative_; }

    /// Marks the signal as constant in t; cf_derivative then returns 0 without quadrature.
    TimeSignal& mark_constant() noexcept {
        constant_ = true;
        return *this;
    }

private:
    ScalarFn value_;
    ScalarFn derivative_;
    double horizon_;
    bool constant_ = false;
};

/// Discrete carrier for a function of time: knots on [0, T] and values at the knots.
/// Evaluation is piecewise linear, or cubic Hermite when derivative values are present.
struct SampledFunction {
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<double> derivative_values;  ///< empty or same length as knots

    /// Throws DomainError unless knots start at 0, increase strictly and lengths agree.
    void validate() const;
    double horizon() const { return knots.back(); }
    double operator()(double t) const;
    TimeSignal signal() const;
};

/// Second-order finite-difference derivative of f at s, staying inside [0, horizon].
double numeric_derivative(const ScalarFn& f, double s, double step, double horizon);

/// Caputo-Fabrizio derivative of f at t. Requires alpha < 1.
double cf_derivative(const TimeSignal& f, const CFParams& params, double t,
                     const QuadratureOptions& quad = {});

/// Column-wise CF derivative of a vector-valued function of time (width components),
/// sharing one quadrature pass. Always uses finite differences for the derivative.
std::vector<double> cf_derivative_columns(const std::function<std::vector<double>(double)>& f,
                                          std::size_t width, const CFParams& params, double t,
                                          double horizon, const QuadratureOptions& quad = {});

/// Losada-Nieto integral operator applied to u at t.
double cf_integral(const TimeSignal& u, double alpha, double t,
                   const QuadratureOptions& quad = {});
/// Same operator on sampled data; the running integral is exact for the linear interpolant.
double cf_integral(const SampledFunction& u, double alpha, double t);

/// int_0^t g(xi) exp(rate (t - xi)) dxi by composite Simpson on `panels` panels.
double exp_kernel_integral(const ScalarFn& g, double rate, double t, int panels);

struct ExpKernelMoments {
    double plain = 0.0;  ///< int_0^t g(xi) e^{rate (t-xi)} dxi
    double first = 0.0;  ///< int_0^t g(xi) (t-xi) e^{rate (t-xi)} dxi
};

/// Both the plain and first-moment exponential convolutions in one pass.
ExpKernelMoments exp_kernel_moments(const ScalarFn& g, double rate, double t, int panels);

/// Composite Simpson weights' sum applied to samples on a uniform grid (size odd >= 3).
double simpson_sum(std::span<const double> samples, double h);

}  // namespace cfheat
