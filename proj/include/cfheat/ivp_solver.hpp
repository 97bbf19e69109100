#pragma once

// Initial-value problem  D^a u(t) - lambda u(t) = f(t),  u(0) = u0,  0 <= t <= T.
//
// Away from resonance the problem reduces to a second-kind Volterra equation
// with kernel K(t,s) = c exp(-a/(1-a) (t-s)),  c = a / ((1-a)(1 - lambda(1-a))),
// whose resolvent sums to a single exponential. At lambda = 1/(1-a) the
// solution is local in f and f'.

#include "cfheat/cf_operators.hpp"

namespace cfheat {

/// Relative half-width of the band around lambda = 1/(1-alpha) treated as resonant.
inline constexpr double resonance_tol = 1e-9;
/// Tolerance for the compatibility conditions on f(0), f'(0).
inline constexpr double compat_tol = 1e-9;

enum class Regime { Generic, Resonant, LambdaZero };

const char* to_string(Regime r);

/// Resonant wins over LambdaZero; for alpha in (0,1) they cannot coincide.
Regime classify_regime(const CFParams& params);

struct IVProblem {
    CFParams params;  ///< must carry lambda
    TimeSignal f;     ///< forcing on [0, T]; T is f.horizon()
    double u0 = 0.0;

    double horizon() const { return f.horizon(); }
};

/// Closed-form u(t) on [0, T], tagged with the branch that produced it.
class TimeFunction {
public:
    TimeFunction(Regime branch, CFParams params, double horizon, ScalarFn evaluator);

    /// Throws DomainError outside [0, T].
    double operator()(double t) const;

    Regime branch() const noexcept { return branch_; }
    const CFParams& params() const noexcept { return params_; }
    double horizon() const noexcept { return horizon_; }

    /// View as a TimeSignal (no analytic derivative).
    TimeSignal signal() const;

private:
    Regime branch_;
    CFParams params_;
    double horizon_;
    ScalarFn eval_;
};

/// Throws CompatibilityError naming the violated condition, AlphaSingular when the
/// branch needs alpha < 1.
TimeFunction solve_ivp(const IVProblem& problem, const QuadratureOptions& quad = {});

struct PicardOptions {
    double tol = 1e-12;  ///< successive-iterate sup distance
    int max_iter = 200;
};

/// Independent check: Picard iteration of the Volterra equation on a uniform grid of
/// n_steps intervals (n_steps + 1 knots). The convolution is trapezoidal, solved on this
/// grid and on one twice as fine, then Richardson-extrapolated. Requires u0 = 0.
/// Throws NoConvergence when max_iter is exhausted.
SampledFunction volterra_oracle(const IVProblem& problem, int n_steps, const PicardOptions& opts = {});

/// i-th iterated kernel K_i(t, xi), closed form. Not defined at resonance.
double iterated_kernel(int i, double t, double xi, const CFParams& params);

/// Resolvent R(t, xi) = sum_i K_i(t, xi), closed form. Not defined at resonance.
double resolvent_kernel(double t, double xi, const CFParams& params);

}  // namespace cfheat
