#include "cfheat/ivp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "cfheat/errors.hpp"

namespace cfheat {

const char* to_string(Regime r) {
    switch (r) {
        case Regime::Generic: return "generic";
        case Regime::Resonant: return "resonant";
        case Regime::LambdaZero: return "lambda-zero";
    }
    return "?";
}

Regime classify_regime(const CFParams& params) {
    const double lambda = params.lambda();
    if (!params.is_classical()) {
        const double resonant = 1.0 / (1.0 - params.alpha());
        if (std::abs(lambda - resonant) < resonance_tol * std::max(1.0, std::abs(resonant))) {
            return Regime::Resonant;
        }
    }
    if (std::abs(lambda) < resonance_tol) return Regime::LambdaZero;
    return Regime::Generic;
}

TimeFunction::TimeFunction(Regime branch, CFParams params, double horizon, ScalarFn evaluator)
    : branch_(branch), params_(params), horizon_(horizon), eval_(std::move(evaluator)) {}

double TimeFunction::operator()(double t) const {
    if (t < 0.0 || t > horizon_) {
        throw DomainError("time function evaluated outside [0, T]: t = " + std::to_string(t));
    }
    return eval_(t);
}

TimeSignal TimeFunction::signal() const {
    return TimeSignal(eval_, horizon_);
}

namespace {

void require_near_zero(double value, const char* condition) {
    if (!(std::abs(value) < compat_tol)) throw CompatibilityError(condition, value);
}

void check_initial_compatibility(const IVProblem& p, double lambda) {
    const double f0 = p.f(0.0);
    if (p.u0 == 0.0) {
        require_near_zero(f0, "f(0)=0");
    } else {
        require_near_zero(f0 + lambda * p.u0, "f(0)=-lambda*u0");
    }
}

}  // namespace

TimeFunction solve_ivp(const IVProblem& p, const QuadratureOptions& quad) {
    const CFParams& params = p.params;
    const double alpha = params.alpha();
    const double lambda = params.lambda();
    const Regime regime = classify_regime(params);
    const double T = p.horizon();
    const int panels = quad.panels_for(T);
    const double u0 = p.u0;
    const TimeSignal f = p.f;

    check_initial_compatibility(p, lambda);

    switch (regime) {
        case Regime::LambdaZero: {
            // (1-a) f(t) + a int_0^t f, plus the initial value
            return TimeFunction(regime, params, T, [=](double t) {
                return (1.0 - alpha) * f(t) + alpha * exp_kernel_integral(f.value_fn(), 0.0, t, panels) + u0;
            });
        }
        case Regime::Generic: {
            const double denom = 1.0 - lambda * (1.0 - alpha);
            const double lead = (1.0 - alpha) / denom;
            const double history = alpha / (denom * denom);
            const double rate = lambda * alpha / denom;
            return TimeFunction(regime, params, T, [=](double t) {
                double u = lead * f(t) + history * exp_kernel_integral(f.value_fn(), rate, t, panels);
                if (u0 != 0.0) u += u0 / denom * std::exp(rate * t);
                return u;
            });
        }
        case Regime::Resonant: {
            params.require_nonsingular();
            require_near_zero(f.derivative(0.0), "f'(0)=0");
            const double c_deriv = (1.0 - alpha) * (1.0 - alpha) / alpha;
            if (u0 == 0.0) {
                return TimeFunction(regime, params, T, [=](double t) {
                    return -(1.0 - alpha) * f(t) - c_deriv * f.derivative(t);
                });
            }
            const double f0 = f(0.0);
            return TimeFunction(regime, params, T, [=](double t) {
                return -c_deriv * f.derivative(t) - (1.0 - alpha) * (f(t) - f0) + u0;
            });
        }
    }
    throw DomainError("unknown regime");
}

// ---- Volterra oracle --------------------------------------------------------

namespace {

// Picard iteration for u(t) - kappa int_0^t u(s) e^{-rate (t-s)} ds = rhs(t) on a
// uniform grid; the convolution is the trapezoidal rule accumulated left to right.
std::vector<double> picard_trapezoid(const std::vector<double>& rhs, double kappa, double rate,
                                     double h, const PicardOptions& opts) {
    const std::size_t n = rhs.size();
    const double decay = std::exp(-rate * h);
    std::vector<double> u = rhs;
    std::vector<double> next(n);
    double distance = 0.0;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        double conv = 0.0;
        next[0] = rhs[0];
        for (std::size_t i = 1; i < n; ++i) {
            conv = decay * conv + 0.5 * h * (decay * u[i - 1] + u[i]);
            next[i] = rhs[i] + kappa * conv;
        }
        distance = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            distance = std::max(distance, std::abs(next[i] - u[i]));
            scale = std::max(scale, std::abs(next[i]));
        }
        u.swap(next);
        if (distance < opts.tol * scale) return u;
    }
    throw NoConvergence(opts.max_iter, distance);
}

}  // namespace

SampledFunction volterra_oracle(const IVProblem& p, int n_steps, const PicardOptions& opts) {
    if (n_steps < 2) throw DomainError("oracle needs at least two steps");
    if (p.u0 != 0.0) throw DomainError("Volterra oracle requires u(0) = 0");
    const CFParams& params = p.params;
    const double alpha = params.alpha();
    const double lambda = params.lambda();
    const double rate = params.kernel_rate();
    const Regime regime = classify_regime(params);
    const double T = p.horizon();

    double kappa = 0.0;
    std::function<double(double)> rhs;
    if (regime == Regime::Resonant) {
        kappa = rate;
        const double c = -(1.0 - alpha) * (1.0 - alpha) / alpha;
        rhs = [&, c](double t) { return c * p.f.derivative(t); };
    } else {
        const double denom = 1.0 - lambda * (1.0 - alpha);
        kappa = alpha / ((1.0 - alpha) * denom);
        const double lead = (1.0 - alpha) / denom;
        rhs = [&, lead](double t) { return lead * p.f(t); };
    }

    auto knots_for = [T](int n) {
        std::vector<double> knots(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) knots[i] = (i == n) ? T : T * static_cast<double>(i) / n;
        return knots;
    };
    const auto fine_knots = knots_for(2 * n_steps);
    std::vector<double> rhs_fine(fine_knots.size());
    for (std::size_t i = 0; i < fine_knots.size(); ++i) rhs_fine[i] = rhs(fine_knots[i]);
    std::vector<double> rhs_coarse(static_cast<std::size_t>(n_steps) + 1);
    for (std::size_t i = 0; i < rhs_coarse.size(); ++i) rhs_coarse[i] = rhs_fine[2 * i];

    const auto coarse = picard_trapezoid(rhs_coarse, kappa, rate, T / n_steps, opts);
    const auto fine = picard_trapezoid(rhs_fine, kappa, rate, T / (2 * n_steps), opts);

    // the trapezoid error expands in even powers of h; cancel the h^2 term
    SampledFunction out;
    out.knots = knots_for(n_steps);
    out.values.resize(out.knots.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
    }
    return out;
}

// ---- kernels ----------------------------------------------------------------

namespace {

double kernel_scale(const CFParams& params) {
    if (classify_regime(params) == Regime::Resonant) {
        throw DomainError("iterated kernels are not defined at lambda = 1/(1-alpha)");
    }
    const double alpha = params.alpha();
    params.require_nonsingular();
    return alpha / ((1.0 - alpha) * (1.0 - params.lambda() * (1.0 - alpha)));
}

void require_ordered(double t, double xi) {
    if (xi > t) throw DomainError("kernel needs xi <= t");
}

}  // namespace

double iterated_kernel(int i, double t, double xi, const CFParams& params) {
    if (i < 1) throw DomainError("iterated kernel index starts at 1");
    require_ordered(t, xi);
    const double c = kernel_scale(params);
    const double d = t - xi;
    // c^i d^(i-1) / (i-1)! built incrementally
    double term = c;
    for (int j = 1; j < i; ++j) term *= c * d / j;
    return term * std::exp(-params.kernel_rate() * d);
}

double resolvent_kernel(double t, double xi, const CFParams& params) {
    require_ordered(t, xi);
    const double c = kernel_scale(params);
    const double alpha = params.alpha();
    const double lambda = params.lambda();
    const double denom = 1.0 - lambda * (1.0 - alpha);
    return c * std::exp(lambda * alpha / denom * (t - xi));
}

}  // namespace cfheat
