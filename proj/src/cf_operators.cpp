#include "cfheat/cf_operators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "cfheat/errors.hpp"

namespace cfheat {

int QuadratureOptions::panels_for(double horizon) const {
    const double raw = std::ceil(static_cast<double>(panels_per_unit) * std::max(horizon, 0.0));
    int n = std::max(2, static_cast<int>(raw));
    if (n % 2 != 0) ++n;
    return n;
}

double QuadratureOptions::fd_step(double horizon) const {
    return fd_step_scale * std::max(1.0, horizon);
}

// ---- CFParams ---------------------------------------------------------------

CFParams::CFParams(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("fractional order alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
}

CFParams::CFParams(double alpha, double lambda) : CFParams(alpha) {
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
    lambda_ = lambda;
}

double CFParams::lambda() const {
    if (!lambda_) throw DomainError("lambda is required for this operation");
    return *lambda_;
}

void CFParams::require_nonsingular() const {
    if (std::abs(1.0 - alpha_) < alpha_singular_tol) {
        throw AlphaSingular("alpha = " + std::to_string(alpha_) +
                            " is too close to 1 for an operation dividing by 1 - alpha");
    }
}

double CFParams::kernel_rate() const {
    require_nonsingular();
    return alpha_ / (1.0 - alpha_);
}

// ---- TimeSignal / SampledFunction ------------------------------------------

TimeSignal::TimeSignal(ScalarFn value, double horizon, ScalarFn derivative)
    : value_(std::move(value)), derivative_(std::move(derivative)), horizon_(horizon) {
    if (!value_) throw DomainError("time signal needs a value function");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("time signal horizon must be positive and finite");
    }
}

TimeSignal TimeSignal::constant(double c, double horizon) {
    TimeSignal s([c](double) { return c; }, horizon, [](double) { return 0.0; });
    s.mark_constant();
    return s;
}

double TimeSignal::derivative(double t) const {
    if (derivative_) return derivative_(t);
    return numeric_derivative(value_, t, QuadratureOptions{}.fd_step(horizon_), horizon_);
}

void SampledFunction::validate() const {
    if (knots.size() < 2) throw DomainError("sampled function needs at least two knots");
    if (values.size() != knots.size()) throw DomainError("knots and values differ in length");
    if (!derivative_values.empty() && derivative_values.size() != knots.size()) {
        throw DomainError("knots and derivative values differ in length");
    }
    if (knots.front() != 0.0) throw DomainError("first knot must be 0");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1])) throw DomainError("knots must be strictly increasing");
    }
}

double SampledFunction::operator()(double t) const {
    if (t < 0.0 || t > horizon()) {
        throw DomainError("sampled function evaluated outside [0, T]: t = " + std::to_string(t));
    }
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
    if (i >= knots.size() - 1) i = knots.size() - 2;
    const double h = knots[i + 1] - knots[i];
    const double s = (t - knots[i]) / h;
    if (derivative_values.empty()) return values[i] + s * (values[i + 1] - values[i]);
    // cubic Hermite
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * values[i] + h10 * h * derivative_values[i] + h01 * values[i + 1] +
           h11 * h * derivative_values[i + 1];
}

TimeSignal SampledFunction::signal() const {
    validate();
    auto copy = std::make_shared<SampledFunction>(*this);
    return TimeSignal([copy](double t) { return (*copy)(t); }, horizon());
}

// ---- quadrature helpers -----------------------------------------------------

double simpson_sum(std::span<const double> samples, double h) {
    const std::size_t n = samples.size();
    if (n < 3 || n % 2 == 0) throw DomainError("Simpson rule needs an odd number (>= 3) of samples");
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (i % 2 == 1) {
            odd += samples[i];
        } else {
            even += samples[i];
        }
    }
    return h / 3.0 * (samples.front() + 4.0 * odd + 2.0 * even + samples.back());
}

namespace {

inline double simpson_weight(int j, int n) {
    if (j == 0 || j == n) return 1.0;
    return (j % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace

double numeric_derivative(const ScalarFn& f, double s, double step, double horizon) {
    if (s - step < 0.0) {
        return (-3.0 * f(s) + 4.0 * f(s + step) - f(s + 2.0 * step)) / (2.0 * step);
    }
    if (s + step > horizon) {
        return (3.0 * f(s) - 4.0 * f(s - step) + f(s - 2.0 * step)) / (2.0 * step);
    }
    return (f(s + step) - f(s - step)) / (2.0 * step);
}

double exp_kernel_integral(const ScalarFn& g, double rate, double t, int panels) {
    if (t < 0.0) throw DomainError("exponential-kernel integral needs t >= 0");
    if (t == 0.0) return 0.0;
    if (panels < 2 || panels % 2 != 0) throw DomainError("panel count must be even and >= 2");
    const double h = t / panels;
    const double step = std::exp(rate * h);
    // nodes walked from xi = t backwards so the kernel is a running product
    double kernel = 1.0;
    double acc = 0.0;
    for (int j = panels; j >= 0; --j) {
        const double xi = (j == panels) ? t : j * h;
        acc += simpson_weight(j, panels) * g(xi) * kernel;
        kernel *= step;
    }
    return acc * h / 3.0;
}

ExpKernelMoments exp_kernel_moments(const ScalarFn& g, double rate, double t, int panels) {
    if (t < 0.0) throw DomainError("exponential-kernel integral needs t >= 0");
    if (t == 0.0) return {};
    if (panels < 2 || panels % 2 != 0) throw DomainError("panel count must be even and >= 2");
    const double h = t / panels;
    const double step = std::exp(rate * h);
    double kernel = 1.0;
    ExpKernelMoments m;
    for (int j = panels; j >= 0; --j) {
        const double xi = (j == panels) ? t : j * h;
        const double wg = simpson_weight(j, panels) * g(xi) * kernel;
        m.plain += wg;
        m.first += wg * (t - xi);
        kernel *= step;
    }
    m.plain *= h / 3.0;
    m.first *= h / 3.0;
    return m;
}

// ---- CF operators -----------------------------------------------------------

double cf_derivative(const TimeSignal& f, const CFParams& params, double t,
                     const QuadratureOptions& quad) {
    const double rate = params.kernel_rate();
    if (t < 0.0 || t > f.horizon()) {
        throw DomainError("CF derivative evaluated outside [0, T]: t = " + std::to_string(t));
    }
    if (f.is_constant() || t == 0.0) return 0.0;

    const double T = f.horizon();
    const int n = quad.panels_for(T);
    const double h = t / n;
    const double fd = quad.fd_step(T);
    const double step = std::exp(-rate * h);

    double kernel = 1.0;
    double acc = 0.0;
    for (int j = n; j >= 0; --j) {
        const double s = (j == n) ? t : j * h;
        const double df = f.has_analytic_derivative()
                              ? f.derivative_fn()(s)
                              : numeric_derivative(f.value_fn(), s, fd, T);
        acc += simpson_weight(j, n) * df * kernel;
        kernel *= step;
    }
    return acc * h / 3.0 / (1.0 - params.alpha());
}

std::vector<double> cf_derivative_columns(const std::function<std::vector<double>(double)>& f,
                                          std::size_t width, const CFParams& params, double t,
                                          double horizon, const QuadratureOptions& quad) {
    const double rate = params.kernel_rate();
    if (t < 0.0 || t > horizon) {
        throw DomainError("CF derivative evaluated outside [0, T]: t = " + std::to_string(t));
    }
    std::vector<double> acc(width, 0.0);
    if (t == 0.0) return acc;

    const int n = quad.panels_for(horizon);
    const double h = t / n;
    const double fd = quad.fd_step(horizon);
    const double step = std::exp(-rate * h);

    auto derivative_at = [&](double s) {
        std::vector<double> d(width);
        auto combine = [&](const std::vector<double>& a, double ca, const std::vector<double>& b,
                           double cb, const std::vector<double>& c, double cc) {
            for (std::size_t i = 0; i < width; ++i) {
                d[i] = (ca * a[i] + cb * b[i] + cc * c[i]) / (2.0 * fd);
            }
        };
        if (s - fd < 0.0) {
            combine(f(s), -3.0, f(s + fd), 4.0, f(s + 2.0 * fd), -1.0);
        } else if (s + fd > horizon) {
            combine(f(s), 3.0, f(s - fd), -4.0, f(s - 2.0 * fd), 1.0);
        } else {
            const auto hi = f(s + fd);
            const auto lo = f(s - fd);
            for (std::size_t i = 0; i < width; ++i) d[i] = (hi[i] - lo[i]) / (2.0 * fd);
        }
        return d;
    };

    double kernel = 1.0;
    for (int j = n; j >= 0; --j) {
        const double s = (j == n) ? t : j * h;
        const auto d = derivative_at(s);
        const double w = simpson_weight(j, n) * kernel;
        for (std::size_t i = 0; i < width; ++i) acc[i] += w * d[i];
        kernel *= step;
    }
    const double scale = h / 3.0 / (1.0 - params.alpha());
    for (auto& v : acc) v *= scale;
    return acc;
}

double cf_integral(const TimeSignal& u, double alpha, double t, const QuadratureOptions& quad) {
    const CFParams params(alpha);
    if (t < 0.0 || t > u.horizon()) {
        throw DomainError("CF integral evaluated outside [0, T]: t = " + std::to_string(t));
    }
    const double running = exp_kernel_integral(u.value_fn(), 0.0, t, quad.panels_for(u.horizon()));
    return (1.0 - params.alpha()) * u(t) + params.alpha() * running;
}

double cf_integral(const SampledFunction& u, double alpha, double t) {
    const CFParams params(alpha);
    u.validate();
    if (t < 0.0 || t > u.horizon()) {
        throw DomainError("CF integral evaluated outside [0, T]: t = " + std::to_string(t));
    }
    double running = 0.0;
    for (std::size_t i = 0; i + 1 < u.knots.size() && u.knots[i] < t; ++i) {
        const double b = std::min(t, u.knots[i + 1]);
        running += 0.5 * (b - u.knots[i]) * (u.values[i] + u(b));
    }
    return (1.0 - params.alpha()) * u(t) + params.alpha() * running;
}

}  // namespace cfheat
