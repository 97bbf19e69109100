#include <cmath>
#include <numbers>

#include "cfheat/cf_operators.hpp"
#include "cfheat/errors.hpp"
#include "doctest.h"

using namespace cfheat;

namespace {

TimeSignal linear(double horizon = 1.0) {
    return TimeSignal([](double t) { return t; }, horizon, [](double) { return 1.0; });
}

// (1/(1-a)) int_0^t cos(s) e^{-r(t-s)} ds, integrated by hand.
double cf_of_sin(double alpha, double t) {
    const double r = alpha / (1 - alpha);
    return (r * std::cos(t) + std::sin(t) - r * std::exp(-r * t)) / (r * r + 1) / (1 - alpha);
}

}  // namespace

TEST_CASE("CFParams rejects alpha outside (0, 1]") {
    CHECK_THROWS_AS(CFParams(0.0), DomainError);
    CHECK_THROWS_AS(CFParams(-0.5), DomainError);
    CHECK_THROWS_AS(CFParams(1.5), DomainError);
    CHECK_NOTHROW(CFParams(1.0));
    CHECK_THROWS_AS(CFParams(1.0).kernel_rate(), AlphaSingular);
    CHECK_THROWS_AS(CFParams(0.5).lambda(), DomainError);
    CHECK(CFParams(0.5, 2.0).lambda() == 2.0);
}

TEST_CASE("cf_derivative examples") {
    const CFParams half(0.5);

    SUBCASE("constant vanishes exactly") {
        for (double t : {0.0, 0.3, 1.0}) CHECK(cf_derivative(TimeSignal::constant(3.7, 1.0), half, t) == 0.0);
        // a constant without the flag still integrates a zero derivative
        TimeSignal c([](double) { return 2.0; }, 1.0, [](double) { return 0.0; });
        CHECK(cf_derivative(c, half, 1.0) == 0.0);
    }

    SUBCASE("f(t) = t at t = 1") {
        const double expected = 2.0 * (1.0 - std::exp(-1.0));
        CHECK(cf_derivative(linear(), half, 1.0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(expected == doctest::Approx(1.264241).epsilon(1e-6));
        // finite-difference path
        TimeSignal no_deriv([](double t) { return t; }, 1.0);
        CHECK(std::abs(cf_derivative(no_deriv, half, 1.0) - expected) < 1e-8);
    }

    SUBCASE("empty interval at t = 0") {
        TimeSignal sq([](double t) { return t * t; }, 1.0, [](double t) { return 2 * t; });
        CHECK(cf_derivative(sq, half, 0.0) == 0.0);
    }

    SUBCASE("sin(t) against the closed form, both derivative paths") {
        TimeSignal with([](double t) { return std::sin(t); }, 2.0, [](double t) { return std::cos(t); });
        TimeSignal without([](double t) { return std::sin(t); }, 2.0);
        for (double alpha : {0.25, 0.5, 0.75}) {
            for (double t : {0.1, 0.9, 2.0}) {
                const double ref = cf_of_sin(alpha, t);
                CHECK(std::abs(cf_derivative(with, CFParams(alpha), t) - ref) < 1e-10);
                CHECK(std::abs(cf_derivative(without, CFParams(alpha), t) - ref) < 1e-8);
            }
        }
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(cf_derivative(linear(), CFParams(1.0), 0.5), AlphaSingular);
        CHECK_THROWS_AS(cf_derivative(linear(), CFParams(1.0 - 1e-13), 0.5), AlphaSingular);
        CHECK_THROWS_AS(cf_derivative(linear(), half, -0.1), DomainError);
        CHECK_THROWS_AS(cf_derivative(linear(), half, 1.5), DomainError);
    }
}

TEST_CASE("cf_derivative is linear") {
    const CFParams p(0.4);
    TimeSignal f([](double t) { return std::exp(-t) * t; }, 1.0);
    TimeSignal g([](double t) { return std::sin(3 * t) + t * t; }, 1.0);
    const double a = 2.5, b = -1.25;
    TimeSignal combo([&](double t) { return a * f(t) + b * g(t); }, 1.0);
    for (double t : {0.2, 0.5, 1.0}) {
        const double lhs = cf_derivative(combo, p, t);
        const double rhs = a * cf_derivative(f, p, t) + b * cf_derivative(g, p, t);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("cf_derivative quadrature converges at Simpson order") {
    // f(t) = cos(2t): the integrand is not a polynomial so the error is visible at low panel counts
    TimeSignal f([](double t) { return std::cos(2 * t); }, 1.0, [](double t) { return -2 * std::sin(2 * t); });
    const CFParams p(0.5);
    // closed form: (1/(1-a)) int_0^1 -2 sin(2s) e^{-(1-s)} ds
    const double r = 1.0;
    const double t = 1.0;
    const double closed =
        -2.0 * (r * std::sin(2 * t) - 2 * std::cos(2 * t) + 2 * std::exp(-r * t)) / (r * r + 4) / 0.5;
    double previous = 0.0;
    for (int panels : {2, 4, 8, 16}) {
        QuadratureOptions q;
        q.panels_per_unit = panels;
        const double err = std::abs(cf_derivative(f, p, t, q) - closed);
        if (previous > 0.0) CHECK(previous / err >= 3.5);
        previous = err;
    }
    CHECK(std::abs(cf_derivative(f, p, t) - closed) < 1e-11);
}

TEST_CASE("cf_integral examples") {
    CHECK(cf_integral(TimeSignal::constant(0.0, 3.0), 0.3, 2.0) == 0.0);
    CHECK(cf_integral(TimeSignal::constant(1.0, 2.0), 0.5, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(cf_integral(linear(), 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(cf_integral(linear(), 0.5, 1.5), DomainError);
    CHECK_THROWS_AS(cf_integral(linear(), 0.0, 0.5), DomainError);
}

TEST_CASE("cf_integral undoes cf_derivative up to f(0)") {
    struct Case {
        ScalarFn f;
        ScalarFn df;
    };
    const Case corpus[] = {
        {[](double t) { return t; }, [](double) { return 1.0; }},
        {[](double t) { return 1.0 + t * t; }, [](double t) { return 2 * t; }},
        {[](double t) { return std::sin(t) + 0.5; }, [](double t) { return std::cos(t); }},
        {[](double t) { return t * std::exp(-t); }, [](double t) { return (1 - t) * std::exp(-t); }},
    };
    for (double alpha : {0.25, 0.5, 0.75}) {
        const CFParams p(alpha);
        for (const auto& c : corpus) {
            const TimeSignal f(c.f, 1.0, c.df);
            const TimeSignal d([&](double s) { return cf_derivative(f, p, s); }, 1.0);
            for (double t : {0.25, 1.0}) {
                CHECK(std::abs(cf_integral(d, alpha, t) - (c.f(t) - c.f(0.0))) < 1e-7);
            }
        }
    }
}

TEST_CASE("exp_kernel_integral") {
    const ScalarFn zero = [](double) { return 0.0; };
    const ScalarFn one = [](double) { return 1.0; };
    CHECK(exp_kernel_integral(zero, -2.0, 1.0, 512) == 0.0);
    CHECK(exp_kernel_integral(one, 0.0, 3.0, 1536) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(exp_kernel_integral(one, -1.0, 1.0, 512) - (1 - std::exp(-1.0))) < 1e-13);
    CHECK(exp_kernel_integral(one, 1.0, 0.0, 2) == 0.0);
    CHECK_THROWS_AS(exp_kernel_integral(one, 1.0, -1.0, 2), DomainError);
    CHECK_THROWS_AS(exp_kernel_integral(one, 1.0, 1.0, 3), DomainError);

    // int_0^t (t-xi) e^{-(t-xi)} dxi = 1 - (1+t) e^{-t}
    const auto m = exp_kernel_moments(one, -1.0, 2.0, 1024);
    CHECK(std::abs(m.plain - (1 - std::exp(-2.0))) < 1e-13);
    CHECK(std::abs(m.first - (1 - 3 * std::exp(-2.0))) < 1e-12);
}

TEST_CASE("cf_derivative_columns matches the scalar path") {
    const CFParams p(0.6);
    auto column = [](double t) {
        return std::vector<double>{t * t, std::sin(t), 4.0};
    };
    const auto d = cf_derivative_columns(column, 3, p, 0.8, 1.0);
    TimeSignal sq([](double t) { return t * t; }, 1.0);
    TimeSignal sn([](double t) { return std::sin(t); }, 1.0);
    CHECK(std::abs(d[0] - cf_derivative(sq, p, 0.8)) < 1e-12);
    CHECK(std::abs(d[1] - cf_derivative(sn, p, 0.8)) < 1e-12);
    CHECK(std::abs(d[2]) < 1e-12);
}

TEST_CASE("SampledFunction") {
    SampledFunction bad{{0.0, 0.5, 0.5}, {0, 1, 2}, {}};
    CHECK_THROWS_AS(bad.validate(), DomainError);
    SampledFunction shifted{{0.1, 0.5}, {0, 1}, {}};
    CHECK_THROWS_AS(shifted.validate(), DomainError);

    SampledFunction lin{{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}, {}};
    CHECK(lin(0.25) == doctest::Approx(0.25));
    // u = t: (1-a) t + a t^2/2, exact for the linear interpolant
    CHECK(cf_integral(lin, 0.5, 0.75) == doctest::Approx(0.5 * 0.75 + 0.5 * 0.75 * 0.75 / 2).epsilon(1e-14));
    CHECK_THROWS_AS(lin(1.1), DomainError);

    SampledFunction herm{{0.0, 1.0}, {0.0, 1.0}, {0.0, 2.0}};  // t^2 exactly
    CHECK(herm(0.3) == doctest::Approx(0.09).epsilon(1e-14));
}
