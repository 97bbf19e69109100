#include "cfheat/bvp_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "cfheat/errors.hpp"
#include "cfheat/verification.hpp"

namespace cfheat {

const char* to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::P1_Dirichlet: return "dirichlet";
        case ProblemKind::P2_Neumann: return "neumann";
        case ProblemKind::P3_Periodic: return "periodic";
        case ProblemKind::P4_NonLocal: return "nonlocal";
    }
    return "?";
}

ProblemKind problem_from_number(int n) {
    switch (n) {
        case 1: return ProblemKind::P1_Dirichlet;
        case 2: return ProblemKind::P2_Neumann;
        case 3: return ProblemKind::P3_Periodic;
        case 4: return ProblemKind::P4_NonLocal;
        default: throw DomainError("problem must be 1, 2, 3 or 4, got " + std::to_string(n));
    }
}

int problem_number(ProblemKind kind) {
    return static_cast<int>(kind) + 1;
}

BasisFamily family_for(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::P1_Dirichlet: return BasisFamily::DirichletSine;
        case ProblemKind::P2_Neumann: return BasisFamily::NeumannCosine;
        case ProblemKind::P3_Periodic: return BasisFamily::PeriodicFourier;
        case ProblemKind::P4_NonLocal: return BasisFamily::RootSystemX;
    }
    throw DomainError("unknown problem kind");
}

void BVProblem::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1) for boundary-value problems");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("T must be positive and finite");
    if (n_modes < 1) throw DomainError("n_modes must be at least 1");
    if (!g.value) throw DomainError("forcing g is not set");
}

// ---- UniformSeries / ExpConvolution -------------------------------------------

UniformSeries::UniformSeries(std::vector<double> values, double horizon) : horizon_(horizon) {
    if (values.size() < 2) throw DomainError("uniform series needs at least two samples");
    if (!(horizon > 0.0)) throw DomainError("uniform series horizon must be positive");
    step_ = horizon / static_cast<double>(values.size() - 1);
    zero_ = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    values_ = std::make_shared<const std::vector<double>>(std::move(values));
}

double UniformSeries::operator()(double t) const {
    if (t < 0.0 || t > horizon_) {
        throw DomainError("uniform series evaluated outside [0, T]: t = " + std::to_string(t));
    }
    const auto& v = *values_;
    const std::size_t last = v.size() - 1;
    std::size_t j = std::min(static_cast<std::size_t>(t / step_), last - 1);
    const double s = (t - static_cast<double>(j) * step_) / step_;
    return v[j] + s * (v[j + 1] - v[j]);
}

TimeSignal UniformSeries::signal() const {
    UniformSeries copy = *this;
    return TimeSignal([copy](double t) { return copy(t); }, horizon_);
}

namespace {

// chi_n(z) = int_0^1 tau^n e^{z tau} dtau for n = 0, 1, 2
std::array<double, 3> chi(double z) {
    if (std::abs(z) < 1.0) {
        std::array<double, 3> out{0.0, 0.0, 0.0};
        double term = 1.0;  // z^m / m!
        for (int m = 0; m < 30; ++m) {
            out[0] += term / (m + 1);
            out[1] += term / (m + 2);
            out[2] += term / (m + 3);
            term *= z / (m + 1);
        }
        return out;
    }
    const double ez = std::exp(z);
    const double c0 = std::expm1(z) / z;
    const double c1 = (ez - c0) / z;
    const double c2 = (ez - 2.0 * c1) / z;
    return {c0, c1, c2};
}

}  // namespace

ExpConvolution::ExpConvolution(const UniformSeries& p, double rate) : p_(p), rate_(rate) {
    const auto& v = p.values();
    const double h = p.step_;
    const auto c = chi(rate * h);
    const double e = std::exp(rate * h);
    Tables tables;
    tables.plain.assign(v.size(), 0.0);
    tables.first.assign(v.size(), 0.0);
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        const double end = v[j + 1];
        const double slope = v[j + 1] - v[j];
        tables.plain[j + 1] = e * tables.plain[j] + h * (end * c[0] - slope * c[1]);
        tables.first[j + 1] = e * (tables.first[j] + h * tables.plain[j]) + h * h * (end * c[1] - slope * c[2]);
    }
    tables_ = std::make_shared<const Tables>(std::move(tables));
}

ExpKernelMoments ExpConvolution::operator()(double t) const {
    if (p_.is_zero()) return {};
    const double value = p_(t);  // range check
    const auto& v = p_.values();
    const double h = p_.step_;
    const std::size_t j = std::min(static_cast<std::size_t>(t / h), v.size() - 2);
    const double delta = t - static_cast<double>(j) * h;
    const double plain_j = tables_->plain[j];
    const double first_j = tables_->first[j];
    if (delta <= 0.0) return {plain_j, first_j};
    const auto c = chi(rate_ * delta);
    const double e = std::exp(rate_ * delta);
    const double rise = value - v[j];
    return {e * plain_j + delta * (value * c[0] - rise * c[1]),
            e * (first_j + delta * plain_j) + delta * delta * (value * c[1] - rise * c[2])};
}

// ---- modal solutions ----------------------------------------------------------

namespace {

struct ModalCoefficients {
    double denom;  // 1 + mu (1 - alpha)
    double lead;   // (1 - alpha) / denom
    double history;  // alpha / denom^2
    double rate;   // -alpha mu / denom
};

ModalCoefficients modal_coefficients(double mu, double alpha) {
    const double denom = 1.0 + mu * (1.0 - alpha);
    return {denom, (1.0 - alpha) / denom, alpha / (denom * denom), -alpha * mu / denom};
}

void require_mu(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("modal coefficient mu must be >= 0");
}

void require_zero_start(double value, const std::string& what) {
    if (!(std::abs(value) < compat_tol)) throw CompatibilityError(what + "(0)=0", value);
}

}  // namespace

TimeFunction solve_modal_selfadjoint(const TimeSignal& gk, double mu, double alpha, const QuadratureOptions& quad) {
    require_mu(mu);
    require_zero_start(gk(0.0), "g_k");
    return solve_ivp(IVProblem{CFParams(alpha, -mu), gk, 0.0}, quad);
}

std::pair<TimeFunction, TimeFunction> solve_modal_coupled(const TimeSignal& g1k, const TimeSignal& g2k, int k,
                                                          double alpha, const QuadratureOptions& quad) {
    if (k < 1) throw DomainError("coupled modes start at k = 1");
    require_zero_start(g1k(0.0), "g_1k");
    require_zero_start(g2k(0.0), "g_2k");
    const double lam = 2.0 * k * std::numbers::pi;
    const double mu = lam * lam;
    const CFParams params(alpha, -mu);
    auto u2 = solve_modal_selfadjoint(g2k, mu, alpha, quad);

    const auto m = modal_coefficients(mu, alpha);
    const double T = std::min(g1k.horizon(), g2k.horizon());
    const int panels = quad.panels_for(T);
    const ScalarFn g1 = g1k.value_fn();
    const ScalarFn g2 = g2k.value_fn();
    TimeFunction u1(classify_regime(params), params, T, [=](double t) {
        const double i1 = exp_kernel_integral(g1, m.rate, t, panels);
        const auto i2 = exp_kernel_moments(g2, m.rate, t, panels);
        return m.lead * (g1(t) + 2.0 * lam * m.lead * g2(t)) +
               m.history * (i1 + 4.0 * lam * m.lead * i2.plain + 2.0 * lam * m.history * i2.first);
    });
    return {std::move(u1), std::move(u2)};
}

// ---- modal forcing cache --------------------------------------------------------

namespace {

struct ModalCache {
    std::vector<UniformSeries> value;       // synthesis-weighted g_k
    std::vector<UniformSeries> derivative;  // its t-derivative
};

ModalCache project_forcing(const BVProblem& p, const std::vector<ModeIndex>& modes, const BvpOptions& opts) {
    const XQuadrature quad(opts.x_panels);
    const auto& xs = quad.nodes();
    const std::size_t nx = xs.size();
    const std::size_t nm = modes.size();
    if (opts.t_cache < 2) throw DomainError("the modal forcing cache needs at least two times");
    const std::size_t nt = static_cast<std::size_t>(opts.t_cache);

    // weights[m][q] = synthesis weight * Simpson weight * dual basis value
    std::vector<std::vector<double>> weights(nm, std::vector<double>(nx));
    for (std::size_t m = 0; m < nm; ++m) {
        const ModeIndex dual = dual_mode(modes[m]);
        const double sw = synthesis_weight(modes[m]);
        for (std::size_t q = 0; q < nx; ++q) weights[m][q] = sw * quad.weights()[q] * eval_basis(dual, xs[q]);
    }

    const double T = p.T;
    const double fd = opts.quad.fd_step(T);
    std::vector<std::vector<double>> value(nm, std::vector<double>(nt));
    std::vector<std::vector<double>> deriv(nm, std::vector<double>(nt));

    auto project = [&](const SpaceTimeFn& f, double t, std::vector<double>& samples, std::vector<double>& out) {
        for (std::size_t q = 0; q < nx; ++q) samples[q] = f(xs[q], t);
        for (std::size_t m = 0; m < nm; ++m) {
            double acc = 0.0;
            for (std::size_t q = 0; q < nx; ++q) acc += weights[m][q] * samples[q];
            out[m] = acc;
        }
    };

    auto fill_rows = [&](std::size_t first, std::size_t last) {
        std::vector<double> samples(nx);
        std::vector<double> here(nm), a(nm), b(nm), c(nm);
        for (std::size_t j = first; j < last; ++j) {
            const double t = (j == nt - 1) ? T : T * static_cast<double>(j) / static_cast<double>(nt - 1);
            project(p.g.value, t, samples, here);
            if (p.g.has_time_derivative()) {
                project(p.g.time_derivative, t, samples, a);
            } else if (t - fd < 0.0) {
                project(p.g.value, t + fd, samples, b);
                project(p.g.value, t + 2.0 * fd, samples, c);
                for (std::size_t m = 0; m < nm; ++m) a[m] = (-3.0 * here[m] + 4.0 * b[m] - c[m]) / (2.0 * fd);
            } else if (t + fd > T) {
                project(p.g.value, t - fd, samples, b);
                project(p.g.value, t - 2.0 * fd, samples, c);
                for (std::size_t m = 0; m < nm; ++m) a[m] = (3.0 * here[m] - 4.0 * b[m] + c[m]) / (2.0 * fd);
            } else {
                project(p.g.value, t + fd, samples, b);
                project(p.g.value, t - fd, samples, c);
                for (std::size_t m = 0; m < nm; ++m) a[m] = (b[m] - c[m]) / (2.0 * fd);
            }
            for (std::size_t m = 0; m < nm; ++m) {
                value[m][j] = here[m];
                deriv[m][j] = a[m];
            }
        }
    };

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, nt));
    if (threads <= 1) {
        fill_rows(0, nt);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (nt + threads - 1) / threads;
        for (std::size_t first = 0; first < nt; first += chunk) {
            pool.emplace_back(fill_rows, first, std::min(nt, first + chunk));
        }
    }

    ModalCache cache;
    for (std::size_t m = 0; m < nm; ++m) {
        cache.value.emplace_back(std::move(value[m]), T);
        cache.derivative.emplace_back(std::move(deriv[m]), T);
    }
    return cache;
}

std::string mode_label(const ModeIndex& m) {
    return std::string("g_") + to_string(m.slot) + std::to_string(m.k);
}

ModalTerm selfadjoint_term(const ModeIndex& mode, double mu, double alpha, double T, const UniformSeries& g,
                           const UniformSeries& dg) {
    require_zero_start(g(0.0), mode_label(mode));
    const auto c = modal_coefficients(mu, alpha);
    const CFParams params(alpha, -mu);
    const ExpConvolution conv(g, c.rate);
    TimeFunction u(classify_regime(params), params, T,
                   [=](double t) { return c.lead * g(t) + c.history * conv.plain(t); });
    ScalarFn uxx;
    if (mu == 0.0) {
        uxx = [](double) { return 0.0; };
    } else {
        // -mu u = -g + (1/D) int_0^t g'(xi) e^{rate (t - xi)} dxi
        const ExpConvolution dconv(dg, c.rate);
        uxx = [=](double t) { return -g(t) + dconv.plain(t) / c.denom; };
    }
    return {mode, std::move(u), std::move(uxx), g};
}

// cosine coefficient of the P4 pair; the x sin coefficient is a plain self-adjoint term
ModalTerm coupled_cos_term(const ModeIndex& mode, double alpha, double T, const UniformSeries& g1,
                           const UniformSeries& dg1, const UniformSeries& g2, const UniformSeries& dg2) {
    require_zero_start(g1(0.0), mode_label(mode));
    const double lam = 2.0 * mode.k * std::numbers::pi;
    const auto c = modal_coefficients(lam * lam, alpha);
    const CFParams params(alpha, -lam * lam);
    const ExpConvolution i1(g1, c.rate), i2(g2, c.rate), d1(dg1, c.rate), d2(dg2, c.rate);
    TimeFunction u(classify_regime(params), params, T, [=](double t) {
        const auto m2 = i2(t);
        return c.lead * (g1(t) + 2.0 * lam * c.lead * g2(t)) +
               c.history * (i1.plain(t) + 4.0 * lam * c.lead * m2.plain + 2.0 * lam * c.history * m2.first);
    });
    // -lam^2 u1 + 2 lam u2, written through the derivatives of the forcings
    ScalarFn uxx = [=](double t) {
        const auto m2 = d2(t);
        return -g1(t) + (d1.plain(t) + 2.0 * lam * (c.lead * m2.plain + c.history * m2.first)) / c.denom;
    };
    return {mode, std::move(u), std::move(uxx), g1};
}

}  // namespace

SeriesSolution solve_bvp(const BVProblem& p, const BvpOptions& opts) {
    p.validate();
    if (opts.enforce_hypotheses) {
        const auto report = check_hypotheses(p);
        if (!report.all_pass()) throw HypothesisViolation(report.failed());
    }
    const BasisFamily family = family_for(p.problem);
    const auto modes = family_modes(family, p.n_modes);
    const ModalCache cache = project_forcing(p, modes, opts);

    SeriesSolution s{p.problem, family, p.alpha, p.T, p.n_modes, {}};
    s.terms.reserve(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const ModeIndex& m = modes[i];
        if (family == BasisFamily::RootSystemX && m.slot == ModeSlot::Cos) {
            // the partner x sin mode follows immediately in canonical order
            s.terms.push_back(coupled_cos_term(m, p.alpha, p.T, cache.value[i], cache.derivative[i],
                                               cache.value[i + 1], cache.derivative[i + 1]));
        } else {
            s.terms.push_back(
                selfadjoint_term(m, eigenvalue(m), p.alpha, p.T, cache.value[i], cache.derivative[i]));
        }
    }
    return s;
}

const ModalTerm& SeriesSolution::term(const ModeIndex& m) const {
    for (const auto& term : terms) {
        if (term.mode == m) return term;
    }
    throw DomainError(std::string("mode ") + to_string(m.slot) + std::to_string(m.k) + " is not in the series");
}

// ---- evaluation -------------------------------------------------------------------

namespace {

void require_rectangle(const SeriesSolution& s, double x, double t) {
    if (!(x >= 0.0 && x <= 1.0) || !(t >= 0.0 && t <= s.T)) {
        throw DomainError("series evaluated outside [0,1] x [0,T]: (" + std::to_string(x) + ", " +
                          std::to_string(t) + ")");
    }
}

}  // namespace

double eval_solution(const SeriesSolution& s, double x, double t) {
    require_rectangle(s, x, t);
    double acc = 0.0;
    for (const auto& term : s.terms) acc += term.u(t) * eval_basis(term.mode, x);
    return acc;
}

double uxx_series(const SeriesSolution& s, double x, double t) {
    require_rectangle(s, x, t);
    double acc = 0.0;
    for (const auto& term : s.terms) acc += term.uxx(t) * eval_basis(term.mode, x);
    return acc;
}

SeriesColumns::SeriesColumns(const SeriesSolution& s, std::vector<double> xs) : s_(&s), xs_(std::move(xs)) {
    for (double x : xs_) require_rectangle(s, x, 0.0);
    basis_.reserve(s.terms.size());
    for (const auto& term : s.terms) {
        std::vector<double> row(xs_.size());
        for (std::size_t i = 0; i < xs_.size(); ++i) row[i] = eval_basis(term.mode, xs_[i]);
        basis_.push_back(std::move(row));
    }
}

std::vector<double> SeriesColumns::values(double t) const {
    require_rectangle(*s_, 0.0, t);
    std::vector<double> out(xs_.size(), 0.0);
    for (std::size_t m = 0; m < basis_.size(); ++m) {
        const double c = s_->terms[m].u(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * basis_[m][i];
    }
    return out;
}

std::vector<double> SeriesColumns::uxx(double t) const {
    require_rectangle(*s_, 0.0, t);
    std::vector<double> out(xs_.size(), 0.0);
    for (std::size_t m = 0; m < basis_.size(); ++m) {
        const double c = s_->terms[m].uxx(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * basis_[m][i];
    }
    return out;
}

}  // namespace cfheat
