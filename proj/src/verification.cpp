#include "cfheat/verification.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "cfheat/errors.hpp"

namespace cfheat {

namespace {

std::vector<double> uniform_nodes(int count, double hi) {
    if (count < 2) throw DomainError("a grid needs at least two nodes per axis");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[i] = (i == count - 1) ? hi : hi * static_cast<double>(i) / (count - 1);
    return out;
}

// fills out[j] = f(j) for j in [0, n), split across threads by contiguous blocks
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t threads = std::min<std::size_t>(hw, n);
    if (threads <= 1) {
        for (std::size_t j = 0; j < n; ++j) f(j);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::jthread> pool;
    for (std::size_t first = 0; first < n; first += chunk) {
        pool.emplace_back([&f, first, last = std::min(n, first + chunk)] {
            for (std::size_t j = first; j < last; ++j) f(j);
        });
    }
}

void summarize(ResidualReport& r) {
    double sum = 0.0;
    std::size_t count = 0;
    r.max_abs = 0.0;
    for (const auto& row : r.grid) {
        for (double v : row) {
            r.max_abs = std::max(r.max_abs, std::abs(v));
            sum += v * v;
            ++count;
        }
    }
    r.l2 = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

}  // namespace

std::vector<double> GridSpec::x_nodes() const {
    return uniform_nodes(x_count, 1.0);
}

std::vector<double> GridSpec::t_nodes() const {
    if (!(T > 0.0)) throw DomainError("grid horizon must be positive");
    return uniform_nodes(t_count, T);
}

ResidualReport pde_residual(const SeriesSolution& s, const SpaceTimeForcing& g, const GridSpec& grid,
                            const QuadratureOptions& quad) {
    if (grid.T > s.T) throw DomainError("residual grid extends past the solution horizon");
    const auto xs = grid.x_nodes();
    const auto ts = grid.t_nodes();
    const SeriesColumns columns(s, xs);
    const CFParams params(s.alpha);
    auto values = [&columns](double t) { return columns.values(t); };

    ResidualReport r;
    r.grid_spec = grid;
    r.grid.assign(xs.size(), std::vector<double>(ts.size()));
    parallel_for(ts.size(), [&](std::size_t j) {
        const double t = ts[j];
        const auto d = cf_derivative_columns(values, xs.size(), params, t, s.T, quad);
        const auto uxx = columns.uxx(t);
        for (std::size_t i = 0; i < xs.size(); ++i) r.grid[i][j] = d[i] - uxx[i] - g(xs[i], t);
    });
    summarize(r);
    return r;
}

ResidualReport modal_residual(const TimeFunction& u, const TimeSignal& gk, double mu, double alpha,
                              std::span<const double> t_grid, const QuadratureOptions& quad) {
    const CFParams params(alpha);
    const TimeSignal us = u.signal();
    ResidualReport r;
    r.grid_spec = {1, static_cast<int>(t_grid.size()), u.horizon()};
    r.grid.assign(1, std::vector<double>(t_grid.size()));
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const double t = t_grid[j];
        r.grid[0][j] = cf_derivative(us, params, t, quad) + mu * u(t) - gk(t);
    }
    summarize(r);
    return r;
}

ResidualReport sampled_residual(const SampledGrid& data, ProblemKind problem, double alpha,
                                const SpaceTimeForcing& g) {
    const auto xs = data.spec.x_nodes();
    const auto ts = data.spec.t_nodes();
    const std::size_t nx = xs.size(), nt = ts.size();
    if (nx < 7) throw DomainError("sampled residual needs at least 7 x nodes");
    if (data.u.size() != nx) throw DomainError("grid values do not match the grid spec");
    for (const auto& col : data.u) {
        if (col.size() != nt) throw DomainError("grid values do not match the grid spec");
    }
    const CFParams params(alpha);
    params.require_nonsingular();
    const double c = params.kernel_rate();
    const double h = 1.0 / static_cast<double>(nx - 1);
    const auto& u = data.u;

    // fourth-order one-sided first derivatives at the two ends
    auto dx_left = [&](std::size_t j) {
        return (-25 * u[0][j] + 48 * u[1][j] - 36 * u[2][j] + 16 * u[3][j] - 3 * u[4][j]) / (12 * h);
    };
    auto dx_right = [&](std::size_t j) {
        const std::size_t n = nx - 1;
        return (25 * u[n][j] - 48 * u[n - 1][j] + 36 * u[n - 2][j] - 16 * u[n - 3][j] + 3 * u[n - 4][j]) / (12 * h);
    };
    auto uxx = [&](std::size_t i, std::size_t j) {
        const double s = 12 * h * h;
        if (i == 1) return (10 * u[0][j] - 15 * u[1][j] - 4 * u[2][j] + 14 * u[3][j] - 6 * u[4][j] + u[5][j]) / s;
        if (i == nx - 2) {
            const std::size_t n = nx - 1;
            return (10 * u[n][j] - 15 * u[n - 1][j] - 4 * u[n - 2][j] + 14 * u[n - 3][j] - 6 * u[n - 4][j] + u[n - 5][j]) / s;
        }
        return (-u[i - 2][j] + 16 * u[i - 1][j] - 30 * u[i][j] + 16 * u[i + 1][j] - u[i + 2][j]) / s;
    };
    // exact CF derivative of the linear interpolant through u[i][0..j]
    auto cf = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < j; ++m) {
            const double slope = (u[i][m + 1] - u[i][m]) / (ts[m + 1] - ts[m]);
            acc += slope * (std::exp(-c * (ts[j] - ts[m + 1])) - std::exp(-c * (ts[j] - ts[m]))) / c;
        }
        return acc / (1.0 - alpha);
    };

    ResidualReport r;
    r.grid_spec = data.spec;
    r.grid.assign(nx, std::vector<double>(nt));
    for (std::size_t i = 0; i < nx; ++i) r.grid[i][0] = u[i][0];
    for (std::size_t j = 1; j < nt; ++j) {
        double left = 0.0, right = 0.0;
        switch (problem) {
            case ProblemKind::P1_Dirichlet:
                left = u[0][j];
                right = u[nx - 1][j];
                break;
            case ProblemKind::P2_Neumann:
                left = dx_left(j);
                right = dx_right(j);
                break;
            case ProblemKind::P3_Periodic:
                left = u[0][j] - u[nx - 1][j];
                right = dx_left(j) - dx_right(j);
                break;
            case ProblemKind::P4_NonLocal:
                left = u[0][j] - u[nx - 1][j];
                right = dx_left(j);
                break;
        }
        r.grid[0][j] = left;
        r.grid[nx - 1][j] = right;
        for (std::size_t i = 1; i + 1 < nx; ++i) r.grid[i][j] = cf(i, j) - uxx(i, j) - g(xs[i], ts[j]);
    }
    summarize(r);
    return r;
}

// ---- hypotheses -----------------------------------------------------------------

bool HypothesisReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass; });
}

std::vector<std::string> HypothesisReport::failed() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.pass) out.push_back(c.name);
    }
    return out;
}

HypothesisReport check_hypotheses(const BVProblem& p) {
    p.validate();
    const auto xs = uniform_nodes(hypothesis_samples, 1.0);
    const auto ts = uniform_nodes(hypothesis_samples, p.T);
    const auto& g = p.g;
    const std::string owner = std::string(to_string(p.problem)) + " problem";

    HypothesisReport report;
    auto pointwise = [&](std::string name, double measured) {
        report.checks.push_back({std::move(name), owner, measured, measured < compat_tol, false});
    };
    auto sup = [](const std::vector<double>& nodes, auto&& f) {
        double worst = 0.0;
        for (double v : nodes) {
            const double d = std::abs(f(v));
            if (!std::isfinite(d)) return d;
            worst = std::max(worst, d);
        }
        return worst;
    };

    pointwise("g(x,0)=0", sup(xs, [&](double x) { return g(x, 0.0); }));
    switch (p.problem) {
        case ProblemKind::P1_Dirichlet:
            pointwise("g(0,t)=g(1,t)=0",
                      sup(ts, [&](double t) { return std::max(std::abs(g(0.0, t)), std::abs(g(1.0, t))); }));
            break;
        case ProblemKind::P2_Neumann: break;
        case ProblemKind::P3_Periodic:
        case ProblemKind::P4_NonLocal:
            pointwise("g(0,t)=g(1,t)", sup(ts, [&](double t) { return g(0.0, t) - g(1.0, t); }));
            break;
    }

    // integrability: sampled norms, reported only
    const double fd = QuadratureOptions{}.fd_step(p.T);
    auto g_t = [&](double x, double t) {
        if (g.has_time_derivative()) return g.time_derivative(x, t);
        return numeric_derivative([&](double s) { return g(x, s); }, t, fd, p.T);
    };
    auto g_x = [&](double x, double t) {
        return numeric_derivative([&](double y) { return g(y, t); }, x, QuadratureOptions{}.fd_step(1.0), 1.0);
    };
    auto trapezoid = [](const std::vector<double>& nodes, const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) acc += 0.5 * (nodes[i + 1] - nodes[i]) * (v[i] + v[i + 1]);
        return acc;
    };
    double l1 = 0.0;
    for (double x : xs) {
        std::vector<double> v;
        for (double t : ts) v.push_back(std::abs(g_t(x, t)));
        l1 = std::max(l1, trapezoid(ts, v));
    }
    double l2 = 0.0;
    for (double t : ts) {
        std::vector<double> v;
        for (double x : xs) v.push_back(g_x(x, t) * g_x(x, t));
        l2 = std::max(l2, std::sqrt(trapezoid(xs, v)));
    }
    report.checks.push_back({"g_t in L1[0,T]", owner, l1, true, true});
    report.checks.push_back({"g_x in L2[0,1]", owner, l2, true, true});
    return report;
}

}  // namespace cfheat
