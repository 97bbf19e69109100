// Acceptance run: one PASS/FAIL line per criterion, details indented below.
//
//   acceptance [--xfail N]...
//
// Exit status is 0 iff every criterion passes, except that a criterion listed with
// --xfail must fail (a listed criterion that passes is an error too).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/dsl_corpus.hpp"
#include "cfheat/bvp_solver.hpp"
#include "cfheat/cf_operators.hpp"
#include "cfheat/errors.hpp"
#include "cfheat/forcing_dsl.hpp"
#include "cfheat/ivp_solver.hpp"
#include "cfheat/spectral_bases.hpp"
#include "cfheat/verification.hpp"
#include "cli.hpp"

using namespace cfheat;

namespace {

constexpr double pi = std::numbers::pi;

struct Criterion {
    int id;
    std::string title;
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { notes.push_back("info " + what); }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

template <typename... Args>
std::string cat(const Args&... args) {
    std::ostringstream s;
    (s << ... << args);
    return s.str();
}

struct Forcing {
    const char* name;
    ScalarFn f;
    ScalarFn df;
};

const std::vector<Forcing> ivp_forcings = {
    {"t", [](double t) { return t; }, [](double) { return 1.0; }},
    {"t^2", [](double t) { return t * t; }, [](double t) { return 2 * t; }},
    {"sin t", [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }},
    {"t e^-t", [](double t) { return t * std::exp(-t); }, [](double t) { return (1 - t) * std::exp(-t); }},
};

BVProblem bvp(int problem, const std::string& g, int n_modes = 8) {
    return BVProblem{problem_from_number(problem), 0.5, dsl::to_forcing(dsl::parse(g)), 1.0, n_modes};
}

// ---- 1 -------------------------------------------------------------------------------

void ivp_oracle(Criterion& c) {
    for (double alpha : {0.25, 0.5, 0.75}) {
        std::vector<double> lambdas = {-5, -1, 0, 0.5, 1, 1 / (1 - alpha)};
        for (double lambda : lambdas) {
            const CFParams params(alpha, lambda);
            const bool resonant = classify_regime(params) == Regime::Resonant;
            double worst = 0.0;
            int cases = 0;
            for (const auto& f : ivp_forcings) {
                if (resonant && f.df(0.0) != 0.0) continue;
                const IVProblem p{params, TimeSignal(f.f, 1.0, f.df), 0.0};
                const TimeFunction u = solve_ivp(p);
                const SampledFunction v = volterra_oracle(p, 2048);
                for (std::size_t i = 0; i < v.knots.size(); ++i) {
                    worst = std::max(worst, std::abs(u(v.knots[i]) - v.values[i]));
                }
                ++cases;
            }
            c.require(worst < 1e-6, cat("alpha=", alpha, " lambda=", lambda, resonant ? " (resonant)" : "", " forcings=",
                                        cases, " sup|u - oracle|=", sci(worst)));
        }
    }
}

// ---- 2 -------------------------------------------------------------------------------

void resolvent(Criterion& c) {
    double worst = 0.0;
    int points = 0;
    for (double alpha : {0.25, 0.5, 0.75}) {
        for (double lambda : {-5.0, -1.0, 0.0, 0.5, 1.0}) {
            const CFParams params(alpha, lambda);
            for (double xi : {0.0, 0.5}) {
                for (int k = 0; k <= 20; ++k) {
                    const double t = xi + k / 20.0;
                    double sum = 0.0;
                    for (int i = 1; i <= 30; ++i) sum += iterated_kernel(i, t, xi, params);
                    worst = std::max(worst, std::abs(resolvent_kernel(t, xi, params) - sum));
                    ++points;
                }
            }
        }
    }
    c.require(worst < 1e-10, cat(points, " points, max |R - sum K_i| = ", sci(worst)));
    c.info("resonant lambda excluded: the kernels are undefined there");
}

// ---- 3 -------------------------------------------------------------------------------

void cf_calculus(Criterion& c) {
    const TimeSignal linear([](double t) { return t; }, 1.0, [](double) { return 1.0; });
    const double d = cf_derivative(linear, CFParams(0.5), 1.0);
    c.require(std::abs(d - 2 * (1 - std::exp(-1.0))) < 1e-8,
              cat("D^0.5 t at t=1: |error| = ", sci(std::abs(d - 2 * (1 - std::exp(-1.0))))));

    bool exact_zero = true;
    for (double alpha : {0.25, 0.5, 0.75}) {
        for (double value : {0.0, 1.0, -3.5}) {
            for (double t : {0.0, 0.3, 1.0}) {
                exact_zero = exact_zero && cf_derivative(TimeSignal::constant(value, 1.0), CFParams(alpha), t) == 0.0;
            }
        }
    }
    c.require(exact_zero, "D^a of constants is exactly 0");

    // I^a D^a f = f - f(0) over the t-only corpus expressions regular at 0
    double worst = 0.0;
    int count = 0;
    for (auto src : testing::kDslCorpus) {
        const dsl::Expr e = dsl::parse(src);
        if (e.depends_on_x()) continue;
        const dsl::Expr de = dsl::differentiate_t(e);
        try {
            if (!std::isfinite(dsl::eval(e, std::nullopt, 0.0)) || !std::isfinite(dsl::eval(de, std::nullopt, 0.0))) continue;
        } catch (const MathDomain&) {
            continue;
        }
        const TimeSignal f = dsl::to_time_signal(e, 1.0);
        ++count;
        for (double alpha : {0.25, 0.75}) {
            const CFParams params(alpha);
            const TimeSignal df([&](double s) { return cf_derivative(f, params, s); }, 1.0);
            const double t = 1.0;
            worst = std::max(worst, std::abs(cf_integral(df, alpha, t) - (f(t) - f(0.0))));
        }
    }
    c.require(worst < 1e-7, cat(count, " corpus expressions, max |I D f - (f - f(0))| = ", sci(worst)));
}

// ---- 4 -------------------------------------------------------------------------------

void biorthogonality(Criterion& c) {
    const double off = max_off_identity(biorthogonality_matrix(16));
    c.require(off < 1e-10, cat("k_max=16 (33x33): max |M - I| = ", sci(off)));
}

// ---- 5 -------------------------------------------------------------------------------

void pde_residuals(Criterion& c) {
    QuadratureOptions fine;
    fine.panels_per_unit *= 2;
    fine.fd_step_scale /= 2;
    BvpOptions fine_opts;
    fine_opts.quad = fine;
    constexpr double floor = 1e-8;  // below this the residual is rounding noise

    auto run = [&](int problem, const std::string& g, bool counts) {
        const BVProblem p = bvp(problem, g);
        const double coarse = pde_residual(solve_bvp(p), p.g, {33, 33, 1.0}).max_abs;
        const double refined = pde_residual(solve_bvp(p, fine_opts), p.g, {65, 65, 1.0}, fine).max_abs;
        const bool small = coarse < 1e-4;
        const bool decreasing = refined * 2 <= coarse || (coarse < floor && refined < floor);
        const std::string line = cat("P", problem, " g=", g, ": 33x33 ", sci(coarse), ", 65x65 ", sci(refined),
                                     decreasing ? "" : " (no 2x decrease)");
        if (counts) {
            c.require(small && decreasing, line);
        } else {
            c.info("supplementary " + line);
        }
    };
    run(1, "t*sin(pi*x)", true);
    run(2, "t*cos(pi*x)", true);
    run(3, "t*sin(2*pi*x)", true);
    run(4, "t*sin(2*pi*x)", true);
    c.info("sin(2 pi x) is not a root function of the non-local problem; with 8 modes its expansion");
    c.info("leaves a truncation defect that no grid or quadrature refinement removes");
    run(4, "t*x*sin(2*pi*x)", false);
}

// ---- 6 -------------------------------------------------------------------------------

void initial_and_boundary(Criterion& c) {
    const std::string smooth = "t*x*(1-x)*exp(x)";
    auto forward = [](const SeriesSolution& s, double t, double h) {
        return (-3 * eval_solution(s, 0.0, t) + 4 * eval_solution(s, h, t) - eval_solution(s, 2 * h, t)) / (2 * h);
    };
    auto backward = [](const SeriesSolution& s, double t, double h) {
        return (3 * eval_solution(s, 1.0, t) - 4 * eval_solution(s, 1.0 - h, t) + eval_solution(s, 1.0 - 2 * h, t)) /
               (2 * h);
    };
    auto second_order = [&](Criterion& c, const std::string& what, const std::function<double(double)>& defect) {
        double worst_ratio = 1e300, worst_fine = 0.0;
        for (double h : {1e-2, 5e-3}) {
            const double coarse = defect(h), fine = defect(h / 2);
            worst_fine = std::max(worst_fine, fine);
            if (fine >= 1e-9) worst_ratio = std::min(worst_ratio, coarse / fine);
        }
        const bool ok = worst_fine < 1e-9 || worst_ratio > 3.0;
        c.require(ok, cat(what, ": defect at finest h ", sci(worst_fine),
                          worst_ratio < 1e300 ? ", halving ratio " + sci(worst_ratio) : std::string()));
    };
    const GridSpec grid{33, 33, 1.0};
    for (int problem = 1; problem <= 4; ++problem) {
        const SeriesSolution s = solve_bvp(bvp(problem, problem == 2 ? "t*x" : smooth, 16));
        double initial = 0.0, value = 0.0;
        for (double x : grid.x_nodes()) initial = std::max(initial, std::abs(eval_solution(s, x, 0.0)));
        c.require(initial < 1e-12, cat("P", problem, " sup |u(x,0)| = ", sci(initial)));
        for (double t : grid.t_nodes()) {
            switch (problem) {
                case 1:
                    value = std::max({value, std::abs(eval_solution(s, 0.0, t)), std::abs(eval_solution(s, 1.0, t))});
                    break;
                case 3:
                case 4: value = std::max(value, std::abs(eval_solution(s, 0.0, t) - eval_solution(s, 1.0, t))); break;
            }
        }
        if (problem != 2) {
            c.require(value < 1e-10, cat("P", problem, problem == 1 ? " sup |u(0,t)|,|u(1,t)| = " : " sup |u(0,t)-u(1,t)| = ",
                                         sci(value)));
        }
        for (double t : {0.25, 1.0}) {
            const std::string at = cat("P", problem, " t=", t);
            switch (problem) {
                case 2:
                    second_order(c, at + " u_x(0,t)", [&](double h) { return std::abs(forward(s, t, h)); });
                    second_order(c, at + " u_x(1,t)", [&](double h) { return std::abs(backward(s, t, h)); });
                    break;
                case 3:
                    second_order(c, at + " u_x(0,t)-u_x(1,t)",
                                 [&](double h) { return std::abs(forward(s, t, h) - backward(s, t, h)); });
                    break;
                case 4: second_order(c, at + " u_x(0,t)", [&](double h) { return std::abs(forward(s, t, h)); }); break;
                default: break;
            }
        }
    }
}

// ---- 7 -------------------------------------------------------------------------------

void coupled_modes(Criterion& c) {
    std::vector<double> ts;
    for (int i = 0; i <= 20; ++i) ts.push_back(i / 20.0);
    for (int k : {1, 2}) {
        const SeriesSolution s = solve_bvp(bvp(4, cat("t*x*sin(", 2 * k, "*pi*x)")));
        const ModalTerm& cos_term = s.term({BasisFamily::RootSystemX, ModeSlot::Cos, k});
        const ModalTerm& xsin_term = s.term({BasisFamily::RootSystemX, ModeSlot::AssocXSin, k});
        double g1 = 0.0;
        for (double v : cos_term.forcing.values()) g1 = std::max(g1, std::abs(v));
        const double mu = 4 * pi * pi * k * k;
        const TimeFunction& u1 = cos_term.u;
        const TimeFunction& u2 = xsin_term.u;
        // cosine coefficient: D u1 + mu u1 = g_1k + 4 pi k u2 with g_1k = 0
        const TimeSignal driven([&](double t) { return 4 * pi * k * u2(t); }, 1.0);
        const double r1 = modal_residual(u1, driven, mu, 0.5, ts).max_abs;
        const double r2 = modal_residual(u2, xsin_term.forcing.signal(), mu, 0.5, ts).max_abs;
        c.require(g1 < 1e-12, cat("k=", k, " forcing excites only g_2k: sup |g_1k| = ", sci(g1)));
        c.require(std::abs(u1(1.0)) > 1e-4, cat("k=", k, " coupling is active: u_1k(1) = ", sci(u1(1.0))));
        c.require(r1 < 1e-6, cat("k=", k, " u_1k residual with coupled right side = ", sci(r1)));
        c.require(r2 < 1e-6, cat("k=", k, " u_2k residual = ", sci(r2)));
    }
}

// ---- 8 -------------------------------------------------------------------------------

void negative_controls(Criterion& c) {
    std::vector<double> ts;
    for (int i = 0; i <= 20; ++i) ts.push_back(i / 20.0);
    const TimeSignal ramp([](double t) { return t; }, 1.0, [](double) { return 1.0; });

    const TimeFunction u = solve_modal_selfadjoint(ramp, pi * pi, 0.5);
    const double good = modal_residual(u, ramp, pi * pi, 0.5, ts).max_abs;
    const double doubled = modal_residual(solve_modal_selfadjoint(ramp, 2 * pi * pi, 0.5), ramp, pi * pi, 0.5, ts).max_abs;
    c.require(doubled - good >= 1e-2, cat("modal, mu doubled: ", sci(doubled), " vs passing ", sci(good)));
    const TimeFunction bumped(u.branch(), u.params(), 1.0, [u](double t) { return u(t) + 1e-3 * t; });
    const double bump = modal_residual(bumped, ramp, pi * pi, 0.5, ts).max_abs;
    c.require(bump - good >= 1e-4, cat("modal, +1e-3 t: ", sci(bump), " (gap >= 1e-4)"));

    const BVProblem p = bvp(1, "t*sin(pi*x)");
    const SeriesSolution s = solve_bvp(p);
    const GridSpec grid{33, 33, 1.0};
    const double pass = pde_residual(s, p.g, grid).max_abs;
    SeriesSolution scaled = s;
    ModalTerm& first = scaled.terms.front();
    const TimeFunction original = first.u;
    first.u = TimeFunction(original.branch(), original.params(), 1.0, [original](double t) { return 1.5 * original(t); });
    const double wrong = pde_residual(scaled, p.g, grid).max_abs;
    c.require(wrong - pass >= 1e-2, cat("series, first mode scaled by 1.5: ", sci(wrong), " vs passing ", sci(pass)));

    SampledGrid stored{grid, {}};
    for (double x : grid.x_nodes()) {
        std::vector<double> column;
        for (double t : grid.t_nodes()) column.push_back(eval_solution(s, x, t));
        stored.u.push_back(column);
    }
    const double stored_pass = sampled_residual(stored, p.problem, p.alpha, p.g).max_abs;
    const auto xs = grid.x_nodes();
    const auto tn = grid.t_nodes();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < tn.size(); ++j) stored.u[i][j] += 0.01 * tn[j] * std::sin(pi * xs[i]);
    }
    const double stored_wrong = sampled_residual(stored, p.problem, p.alpha, p.g).max_abs;
    c.require(stored_wrong - stored_pass >= 1e-2,
              cat("stored grid + 0.01 t sin(pi x): ", sci(stored_wrong), " vs passing ", sci(stored_pass)));
}

// ---- 9 -------------------------------------------------------------------------------

void dsl_corpus(Criterion& c) {
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    int round_trip_failures = 0, determinism_failures = 0;
    double worst = 0.0;
    for (auto src : testing::kDslCorpus) {
        const dsl::Expr a = dsl::parse(src);
        const dsl::Expr b = dsl::parse(src);
        const std::string printed = dsl::to_string(a);
        if (!(a == b) || !(dsl::parse(printed) == a) || dsl::to_string(dsl::parse(printed)) != printed) {
            ++round_trip_failures;
        }
        const double va = dsl::eval(a, 0.3125, 0.6875), vb = dsl::eval(b, 0.3125, 0.6875);
        if (std::memcmp(&va, &vb, sizeof va) != 0) ++determinism_failures;

        const dsl::Expr d = dsl::differentiate_t(a);
        for (int i = 0; i < 20; ++i) {
            const double x = unit(rng), t = unit(rng), h = 1e-3;
            auto f = [&](double s) { return dsl::eval(a, x, s); };
            const double fd = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
            worst = std::max(worst, std::abs(dsl::eval(d, x, t) - fd));
        }
    }
    c.require(round_trip_failures == 0, cat(testing::kDslCorpus.size(), " expressions, round-trip failures: ",
                                            round_trip_failures));
    c.require(determinism_failures == 0, cat("bit-identical re-evaluation failures: ", determinism_failures));
    c.require(worst < 1e-6, cat("max |d/dt symbolic - finite difference| = ", sci(worst)));
}

// ---- 10 ------------------------------------------------------------------------------

void cli_contract(Criterion& c) {
    struct Run {
        int code;
        std::string out, err;
    };
    auto invoke = [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return Run{code, out.str(), err.str()};
    };
    const std::vector<std::vector<std::string>> runs = {
        {"ivp", "--alpha", "0.5", "--lambda", "0", "--f", "t", "--t-max", "1", "--t-steps", "4"},
        {"ivp", "--alpha", "0.75", "--lambda", "1", "--f", "t*exp(-t)", "--oracle", "--format", "json"},
        {"bvp", "--problem", "1", "--alpha", "0.5", "--g", "t*sin(pi*x)", "--residual"},
        {"bvp", "--problem", "4", "--alpha", "0.5", "--g", "t*x*sin(2*pi*x)", "--format", "json", "--check-hypotheses"},
        {"verify", "--problem", "3", "--alpha", "0.5", "--g", "t*sin(2*pi*x)", "--modes", "8"},
        {"bases", "--family", "rootsystem", "--k-max", "4", "--format", "json"},
    };
    for (const auto& args : runs) {
        const Run a = invoke(args), b = invoke(args);
        std::string line;
        for (const auto& arg : args) line += (line.empty() ? "" : " ") + arg;
        c.require(a.code == 0 && b.code == 0 && a.out == b.out && !a.out.empty(),
                  cat(line, ": byte-identical, ", a.out.size(), " bytes"));
    }
    const Run f1 = invoke({"ivp", "--alpha", "0.5", "--lambda", "0", "--f", "1"});
    c.require(f1.code == 2 && f1.err.find("f(0)=0") != std::string::npos,
              cat("ivp --f \"1\": exit ", f1.code, ", names f(0)=0"));
    const Run hyp = invoke({"bvp", "--problem", "1", "--alpha", "0.5", "--g", "t*x", "--check-hypotheses"});
    c.require(hyp.code == 2 && hyp.err.find("g(0,t)=g(1,t)=0") != std::string::npos,
              cat("bvp --problem 1 --g \"t*x\" --check-hypotheses: exit ", hyp.code));
    const Run parse = invoke({"bvp", "--problem", "1", "--alpha", "0.5", "--g", "t*sin(pi*x"});
    c.require(parse.code == 1, cat("unparsable --g: exit ", parse.code));
    const Run config = invoke({"ivp", "--alpha", "2", "--lambda", "0", "--f", "t", "--format", "xml"});
    c.require(config.code == 1, cat("invalid --alpha and --format: exit ", config.code));
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> xfail;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--xfail") == 0 && i + 1 < argc) {
            xfail.insert(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--xfail N]...\n", argv[0]);
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> suite = {
        {"IVP closed form agrees with the Volterra oracle", ivp_oracle},
        {"resolvent equals the summed iterated kernels", resolvent},
        {"CF operator calculus", cf_calculus},
        {"root and adjoint systems are bi-orthogonal", biorthogonality},
        {"PDE residuals of single-mode forcings", pde_residuals},
        {"initial and boundary conditions", initial_and_boundary},
        {"coupled non-local modes", coupled_modes},
        {"negative controls", negative_controls},
        {"expression language corpus", dsl_corpus},
        {"CLI determinism and exit codes", cli_contract},
    };

    int unexpected = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        Criterion c{static_cast<int>(i + 1), suite[i].first};
        try {
            suite[i].second(c);
        } catch (const std::exception& e) {
            c.require(false, cat("exception: ", e.what()));
        }
        const bool expected_fail = xfail.count(c.id) > 0;
        std::printf("%s %2d %s%s\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    expected_fail ? (c.pass ? "  (listed as expected failure)" : "  (expected failure)") : "");
        for (const auto& n : c.notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
        if (c.pass == expected_fail) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
