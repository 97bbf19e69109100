#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <type_traits>

#include "CLI11.hpp"
#include "cfheat/bvp_solver.hpp"
#include "cfheat/errors.hpp"
#include "cfheat/forcing_dsl.hpp"
#include "cfheat/ivp_solver.hpp"
#include "cfheat/spectral_bases.hpp"
#include "cfheat/verification.hpp"
#include "json.hpp"

namespace cfheat::cli {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

/// Bad flags, config files or input files: exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Several configuration problems reported together.
struct ConfigErrors : std::runtime_error {
    explicit ConfigErrors(std::vector<std::string> items) : std::runtime_error("invalid configuration"), items(std::move(items)) {}
    std::vector<std::string> items;
};

const dsl::EvalOptions strict{true};

// ---- flag registry with JSON config fallback ---------------------------------------

template <typename T>
void assign_from_json(const Json& j, T& target) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) throw std::invalid_argument("expected true or false");
        target = j.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) throw std::invalid_argument("expected an integer");
        target = j.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!j.is_number()) throw std::invalid_argument("expected a number");
        target = j.get<T>();
    } else {
        if (!j.is_string()) throw std::invalid_argument("expected a string");
        target = j.get<std::string>();
    }
}

class Flags {
public:
    explicit Flags(CLI::App& app) : app_(app) {
        app_.add_option("--config", config_path_, "JSON object with the same keys as the long flags");
    }

    template <typename T>
    void option(const std::string& name, T& target, const std::string& help, bool required = false) {
        auto* opt = app_.add_option("--" + name, target, help);
        if (!required) opt->capture_default_str();
        add(name, opt, target, required);
    }

    void flag(const std::string& name, bool& target, const std::string& help) {
        add(name, app_.add_flag("--" + name, target, help), target, false);
    }

    bool given(const std::string& name) const {
        const auto& e = find(name);
        return e.opt->count() > 0 || e.from_config;
    }

    /// Applies the config file to options not given on the command line, then checks
    /// required options. Problems accumulate in `errors`.
    void resolve(std::vector<std::string>& errors) {
        if (!config_path_.empty()) {
            try {
                merge(read_json(config_path_, "config file"), errors);
            } catch (const UsageError& e) {
                errors.push_back(e.what());
            }
        }
        for (const auto& e : entries_) {
            if (e.required && e.opt->count() == 0 && !e.from_config) errors.push_back("--" + e.name + " is required");
        }
    }

    static Json read_json(const std::string& path, const std::string& what) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw UsageError("cannot open " + what + " '" + path + "'");
        try {
            return Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw UsageError(what + " '" + path + "' is not valid JSON: " + e.what());
        }
    }

private:
    struct Entry {
        std::string name;
        CLI::Option* opt;
        std::function<void(const Json&)> assign;
        bool required;
        bool from_config = false;
    };

    template <typename T>
    void add(const std::string& name, CLI::Option* opt, T& target, bool required) {
        entries_.push_back({name, opt, [&target](const Json& j) { assign_from_json(j, target); }, required});
    }

    const Entry& find(const std::string& name) const {
        for (const auto& e : entries_) {
            if (e.name == name) return e;
        }
        throw std::logic_error("unknown flag " + name);
    }

    void merge(const Json& cfg, std::vector<std::string>& errors) {
        if (!cfg.is_object()) {
            errors.push_back("config file must hold a JSON object");
            return;
        }
        for (const auto& [key, value] : cfg.items()) {
            auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == key; });
            if (it == entries_.end()) {
                errors.push_back("config: unknown key '" + key + "'");
                continue;
            }
            if (it->opt->count() > 0) continue;  // the flag wins
            try {
                it->assign(value);
                it->from_config = true;
            } catch (const std::exception& e) {
                errors.push_back("config: '" + key + "': " + e.what());
            }
        }
    }

    CLI::App& app_;
    std::string config_path_;
    std::vector<Entry> entries_;
};

// ---- shared validation ---------------------------------------------------------------

std::optional<dsl::Expr> parse_expr(const std::string& name, const std::string& src, std::vector<std::string>& errors) {
    try {
        return dsl::parse(src);
    } catch (const Error& e) {
        errors.push_back("--" + name + " \"" + src + "\": " + e.what());
        return std::nullopt;
    }
}

void check(bool ok, const std::string& message, std::vector<std::string>& errors) {
    if (!ok) errors.push_back(message);
}

void check_format(const std::string& format, std::vector<std::string>& errors) {
    check(format == "csv" || format == "json", "--format must be csv or json", errors);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw UsageError("cannot open output file '" + path + "'");
    file << text;
    if (!file) throw UsageError("failed writing output file '" + path + "'");
}

std::string csv_row(std::initializer_list<double> values) {
    std::string line;
    for (double v : values) {
        if (!line.empty()) line += ',';
        line += format_double(v);
    }
    return line + '\n';
}

std::string dump(const Json& doc) {
    return doc.dump(2) + "\n";
}

Json residual_json(const ResidualReport& r) {
    return Json{{"grid_spec", {{"x_count", r.grid_spec.x_count}, {"t_count", r.grid_spec.t_count}, {"T", r.grid_spec.T}}},
                {"max_abs", r.max_abs},
                {"l2", r.l2},
                {"values", r.grid}};
}

Json hypotheses_json(const HypothesisReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name},
                          {"required_by", c.required_by},
                          {"measured", c.measured},
                          {"pass", c.pass},
                          {"informational", c.informational}});
    }
    return Json{{"all_pass", r.all_pass()}, {"checks", checks}};
}

// ---- ivp -------------------------------------------------------------------------------

struct IvpConfig {
    double alpha = 0.0;
    double lambda = 0.0;
    std::string f;
    double u0 = 0.0;
    double t_max = 1.0;
    int t_steps = 100;
    std::string out;
    std::string format = "csv";
    bool oracle = false;
    int oracle_steps = 2048;
};

void register_ivp(Flags& flags, IvpConfig& c) {
    flags.option("alpha", c.alpha, "fractional order in (0,1]", true);
    flags.option("lambda", c.lambda, "coefficient in D^a u = lambda u + f", true);
    flags.option("f", c.f, "forcing f(t)", true);
    flags.option("u0", c.u0, "initial value");
    flags.option("t-max", c.t_max, "horizon T");
    flags.option("t-steps", c.t_steps, "output intervals on [0,T]");
    flags.option("out", c.out, "output file (default stdout)");
    flags.option("format", c.format, "csv or json");
    flags.flag("oracle", c.oracle, "also solve by Volterra iteration and report the deviation");
    flags.option("oracle-steps", c.oracle_steps, "Volterra grid intervals");
}

int run_ivp(Flags& flags, const IvpConfig& c, std::ostream& out) {
    std::vector<std::string> errors;
    flags.resolve(errors);
    check(c.alpha > 0.0 && c.alpha <= 1.0, "--alpha must lie in (0,1]", errors);
    check(std::isfinite(c.lambda), "--lambda must be finite", errors);
    check(std::isfinite(c.u0), "--u0 must be finite", errors);
    check(std::isfinite(c.t_max) && c.t_max > 0.0, "--t-max must be positive", errors);
    check(c.t_steps >= 1, "--t-steps must be at least 1", errors);
    check(c.oracle_steps >= 2, "--oracle-steps must be at least 2", errors);
    check(!(c.oracle && c.u0 != 0.0), "--oracle requires --u0 0", errors);
    check(!(c.oracle && c.alpha == 1.0), "--oracle requires --alpha below 1", errors);
    check_format(c.format, errors);
    std::optional<dsl::Expr> f;
    if (flags.given("f")) {
        f = parse_expr("f", c.f, errors);
        if (f && f->depends_on_x()) errors.push_back("--f must not depend on x");
    }
    if (!errors.empty()) throw ConfigErrors(errors);

    const IVProblem problem{CFParams(c.alpha, c.lambda), dsl::to_time_signal(*f, c.t_max, strict), c.u0};
    const TimeFunction u = solve_ivp(problem);

    std::vector<std::pair<double, double>> rows;
    for (int i = 0; i <= c.t_steps; ++i) {
        const double t = i == c.t_steps ? c.t_max : c.t_max * i / c.t_steps;
        rows.emplace_back(t, u(t));
    }
    std::optional<double> oracle_dev;
    if (c.oracle) {
        const SampledFunction v = volterra_oracle(problem, c.oracle_steps);
        double dev = 0.0;
        for (std::size_t i = 0; i < v.knots.size(); ++i) dev = std::max(dev, std::abs(u(v.knots[i]) - v.values[i]));
        oracle_dev = dev;
    }

    std::string text;
    if (c.format == "csv") {
        text = "t,u\n";
        for (auto [t, v] : rows) text += csv_row({t, v});
        if (oracle_dev) text += "# oracle_max_dev=" + format_double(*oracle_dev) + "\n";
    } else {
        Json samples = Json::array();
        for (auto [t, v] : rows) samples.push_back({t, v});
        Json doc{{"schema", 1},
                 {"command", "ivp"},
                 {"config",
                  {{"alpha", c.alpha},
                   {"lambda", c.lambda},
                   {"f", c.f},
                   {"u0", c.u0},
                   {"t-max", c.t_max},
                   {"t-steps", c.t_steps}}},
                 {"params", {{"alpha", c.alpha}, {"lambda", c.lambda}, {"u0", c.u0}}},
                 {"branch", to_string(u.branch())},
                 {"samples", {{"columns", {"t", "u"}}, {"rows", samples}}}};
        if (oracle_dev) {
            doc["config"]["oracle-steps"] = c.oracle_steps;
            doc["oracle_max_dev"] = *oracle_dev;
        }
        text = dump(doc);
    }
    emit(text, c.out, out);
    return exit_ok;
}

// ---- bvp -------------------------------------------------------------------------------

struct BvpConfig {
    int problem = 1;
    double alpha = 0.5;
    std::string g;
    double t_max = 1.0;
    int modes = 32;
    int x_steps = 32;
    int t_steps = 32;
};

void register_problem(Flags& flags, BvpConfig& c, bool required) {
    flags.option("problem", c.problem, "1 Dirichlet, 2 Neumann, 3 periodic, 4 non-local", required);
    flags.option("alpha", c.alpha, "fractional order in (0,1)", required);
    flags.option("g", c.g, "forcing g(x,t)", required);
    flags.option("t-max", c.t_max, "horizon T");
    flags.option("modes", c.modes, "highest wavenumber index in the series");
    flags.option("x-steps", c.x_steps, "grid intervals in x");
    flags.option("t-steps", c.t_steps, "grid intervals in t");
}

void validate_problem(const BvpConfig& c, std::vector<std::string>& errors) {
    check(c.problem >= 1 && c.problem <= 4, "--problem must be 1, 2, 3 or 4", errors);
    check(c.alpha > 0.0 && c.alpha < 1.0, "--alpha must lie in (0,1)", errors);
    check(std::isfinite(c.t_max) && c.t_max > 0.0, "--t-max must be positive", errors);
    check(c.modes >= 1, "--modes must be at least 1", errors);
    check(c.x_steps >= 1, "--x-steps must be at least 1", errors);
    check(c.t_steps >= 1, "--t-steps must be at least 1", errors);
}

BVProblem make_problem(const BvpConfig& c, const dsl::Expr& g) {
    return BVProblem{problem_from_number(c.problem), c.alpha, dsl::to_forcing(g, strict), c.t_max, c.modes};
}

GridSpec grid_of(const BvpConfig& c) {
    return GridSpec{c.x_steps + 1, c.t_steps + 1, c.t_max};
}

SeriesSolution solve_unchecked(const BVProblem& p) {
    BvpOptions opts;
    opts.enforce_hypotheses = false;
    return solve_bvp(p, opts);
}

Json problem_json(const BvpConfig& c) {
    return Json{{"problem", c.problem}, {"alpha", c.alpha},     {"g", c.g},
                {"t-max", c.t_max},     {"modes", c.modes},     {"x-steps", c.x_steps},
                {"t-steps", c.t_steps}};
}

struct BvpRun {
    BvpConfig problem;
    std::string out;
    std::string format = "csv";
    bool check_hypotheses = false;
    bool residual = false;
};

void register_bvp(Flags& flags, BvpRun& c) {
    register_problem(flags, c.problem, true);
    flags.option("out", c.out, "output file (default stdout)");
    flags.option("format", c.format, "csv or json");
    flags.flag("check-hypotheses", c.check_hypotheses, "stop with exit 2 when a solvability hypothesis fails");
    flags.flag("residual", c.residual, "append the PDE residual report");
}

int run_bvp(Flags& flags, const BvpRun& c, std::ostream& out, std::ostream& err) {
    std::vector<std::string> errors;
    flags.resolve(errors);
    validate_problem(c.problem, errors);
    check_format(c.format, errors);
    std::optional<dsl::Expr> g;
    if (flags.given("g")) g = parse_expr("g", c.problem.g, errors);
    if (!errors.empty()) throw ConfigErrors(errors);

    const BVProblem p = make_problem(c.problem, *g);
    std::optional<HypothesisReport> hypotheses;
    if (c.check_hypotheses) {
        hypotheses = check_hypotheses(p);
        if (!hypotheses->all_pass()) {
            for (const auto& chk : hypotheses->checks) {
                if (!chk.pass) {
                    err << "error: hypothesis " << chk.name << " fails for the " << chk.required_by << " (measured "
                        << format_double(chk.measured) << ")\n";
                }
            }
            return exit_incompatible;
        }
    }

    const SeriesSolution s = solve_unchecked(p);
    const GridSpec spec = grid_of(c.problem);
    const auto xs = spec.x_nodes();
    const auto ts = spec.t_nodes();
    const SeriesColumns columns(s, xs);
    std::vector<std::vector<double>> u;  // [t][x]
    for (double t : ts) u.push_back(columns.values(t));
    std::optional<ResidualReport> residual;
    if (c.residual) residual = pde_residual(s, p.g, spec);

    std::string text;
    if (c.format == "csv") {
        text = "x,t,u\n";
        for (std::size_t j = 0; j < ts.size(); ++j) {
            for (std::size_t i = 0; i < xs.size(); ++i) text += csv_row({xs[i], ts[j], u[j][i]});
        }
        if (residual) {
            text += "# residual_max_abs=" + format_double(residual->max_abs) + "\n";
            text += "# residual_l2=" + format_double(residual->l2) + "\n";
        }
    } else {
        Json rows = Json::array();
        for (std::size_t j = 0; j < ts.size(); ++j) {
            for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({xs[i], ts[j], u[j][i]});
        }
        Json doc{{"schema", 1}, {"command", "bvp"}, {"config", problem_json(c.problem)}};
        if (hypotheses) doc["hypothesis_report"] = hypotheses_json(*hypotheses);
        if (residual) doc["residual_report"] = residual_json(*residual);
        doc["grid"] = {{"x_count", spec.x_count},
                       {"t_count", spec.t_count},
                       {"T", spec.T},
                       {"columns", {"x", "t", "u"}},
                       {"rows", rows}};
        text = dump(doc);
    }
    emit(text, c.out, out);
    return exit_ok;
}

// ---- verify ----------------------------------------------------------------------------

struct VerifyRun {
    BvpConfig problem;
    std::string in;
    double tol = 1e-3;
    std::string out;
};

void register_verify(Flags& flags, VerifyRun& c) {
    flags.option("in", c.in, "JSON written by `bvp --format json`");
    register_problem(flags, c.problem, false);
    flags.option("tol", c.tol, "pass threshold for residual and deviation");
    flags.option("out", c.out, "output file (default stdout)");
}

/// Reads the problem and the grid of a stored bvp document. Throws UsageError.
std::pair<BvpConfig, SampledGrid> load_solution(const std::string& path) {
    const Json doc = Flags::read_json(path, "solution file");
    auto fail = [&](const std::string& why) { return UsageError("malformed solution file '" + path + "': " + why); };
    if (!doc.is_object()) throw fail("expected a JSON object");
    if (doc.value("schema", Json()) != Json(1)) throw fail("missing or unsupported \"schema\"");
    if (doc.value("command", Json()) != Json("bvp")) throw fail("not the output of the bvp command");
    if (!doc.contains("config") || !doc["config"].is_object()) throw fail("missing \"config\"");

    BvpConfig c;
    const Json& cfg = doc["config"];
    auto field = [&](const char* key, auto& target) {
        if (!cfg.contains(key)) throw fail(std::string("config lacks \"") + key + "\"");
        try {
            assign_from_json(cfg[key], target);
        } catch (const std::invalid_argument& e) {
            throw fail(std::string("config \"") + key + "\": " + e.what());
        }
    };
    field("problem", c.problem);
    field("alpha", c.alpha);
    field("g", c.g);
    field("t-max", c.t_max);
    field("modes", c.modes);
    field("x-steps", c.x_steps);
    field("t-steps", c.t_steps);
    std::vector<std::string> errors;
    validate_problem(c, errors);
    if (!errors.empty()) throw fail(errors.front());

    SampledGrid data{grid_of(c), {}};
    const auto xs = data.spec.x_nodes();
    const auto ts = data.spec.t_nodes();
    if (!doc.contains("grid") || !doc["grid"].is_object() || !doc["grid"].contains("rows") ||
        !doc["grid"]["rows"].is_array()) {
        throw fail("missing \"grid\".\"rows\"");
    }
    const Json& rows = doc["grid"]["rows"];
    if (rows.size() != xs.size() * ts.size()) throw fail("grid has the wrong number of rows");
    data.u.assign(xs.size(), std::vector<double>(ts.size()));
    std::size_t k = 0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        for (std::size_t i = 0; i < xs.size(); ++i, ++k) {
            const Json& row = rows[k];
            if (!row.is_array() || row.size() != 3 || !row[0].is_number() || !row[1].is_number() ||
                !row[2].is_number()) {
                throw fail("row " + std::to_string(k) + " is not [x, t, u]");
            }
            if (std::abs(row[0].get<double>() - xs[i]) > 1e-12 || std::abs(row[1].get<double>() - ts[j]) > 1e-12) {
                throw fail("row " + std::to_string(k) + " is off the grid");
            }
            data.u[i][j] = row[2].get<double>();
        }
    }
    return {c, data};
}

int run_verify(Flags& flags, VerifyRun& c, std::ostream& out) {
    std::vector<std::string> errors;
    flags.resolve(errors);
    check(std::isfinite(c.tol) && c.tol > 0.0, "--tol must be positive", errors);
    const bool from_file = flags.given("in");
    if (from_file) {
        for (const char* name : {"problem", "alpha", "g", "t-max", "modes", "x-steps", "t-steps"}) {
            if (flags.given(name)) errors.push_back(std::string("--") + name + " cannot be combined with --in");
        }
    } else {
        for (const char* name : {"problem", "alpha", "g"}) {
            if (!flags.given(name)) errors.push_back(std::string("--") + name + " is required without --in");
        }
        validate_problem(c.problem, errors);
    }
    if (!errors.empty()) throw ConfigErrors(errors);

    std::optional<SampledGrid> stored;
    if (from_file) {
        auto [cfg, data] = load_solution(c.in);
        c.problem = cfg;
        stored = std::move(data);
    }
    std::vector<std::string> expr_errors;
    const auto g = parse_expr("g", c.problem.g, expr_errors);
    if (!g) {
        if (from_file) throw UsageError("malformed solution file '" + c.in + "': " + expr_errors.front());
        throw ConfigErrors(expr_errors);
    }
    if (stored && stored->spec.x_count < 7) {
        throw UsageError("solution file '" + c.in + "' needs at least 6 x-steps for the residual stencil");
    }

    const BVProblem p = make_problem(c.problem, *g);
    const HypothesisReport hypotheses = check_hypotheses(p);
    const SeriesSolution s = solve_unchecked(p);
    const GridSpec spec = grid_of(c.problem);

    ResidualReport residual;
    std::optional<ResidualReport> deviation;
    if (stored) {
        residual = sampled_residual(*stored, p.problem, p.alpha, p.g);
        const auto xs = spec.x_nodes();
        const auto ts = spec.t_nodes();
        const SeriesColumns columns(s, xs);
        ResidualReport d;
        d.grid_spec = spec;
        d.grid.assign(xs.size(), std::vector<double>(ts.size()));
        double sum = 0.0;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            const auto u = columns.values(ts[j]);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                d.grid[i][j] = stored->u[i][j] - u[i];
                d.max_abs = std::max(d.max_abs, std::abs(d.grid[i][j]));
                sum += d.grid[i][j] * d.grid[i][j];
            }
        }
        d.l2 = std::sqrt(sum / static_cast<double>(xs.size() * ts.size()));
        deviation = std::move(d);
    } else {
        residual = pde_residual(s, p.g, spec);
    }

    const bool pass = hypotheses.all_pass() && residual.max_abs < c.tol && (!deviation || deviation->max_abs < c.tol);
    Json doc{{"schema", 1},
             {"command", "verify"},
             {"source", from_file ? Json(c.in) : Json("flags")},
             {"config", problem_json(c.problem)},
             {"tol", c.tol},
             {"hypothesis_report", hypotheses_json(hypotheses)},
             {"residual_report", residual_json(residual)}};
    if (deviation) doc["grid_deviation"] = residual_json(*deviation);
    doc["pass"] = pass;
    emit(dump(doc), c.out, out);
    return exit_ok;
}

// ---- bases -----------------------------------------------------------------------------

struct BasesRun {
    std::string family;
    int k_max = 4;
    bool table = false;
    int x_steps = 64;
    std::string format = "csv";
    std::string out;
};

void register_bases(Flags& flags, BasesRun& c) {
    flags.option("family", c.family, "dirichlet, neumann, periodic, rootsystem or adjoint", true);
    flags.option("k-max", c.k_max, "highest wavenumber index");
    flags.flag("table", c.table, "tabulate the basis functions instead of the pairing matrix");
    flags.option("x-steps", c.x_steps, "table intervals on [0,1]");
    flags.option("format", c.format, "csv or json");
    flags.option("out", c.out, "output file (default stdout)");
}

std::string mode_label(const ModeIndex& m) {
    if (m.slot == ModeSlot::Primary0) return to_string(m.slot);
    return std::string(to_string(m.slot)) + "_" + std::to_string(m.k);
}

int run_bases(Flags& flags, const BasesRun& c, std::ostream& out) {
    constexpr BasisFamily families[] = {BasisFamily::DirichletSine, BasisFamily::NeumannCosine,
                                        BasisFamily::PeriodicFourier, BasisFamily::RootSystemX,
                                        BasisFamily::AdjointSystemY};
    std::vector<std::string> errors;
    flags.resolve(errors);
    std::optional<BasisFamily> family;
    for (BasisFamily f : families) {
        if (c.family == to_string(f)) family = f;
    }
    check(family.has_value() || !flags.given("family"),
          "--family must be one of dirichlet, neumann, periodic, rootsystem, adjoint", errors);
    check(c.k_max >= 1, "--k-max must be at least 1", errors);
    check(c.x_steps >= 1, "--x-steps must be at least 1", errors);
    check_format(c.format, errors);
    if (!errors.empty()) throw ConfigErrors(errors);

    const auto modes = family_modes(*family, c.k_max);
    std::vector<std::string> labels, dual_labels;
    for (const auto& m : modes) {
        labels.push_back(mode_label(m));
        dual_labels.push_back(mode_label(dual_mode(m)));
    }
    const Matrix matrix =
        *family == BasisFamily::RootSystemX ? biorthogonality_matrix(c.k_max) : pairing_matrix(*family, c.k_max);
    const double off = max_off_identity(matrix);

    std::vector<double> xs;
    std::vector<std::vector<double>> table;  // [x][mode]
    if (c.table) {
        for (int i = 0; i <= c.x_steps; ++i) {
            const double x = i == c.x_steps ? 1.0 : static_cast<double>(i) / c.x_steps;
            xs.push_back(x);
            std::vector<double> row;
            for (const auto& m : modes) row.push_back(eval_basis(m, x));
            table.push_back(std::move(row));
        }
    }

    std::string text;
    if (c.format == "csv") {
        auto line = [](const std::string& head, const auto& cells, auto&& render) {
            std::string s = head;
            for (const auto& v : cells) s += "," + render(v);
            return s + "\n";
        };
        auto same = [](const std::string& s) { return s; };
        if (c.table) {
            text = line("x", labels, same);
            for (std::size_t i = 0; i < xs.size(); ++i) text += line(format_double(xs[i]), table[i], format_double);
        } else {
            text = line("mode", dual_labels, same);
            for (std::size_t i = 0; i < modes.size(); ++i) text += line(labels[i], matrix[i], format_double);
            text += "# max_off_identity=" + format_double(off) + "\n";
        }
    } else {
        Json doc{{"schema", 1},
                 {"command", "bases"},
                 {"config", {{"family", c.family}, {"k-max", c.k_max}}},
                 {"modes", labels},
                 {"dual_modes", dual_labels},
                 {"matrix", matrix},
                 {"max_off_identity", off}};
        if (c.table) {
            Json rows = Json::array();
            for (std::size_t i = 0; i < xs.size(); ++i) {
                Json row = {xs[i]};
                for (double v : table[i]) row.push_back(v);
                rows.push_back(row);
            }
            Json columns = {"x"};
            for (const auto& l : labels) columns.push_back(l);
            doc["config"]["x-steps"] = c.x_steps;
            doc["table"] = {{"columns", columns}, {"rows", rows}};
        }
        text = dump(doc);
    }
    emit(text, c.out, out);
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Caputo-Fabrizio time-fractional heat equation solver", "cfheat");
    app.require_subcommand(1);

    IvpConfig ivp;
    BvpRun bvp;
    VerifyRun verify;
    BasesRun bases;
    auto* ivp_cmd = app.add_subcommand("ivp", "solve D^a u = lambda u + f(t), u(0) = u0");
    auto* bvp_cmd = app.add_subcommand("bvp", "solve the heat problem 1-4 by eigenfunction expansion");
    auto* verify_cmd = app.add_subcommand("verify", "check a stored or re-solved bvp solution");
    auto* bases_cmd = app.add_subcommand("bases", "pairing matrix or table of a basis family");
    Flags ivp_flags(*ivp_cmd), bvp_flags(*bvp_cmd), verify_flags(*verify_cmd), bases_flags(*bases_cmd);
    register_ivp(ivp_flags, ivp);
    register_bvp(bvp_flags, bvp);
    register_verify(verify_flags, verify);
    register_bases(bases_flags, bases);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (ivp_cmd->parsed()) return run_ivp(ivp_flags, ivp, out);
        if (bvp_cmd->parsed()) return run_bvp(bvp_flags, bvp, out, err);
        if (verify_cmd->parsed()) return run_verify(verify_flags, verify, out);
        return run_bases(bases_flags, bases, out);
    } catch (const ConfigErrors& e) {
        err << "error: invalid configuration\n";
        for (const auto& item : e.items) err << "  " << item << "\n";
        return exit_usage;
    } catch (const CompatibilityError& e) {
        err << "error: " << e.what() << "\n";
        return exit_incompatible;
    } catch (const HypothesisViolation& e) {
        err << "error: " << e.what() << "\n";
        return exit_incompatible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
}

}  // namespace cfheat::cli
