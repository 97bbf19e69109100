#include "cfheat/forcing_dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "cfheat/errors.hpp"

namespace cfheat::dsl {

struct Expr::Node {
    Kind kind;
    double value = 0.0;
    Func func = Func::Sin;
    std::array<std::shared_ptr<const Node>, 2> child{};
    bool has_x = false;
    bool has_t = false;
};

Expr Expr::number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->value = v;
    return Expr(std::move(n));
}

Expr Expr::pi() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pi;
    return Expr(std::move(n));
}

Expr Expr::var_x() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::VarX;
    n->has_x = true;
    return Expr(std::move(n));
}

Expr Expr::var_t() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::VarT;
    n->has_t = true;
    return Expr(std::move(n));
}

Expr Expr::negate(Expr a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Neg;
    n->has_x = a.node_->has_x;
    n->has_t = a.node_->has_t;
    n->child[0] = std::move(a.node_);
    return Expr(std::move(n));
}

Expr Expr::binary(Kind op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = op;
    n->has_x = lhs.node_->has_x || rhs.node_->has_x;
    n->has_t = lhs.node_->has_t || rhs.node_->has_t;
    n->child[0] = std::move(lhs.node_);
    n->child[1] = std::move(rhs.node_);
    return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->func = f;
    n->has_x = arg.node_->has_x;
    n->has_t = arg.node_->has_t;
    n->child[0] = std::move(arg.node_);
    return Expr(std::move(n));
}

Expr::Kind Expr::kind() const noexcept { return node_->kind; }
double Expr::value() const noexcept { return node_->value; }
Func Expr::func() const noexcept { return node_->func; }
bool Expr::depends_on_x() const noexcept { return node_->has_x; }
bool Expr::depends_on_t() const noexcept { return node_->has_t; }

Expr Expr::lhs() const { return Expr(node_->child[0]); }
Expr Expr::rhs() const { return Expr(node_->child[1]); }

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::Number:
            return a.value() == b.value();
        case Expr::Kind::Pi:
        case Expr::Kind::VarX:
        case Expr::Kind::VarT:
            return true;
        case Expr::Kind::Neg:
            return a.lhs() == b.lhs();
        case Expr::Kind::Call:
            return a.func() == b.func() && a.lhs() == b.lhs();
        default:
            return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
}

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
    }
    return "?";
}

// ---- parser -----------------------------------------------------------------

namespace {

constexpr const char* kOperand = "number, variable, function call or '('";

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse_all() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError(pos_, "operator or end of input");
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Expr parse_expr() {
        const bool negated = accept('-');
        Expr acc = parse_term();
        if (negated) acc = Expr::negate(std::move(acc));
        for (;;) {
            const char c = peek();
            if (c != '+' && c != '-') return acc;
            ++pos_;
            Expr rhs = parse_term();
            acc = Expr::binary(c == '+' ? Expr::Kind::Add : Expr::Kind::Sub, std::move(acc),
                               std::move(rhs));
        }
    }

    Expr parse_term() {
        Expr acc = parse_power();
        for (;;) {
            const char c = peek();
            if (c != '*' && c != '/') return acc;
            ++pos_;
            Expr rhs = parse_power();
            acc = Expr::binary(c == '*' ? Expr::Kind::Mul : Expr::Kind::Div, std::move(acc),
                               std::move(rhs));
        }
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) {
            Expr exponent = parse_power();
            return Expr::binary(Expr::Kind::Pow, std::move(base), std::move(exponent));
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, kOperand);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            if (!accept(')')) throw ParseError(pos_, "')'");
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ParseError(pos_, kOperand);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError(start, "digits");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError(pos_, "exponent digits");
        }
        double v = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
            throw ParseError(start, "finite number");
        }
        return Expr::number(v);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") return Expr::var_x();
        if (name == "t") return Expr::var_t();
        if (name == "pi") return Expr::pi();

        Func f;
        if (name == "sin") f = Func::Sin;
        else if (name == "cos") f = Func::Cos;
        else if (name == "exp") f = Func::Exp;
        else if (name == "log") f = Func::Log;
        else if (name == "sqrt") f = Func::Sqrt;
        else throw ParseError(start, "variable x or t, constant pi, or a function name");

        if (!accept('(')) throw ParseError(pos_, "'(' after function name");
        std::vector<Expr> args;
        if (!accept(')')) {
            args.push_back(parse_expr());
            while (accept(',')) args.push_back(parse_expr());
            if (!accept(')')) throw ParseError(pos_, "')' or ','");
        }
        if (args.size() != 1) throw ArityError(start, std::string(name), args.size());
        return Expr::call(f, std::move(args.front()));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view src) { return Parser(src).parse_all(); }

// ---- evaluation -------------------------------------------------------------

namespace {

struct Evaluator {
    std::optional<double> x;
    double t;
    bool strict;

    double check(double v) const {
        if (strict && !std::isfinite(v)) throw MathDomain("non-finite value in forcing evaluation");
        return v;
    }

    double operator()(const Expr::Node& n) const {
        using K = Expr::Kind;
        switch (n.kind) {
            case K::Number: return n.value;
            case K::Pi: return std::numbers::pi;
            case K::VarT: return t;
            case K::VarX:
                if (!x) throw UnboundVariable("x");
                return *x;
            case K::Neg: return -(*this)(*n.child[0]);
            case K::Add: {
                const double a = (*this)(*n.child[0]);
                return check(a + (*this)(*n.child[1]));
            }
            case K::Sub: {
                const double a = (*this)(*n.child[0]);
                return check(a - (*this)(*n.child[1]));
            }
            case K::Mul: {
                const double a = (*this)(*n.child[0]);
                return check(a * (*this)(*n.child[1]));
            }
            case K::Div: {
                const double a = (*this)(*n.child[0]);
                return check(a / (*this)(*n.child[1]));
            }
            case K::Pow: {
                const double a = (*this)(*n.child[0]);
                const double b = (*this)(*n.child[1]);
                if (a == 0.0 && b < 0.0) throw MathDomain("0 raised to a negative power");
                if (a < 0.0 && b != std::trunc(b)) {
                    throw MathDomain("negative base raised to a non-integer power");
                }
                return check(std::pow(a, b));
            }
            case K::Call: {
                const double a = (*this)(*n.child[0]);
                switch (n.func) {
                    case Func::Sin: return check(std::sin(a));
                    case Func::Cos: return check(std::cos(a));
                    case Func::Exp: return check(std::exp(a));
                    case Func::Log:
                        if (!(a > 0.0)) throw MathDomain("log of a non-positive value");
                        return check(std::log(a));
                    case Func::Sqrt:
                        if (a < 0.0) throw MathDomain("sqrt of a negative value");
                        return check(std::sqrt(a));
                }
            }
        }
        return 0.0;
    }
};

}  // namespace

double eval(const Expr& e, std::optional<double> x, double t, EvalOptions opts) {
    return Evaluator{x, t, opts.strict}(e.node());
}

// ---- differentiation --------------------------------------------------------

namespace {

bool is_number(const Expr& e, double v) {
    return e.kind() == Expr::Kind::Number && e.value() == v;
}

Expr neg(Expr a) {
    if (is_number(a, 0.0)) return a;
    if (a.kind() == Expr::Kind::Neg) return a.lhs();
    return Expr::negate(std::move(a));
}

Expr add(Expr a, Expr b) {
    if (is_number(a, 0.0)) return b;
    if (is_number(b, 0.0)) return a;
    return Expr::binary(Expr::Kind::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
    if (is_number(b, 0.0)) return a;
    if (is_number(a, 0.0)) return neg(std::move(b));
    if (a.kind() == Expr::Kind::Number && b.kind() == Expr::Kind::Number &&
        a.value() >= b.value()) {
        return Expr::number(a.value() - b.value());
    }
    return Expr::binary(Expr::Kind::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
    if (is_number(a, 0.0) || is_number(b, 0.0)) return Expr::number(0.0);
    if (is_number(a, 1.0)) return b;
    if (is_number(b, 1.0)) return a;
    if (a.kind() == Expr::Kind::Number && b.kind() == Expr::Kind::Number) {
        return Expr::number(a.value() * b.value());
    }
    return Expr::binary(Expr::Kind::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) {
    if (is_number(a, 0.0)) return a;
    if (is_number(b, 1.0)) return a;
    return Expr::binary(Expr::Kind::Div, std::move(a), std::move(b));
}

Expr pow(Expr a, Expr b) {
    if (is_number(b, 1.0)) return a;
    if (is_number(b, 0.0)) return Expr::number(1.0);
    return Expr::binary(Expr::Kind::Pow, std::move(a), std::move(b));
}

Expr d_dt(const Expr& e) {
    using K = Expr::Kind;
    if (!e.depends_on_t()) return Expr::number(0.0);
    switch (e.kind()) {
        case K::VarT: return Expr::number(1.0);
        case K::Neg: return neg(d_dt(e.lhs()));
        case K::Add: return add(d_dt(e.lhs()), d_dt(e.rhs()));
        case K::Sub: return sub(d_dt(e.lhs()), d_dt(e.rhs()));
        case K::Mul:
            return add(mul(d_dt(e.lhs()), e.rhs()), mul(e.lhs(), d_dt(e.rhs())));
        case K::Div: {
            // (a'b - ab') / b^2
            Expr num = sub(mul(d_dt(e.lhs()), e.rhs()), mul(e.lhs(), d_dt(e.rhs())));
            return div(std::move(num), pow(e.rhs(), Expr::number(2.0)));
        }
        case K::Pow: {
            const Expr a = e.lhs();
            const Expr b = e.rhs();
            if (!b.depends_on_t()) {
                // b a^(b-1) a'
                return mul(mul(b, pow(a, sub(b, Expr::number(1.0)))), d_dt(a));
            }
            const Expr log_a = Expr::call(Func::Log, a);
            if (!a.depends_on_t()) return mul(mul(e, log_a), d_dt(b));
            // a^b = exp(b log a): a^b (b' log a + b a'/a)
            return mul(e, add(mul(d_dt(b), log_a), div(mul(b, d_dt(a)), a)));
        }
        case K::Call: {
            const Expr a = e.lhs();
            Expr inner = d_dt(a);
            switch (e.func()) {
                case Func::Sin: return mul(Expr::call(Func::Cos, a), std::move(inner));
                case Func::Cos: return neg(mul(Expr::call(Func::Sin, a), std::move(inner)));
                case Func::Exp: return mul(e, std::move(inner));
                case Func::Log: return div(std::move(inner), a);
                case Func::Sqrt: return div(std::move(inner), mul(Expr::number(2.0), e));
            }
            break;
        }
        default: break;
    }
    return Expr::number(0.0);
}

}  // namespace

Expr differentiate_t(const Expr& e) { return d_dt(e); }

// ---- printing ---------------------------------------------------------------

namespace {

int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Pow: return 3;
        default: return 4;
    }
}

void print(const Expr& e, int min_prec, std::string& out) {
    const bool wrap = precedence(e) < min_prec;
    if (wrap) out += '(';
    switch (e.kind()) {
        case Expr::Kind::Number: {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, e.value());
            out.append(buf, res.ptr);
            break;
        }
        case Expr::Kind::Pi: out += "pi"; break;
        case Expr::Kind::VarX: out += 'x'; break;
        case Expr::Kind::VarT: out += 't'; break;
        case Expr::Kind::Neg:
            out += "(-";
            print(e.lhs(), 2, out);
            out += ')';
            break;
        case Expr::Kind::Call:
            out += func_name(e.func());
            out += '(';
            print(e.lhs(), 0, out);
            out += ')';
            break;
        case Expr::Kind::Add:
        case Expr::Kind::Sub:
            print(e.lhs(), 1, out);
            out += e.kind() == Expr::Kind::Add ? '+' : '-';
            print(e.rhs(), 2, out);
            break;
        case Expr::Kind::Mul:
        case Expr::Kind::Div:
            print(e.lhs(), 2, out);
            out += e.kind() == Expr::Kind::Mul ? '*' : '/';
            print(e.rhs(), 3, out);
            break;
        case Expr::Kind::Pow:
            print(e.lhs(), 4, out);
            out += '^';
            print(e.rhs(), 3, out);
            break;
    }
    if (wrap) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, 0, out);
    return out;
}

// ---- adapters ---------------------------------------------------------------

TimeSignal to_time_signal(const Expr& f, double horizon, EvalOptions opts) {
    if (f.depends_on_x()) throw UnboundVariable("x");
    const Expr df = differentiate_t(f);
    TimeSignal s([f, opts](double t) { return eval(f, std::nullopt, t, opts); }, horizon,
                 [df, opts](double t) { return eval(df, std::nullopt, t, opts); });
    if (!f.depends_on_t()) s.mark_constant();
    return s;
}

SpaceTimeForcing to_forcing(const Expr& g, EvalOptions opts) {
    const Expr dg = differentiate_t(g);
    return {[g, opts](double x, double t) { return eval(g, x, t, opts); },
            [dg, opts](double x, double t) { return eval(dg, x, t, opts); }};
}

}  // namespace cfheat::dsl
