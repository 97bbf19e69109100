#pragma once

// A small expression language for forcing terms f(t) and g(x, t).
//
// Grammar (whitespace-insensitive):
//   expr    := ['-'] term (('+' | '-') term)*
//   term    := power (('*' | '/') power)*
//   power   := primary ['^' power]              (right-associative)
//   primary := number | 'pi' | 'x' | 't'
//            | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt
//
// A minus sign is only accepted at the start of an expression, so "-t^2" is
// -(t^2) while "2*-3" and "2^-1" need parentheses.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "cfheat/cf_operators.hpp"
#include "cfheat/forcing.hpp"

namespace cfheat::dsl {

enum class Func { Sin, Cos, Exp, Log, Sqrt };

class Expr {
public:
    enum class Kind { Number, Pi, VarX, VarT, Neg, Add, Sub, Mul, Div, Pow, Call };

    static Expr number(double v);
    static Expr pi();
    static Expr var_x();
    static Expr var_t();
    static Expr negate(Expr a);
    static Expr binary(Kind op, Expr lhs, Expr rhs);
    static Expr call(Func f, Expr arg);

    Kind kind() const noexcept;
    double value() const noexcept;  ///< literal value, Number only
    Func func() const noexcept;     ///< Call only
    Expr lhs() const;               ///< first operand (Neg, Call: the only one)
    Expr rhs() const;

    bool depends_on_x() const noexcept;
    bool depends_on_t() const noexcept;

    /// Structural equality.
    friend bool operator==(const Expr& a, const Expr& b);

    struct Node;
    const Node& node() const noexcept { return *node_; }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// Throws ParseError (with byte offset) or ArityError.
Expr parse(std::string_view src);

/// Strict mode turns every non-finite intermediate into MathDomain.
/// Logarithm or square root of an out-of-range value and 0^negative throw in either mode.
struct EvalOptions {
    bool strict = false;
};

/// x may be absent for f(t) contexts; using it then throws UnboundVariable.
double eval(const Expr& e, std::optional<double> x, double t, EvalOptions opts = {});

/// Exact partial derivative with respect to t (constant folding only, no simplification).
Expr differentiate_t(const Expr& e);

/// Minimal-parenthesis rendering that parses back to the same tree.
std::string to_string(const Expr& e);

const char* func_name(Func f);

/// f(t) for an initial-value problem. Throws UnboundVariable when the expression uses x.
TimeSignal to_time_signal(const Expr& f, double horizon, EvalOptions opts = {});

/// g(x, t) with the symbolic t-derivative attached.
SpaceTimeForcing to_forcing(const Expr& g, EvalOptions opts = {});

}  // namespace cfheat::dsl
