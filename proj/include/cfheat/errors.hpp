#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfheat {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain (t < 0, x outside [0,1], xi > t, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The fractional order is too close to 1 for an operation that divides by 1 - alpha.
class AlphaSingular : public Error {
public:
    using Error::Error;
};

/// Data violates a compatibility condition required for the closed-form solution.
class CompatibilityError : public Error {
public:
    CompatibilityError(std::string condition, double measured)
        : Error("compatibility condition violated: " + condition + " (measured " +
                std::to_string(measured) + ")"),
          condition_(std::move(condition)),
          measured_(measured) {}

    const std::string& condition() const noexcept { return condition_; }
    double measured() const noexcept { return measured_; }

private:
    std::string condition_;
    double measured_;
};

class NoConvergence : public Error {
public:
    NoConvergence(int iterations, double last_residual)
        : Error("Picard iteration did not converge after " + std::to_string(iterations) +
                " iterations (last sup-distance " + std::to_string(last_residual) + ")"),
          iterations_(iterations),
          last_residual_(last_residual) {}

    int iterations() const noexcept { return iterations_; }
    double last_residual() const noexcept { return last_residual_; }

private:
    int iterations_;
    double last_residual_;
};

/// One or more solvability hypotheses of a boundary-value problem fail.
class HypothesisViolation : public Error {
public:
    explicit HypothesisViolation(std::vector<std::string> failed)
        : Error(join(failed)), failed_(std::move(failed)) {}

    const std::vector<std::string>& failed() const noexcept { return failed_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string msg = "hypothesis violated:";
        for (const auto& s : items) msg += " " + s + ";";
        return msg;
    }
    std::vector<std::string> failed_;
};

// ---- expression language -------------------------------------------------

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string expected)
        : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected),
          offset_(offset),
          expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class ArityError : public Error {
public:
    ArityError(std::size_t offset, const std::string& function, std::size_t got)
        : Error("function '" + function + "' at offset " + std::to_string(offset) +
                " takes 1 argument, got " + std::to_string(got)),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnboundVariable : public Error {
public:
    explicit UnboundVariable(const std::string& name)
        : Error("variable '" + name + "' is not bound in this context") {}
};

class MathDomain : public Error {
public:
    using Error::Error;
};

}  // namespace cfheat
