#pragma once

// Series solutions of  D^a u - u_xx = g  on (0,1) x (0,T],  u(x,0) = 0, under
//
//   P1  u(0,t) = u(1,t) = 0
//   P2  u_x(0,t) = u_x(1,t) = 0
//   P3  u(0,t) = u(1,t),  u_x(0,t) = u_x(1,t)
//   P4  u(0,t) = u(1,t),  u_x(0,t) = 0
//
// Each expansion coefficient solves a scalar fractional IVP. P4 expands in the
// root functions {1, cos 2k pi x, x sin 2k pi x}; its cosine coefficient is driven
// by the x sin coefficient through  D^a u1 + lam^2 u1 = g1 + 2 lam u2,  lam = 2k pi.

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cfheat/cf_operators.hpp"
#include "cfheat/forcing.hpp"
#include "cfheat/ivp_solver.hpp"
#include "cfheat/spectral_bases.hpp"

namespace cfheat {

enum class ProblemKind { P1_Dirichlet, P2_Neumann, P3_Periodic, P4_NonLocal };

const char* to_string(ProblemKind kind);
/// 1..4; DomainError otherwise.
ProblemKind problem_from_number(int n);
int problem_number(ProblemKind kind);
BasisFamily family_for(ProblemKind kind);

struct BVProblem {
    ProblemKind problem = ProblemKind::P1_Dirichlet;
    double alpha = 0.5;
    SpaceTimeForcing g;
    double T = 1.0;
    int n_modes = 32;  ///< highest wavenumber index kept

    /// DomainError unless alpha in (0,1), T > 0, n_modes >= 1 and g is set.
    void validate() const;
};

inline constexpr int n_t_cache = 513;

struct BvpOptions {
    QuadratureOptions quad;
    int x_panels = n_quad_x;
    int t_cache = n_t_cache;
    bool enforce_hypotheses = true;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Samples on a uniform grid over [0, T], read back by linear interpolation.
/// Exponential convolutions of the interpolant are integrated exactly.
class UniformSeries {
public:
    UniformSeries(std::vector<double> values, double horizon);

    double operator()(double t) const;
    double horizon() const noexcept { return horizon_; }
    const std::vector<double>& values() const noexcept { return *values_; }
    bool is_zero() const noexcept { return zero_; }
    TimeSignal signal() const;

private:
    friend class ExpConvolution;
    std::shared_ptr<const std::vector<double>> values_;
    double horizon_;
    double step_;
    bool zero_;
};

/// int_0^t p(s) e^{rate (t-s)} ds and int_0^t p(s) (t-s) e^{rate (t-s)} ds for the
/// interpolant p, from prefix tables built once; O(1) per evaluation.
class ExpConvolution {
public:
    ExpConvolution(const UniformSeries& p, double rate);

    ExpKernelMoments operator()(double t) const;
    double plain(double t) const { return (*this)(t).plain; }

private:
    struct Tables {
        std::vector<double> plain;
        std::vector<double> first;
    };
    UniformSeries p_;
    double rate_;
    std::shared_ptr<const Tables> tables_;
};

/// Coefficient of one basis function in the series for u and for u_xx.
struct ModalTerm {
    ModeIndex mode;
    TimeFunction u;
    ScalarFn uxx;          ///< coefficient of eval_basis(mode, x) in u_xx
    UniformSeries forcing; ///< synthesis-weighted g_k
};

struct SeriesSolution {
    ProblemKind problem;
    BasisFamily family;
    double alpha;
    double T;
    int n_modes;
    std::vector<ModalTerm> terms;  ///< canonical mode order

    const ModalTerm& term(const ModeIndex& m) const;  ///< DomainError when absent
};

/// Closed form for  D^a u + mu u = g_k,  u(0) = 0, with mu >= 0.
TimeFunction solve_modal_selfadjoint(const TimeSignal& gk, double mu, double alpha,
                                     const QuadratureOptions& quad = {});

/// (u_1k, u_2k) for the P4 pair with wavenumber index k.
std::pair<TimeFunction, TimeFunction> solve_modal_coupled(const TimeSignal& g1k, const TimeSignal& g2k, int k,
                                                          double alpha, const QuadratureOptions& quad = {});

/// Projects g onto the family of the problem, solves every modal IVP and returns the
/// truncated series. With enforce_hypotheses, throws HypothesisViolation first.
SeriesSolution solve_bvp(const BVProblem& p, const BvpOptions& opts = {});

double eval_solution(const SeriesSolution& s, double x, double t);
double uxx_series(const SeriesSolution& s, double x, double t);

/// Evaluates u (or u_xx) at fixed x nodes for any t, with the basis tabulated once.
class SeriesColumns {
public:
    SeriesColumns(const SeriesSolution& s, std::vector<double> xs);

    std::vector<double> values(double t) const;
    std::vector<double> uxx(double t) const;
    std::size_t width() const noexcept { return xs_.size(); }

private:
    const SeriesSolution* s_;
    std::vector<double> xs_;
    std::vector<std::vector<double>> basis_;  ///< [term][x]
};

}  // namespace cfheat
