#pragma once

// Checks that do not trust the closed forms: the PDE residual uses a numerical
// CF derivative of the synthesized solution, and the hypothesis report samples
// the forcing directly.

#include <span>
#include <string>
#include <vector>

#include "cfheat/bvp_solver.hpp"

namespace cfheat {

/// x_count by t_count nodes, uniform over [0,1] x [0,T] with exact endpoints.
struct GridSpec {
    int x_count = 33;
    int t_count = 33;
    double T = 1.0;

    std::vector<double> x_nodes() const;
    std::vector<double> t_nodes() const;
};

struct ResidualReport {
    GridSpec grid_spec;
    std::vector<std::vector<double>> grid;  ///< [x index][t index]
    double max_abs = 0.0;
    double l2 = 0.0;  ///< root mean square over the grid
};

/// D^a u - u_xx - g at every grid node. D^a comes from cf_derivative_columns applied
/// to the synthesized u; u_xx from uxx_series.
ResidualReport pde_residual(const SeriesSolution& s, const SpaceTimeForcing& g, const GridSpec& grid,
                            const QuadratureOptions& quad = {});

/// D^a u + mu u - g_k at the given times; a report with x_count = 1.
ResidualReport modal_residual(const TimeFunction& u, const TimeSignal& gk, double mu, double alpha,
                              std::span<const double> t_grid, const QuadratureOptions& quad = {});

/// Values of a candidate solution on a uniform grid, u[x index][t index].
struct SampledGrid {
    GridSpec spec;
    std::vector<std::vector<double>> u;
};

/// Residual of the discretized problem for stored grid values, independent of the series.
/// Rows t = 0 hold the initial-value defect u(x,0); the two boundary columns hold the
/// defects of the problem's two boundary conditions; interior nodes hold
/// D^a u - u_xx - g with D^a exact for the piecewise-linear interpolant in t (second
/// order) and a fourth-order difference for u_xx. Needs at least 7 x nodes.
ResidualReport sampled_residual(const SampledGrid& data, ProblemKind problem, double alpha,
                                const SpaceTimeForcing& g);

inline constexpr int hypothesis_samples = 65;

struct HypothesisCheck {
    std::string name;         ///< e.g. "g(x,0)=0"
    std::string required_by;  ///< which problem's solvability needs it
    double measured = 0.0;    ///< sampled sup of the defect, or a norm when informational
    bool pass = true;
    bool informational = false;  ///< integrability norms: reported, never failing
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;

    bool all_pass() const;
    std::vector<std::string> failed() const;
};

/// Samples the pointwise conditions on a 65-point grid; pass iff measured < compat_tol.
HypothesisReport check_hypotheses(const BVProblem& p);

}  // namespace cfheat
