#pragma once

// Eigen- and root-function systems on [0, 1] used by the series solvers.
//
//   DirichletSine    sin k pi x                       k >= 1
//   NeumannCosine    1, cos n pi x                    n >= 1
//   PeriodicFourier  1, cos 2n pi x, sin 2n pi x      n >= 1
//   RootSystemX      1, cos 2k pi x, x sin 2k pi x    k >= 1
//   AdjointSystemY   2(1-x), 4(1-x) cos 2k pi x, 4 sin 2k pi x
//
// The last two are biorthogonal to each other. Expansions in RootSystemX take
// their coefficients against AdjointSystemY and vice versa; the self-adjoint
// families pair with themselves and carry a synthesis weight of 2 on every
// non-constant mode.

#include <functional>
#include <span>
#include <vector>

#include "cfheat/forcing.hpp"

namespace cfheat {

enum class BasisFamily { DirichletSine, NeumannCosine, PeriodicFourier, RootSystemX, AdjointSystemY };

/// Primary0 is the constant (or 2(1-x)) mode with k = 0; AssocXSin is x sin 2k pi x.
enum class ModeSlot { Primary0, Cos, Sin, AssocXSin };

struct ModeIndex {
    BasisFamily family;
    ModeSlot slot;
    int k;

    bool operator==(const ModeIndex&) const = default;
};

const char* to_string(BasisFamily family);
const char* to_string(ModeSlot slot);
bool is_self_adjoint(BasisFamily family);

/// Throws DomainError for slot/k combinations the family does not contain.
void validate(const ModeIndex& m);

/// Modes with wavenumber index 1..k_max (plus the k = 0 mode where the family has one),
/// in canonical order: [k=0, then per k the Cos/Sin or Cos/AssocXSin pair].
std::vector<ModeIndex> family_modes(BasisFamily family, int k_max);

/// Pointwise values and exact x-derivatives. DomainError outside [0, 1].
double eval_basis(const ModeIndex& m, double x);
double eval_basis_dx(const ModeIndex& m, double x);
double eval_basis_dxx(const ModeIndex& m, double x);

/// The positive coefficient mu in  D^a u_k + mu u_k = g_k:  (k pi)^2, (n pi)^2 or (2k pi)^2.
/// For the adjoint system it is the eigenvalue of the paired root function.
double eigenvalue(const ModeIndex& m);

/// Function the coefficient of m is taken against: m itself for self-adjoint
/// families, the biorthogonal partner otherwise.
ModeIndex dual_mode(const ModeIndex& m);

/// 2 for non-constant modes of the self-adjoint families, 1 otherwise.
double synthesis_weight(const ModeIndex& m);

inline constexpr int n_quad_x = 1024;

/// Composite Simpson nodes and weights on [0, 1].
class XQuadrature {
public:
    explicit XQuadrature(int panels = n_quad_x);

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double integrate(std::span<const double> values) const;
    double integrate(const std::function<double(double)>& f) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Raw inner product int_0^1 g(x, t) * dual(x) dx; multiply by synthesis_weight to
/// get the series coefficient.
double coefficient(const SpaceTimeFn& g, const ModeIndex& m, double t, const XQuadrature& quad = XQuadrature());
double coefficient(const std::function<double(double)>& g, const ModeIndex& m,
                   const XQuadrature& quad = XQuadrature());

using Matrix = std::vector<std::vector<double>>;

/// <X_i, Y_j> over [0, 1] for the RootSystemX / AdjointSystemY pair, (2 k_max + 1)^2.
Matrix biorthogonality_matrix(int k_max, const XQuadrature& quad = XQuadrature());

/// <e_i, dual(e_j)> * synthesis_weight(e_j) over family_modes(family, k_max); the
/// identity for every family.
Matrix pairing_matrix(BasisFamily family, int k_max, const XQuadrature& quad = XQuadrature());

/// max |M - I|
double max_off_identity(const Matrix& m);

}  // namespace cfheat
