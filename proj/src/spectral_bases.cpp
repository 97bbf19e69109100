#include "cfheat/spectral_bases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cfheat/errors.hpp"

namespace cfheat {

namespace {

constexpr double pi = std::numbers::pi;

// angular wavenumber of the mode: k pi for Dirichlet/Neumann, 2k pi otherwise
double wavenumber(const ModeIndex& m) {
    switch (m.family) {
        case BasisFamily::DirichletSine:
        case BasisFamily::NeumannCosine: return m.k * pi;
        default: return 2.0 * m.k * pi;
    }
}

bool slot_allowed(BasisFamily family, ModeSlot slot) {
    switch (family) {
        case BasisFamily::DirichletSine: return slot == ModeSlot::Sin;
        case BasisFamily::NeumannCosine: return slot == ModeSlot::Primary0 || slot == ModeSlot::Cos;
        case BasisFamily::PeriodicFourier:
        case BasisFamily::AdjointSystemY: return slot != ModeSlot::AssocXSin;
        case BasisFamily::RootSystemX: return slot != ModeSlot::Sin;
    }
    return false;
}

void require_unit_interval(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("basis evaluated outside [0, 1]: x = " + std::to_string(x));
}

}  // namespace

const char* to_string(BasisFamily family) {
    switch (family) {
        case BasisFamily::DirichletSine: return "dirichlet";
        case BasisFamily::NeumannCosine: return "neumann";
        case BasisFamily::PeriodicFourier: return "periodic";
        case BasisFamily::RootSystemX: return "rootsystem";
        case BasisFamily::AdjointSystemY: return "adjoint";
    }
    return "?";
}

const char* to_string(ModeSlot slot) {
    switch (slot) {
        case ModeSlot::Primary0: return "primary0";
        case ModeSlot::Cos: return "cos";
        case ModeSlot::Sin: return "sin";
        case ModeSlot::AssocXSin: return "xsin";
    }
    return "?";
}

bool is_self_adjoint(BasisFamily family) {
    return family != BasisFamily::RootSystemX && family != BasisFamily::AdjointSystemY;
}

void validate(const ModeIndex& m) {
    if (!slot_allowed(m.family, m.slot)) {
        throw DomainError(std::string("family ") + to_string(m.family) + " has no " + to_string(m.slot) + " modes");
    }
    if (m.slot == ModeSlot::Primary0 ? m.k != 0 : m.k < 1) {
        throw DomainError(std::string("invalid wavenumber index ") + std::to_string(m.k) + " for " +
                          to_string(m.family) + "/" + to_string(m.slot));
    }
}

std::vector<ModeIndex> family_modes(BasisFamily family, int k_max) {
    if (k_max < 1) throw DomainError("k_max must be at least 1");
    std::vector<ModeIndex> out;
    if (family != BasisFamily::DirichletSine) out.push_back({family, ModeSlot::Primary0, 0});
    for (int k = 1; k <= k_max; ++k) {
        switch (family) {
            case BasisFamily::DirichletSine: out.push_back({family, ModeSlot::Sin, k}); break;
            case BasisFamily::NeumannCosine: out.push_back({family, ModeSlot::Cos, k}); break;
            case BasisFamily::PeriodicFourier:
            case BasisFamily::AdjointSystemY:
                out.push_back({family, ModeSlot::Cos, k});
                out.push_back({family, ModeSlot::Sin, k});
                break;
            case BasisFamily::RootSystemX:
                out.push_back({family, ModeSlot::Cos, k});
                out.push_back({family, ModeSlot::AssocXSin, k});
                break;
        }
    }
    return out;
}

double eval_basis(const ModeIndex& m, double x) {
    validate(m);
    require_unit_interval(x);
    const double w = wavenumber(m);
    const bool adjoint = m.family == BasisFamily::AdjointSystemY;
    switch (m.slot) {
        case ModeSlot::Primary0: return adjoint ? 2.0 * (1.0 - x) : 1.0;
        case ModeSlot::Cos: return adjoint ? 4.0 * (1.0 - x) * std::cos(w * x) : std::cos(w * x);
        case ModeSlot::Sin: return adjoint ? 4.0 * std::sin(w * x) : std::sin(w * x);
        case ModeSlot::AssocXSin: return x * std::sin(w * x);
    }
    return 0.0;
}

double eval_basis_dx(const ModeIndex& m, double x) {
    validate(m);
    require_unit_interval(x);
    const double w = wavenumber(m);
    const double s = std::sin(w * x);
    const double c = std::cos(w * x);
    const bool adjoint = m.family == BasisFamily::AdjointSystemY;
    switch (m.slot) {
        case ModeSlot::Primary0: return adjoint ? -2.0 : 0.0;
        case ModeSlot::Cos: return adjoint ? 4.0 * (-c - (1.0 - x) * w * s) : -w * s;
        case ModeSlot::Sin: return adjoint ? 4.0 * w * c : w * c;
        case ModeSlot::AssocXSin: return s + x * w * c;
    }
    return 0.0;
}

double eval_basis_dxx(const ModeIndex& m, double x) {
    validate(m);
    require_unit_interval(x);
    const double w = wavenumber(m);
    const double s = std::sin(w * x);
    const double c = std::cos(w * x);
    const bool adjoint = m.family == BasisFamily::AdjointSystemY;
    switch (m.slot) {
        case ModeSlot::Primary0: return 0.0;
        case ModeSlot::Cos: return adjoint ? 4.0 * (2.0 * w * s - (1.0 - x) * w * w * c) : -w * w * c;
        case ModeSlot::Sin: return -w * w * (adjoint ? 4.0 * s : s);
        case ModeSlot::AssocXSin: return 2.0 * w * c - w * w * x * s;
    }
    return 0.0;
}

double eigenvalue(const ModeIndex& m) {
    validate(m);
    const double w = wavenumber(m);
    return w * w;
}

ModeIndex dual_mode(const ModeIndex& m) {
    validate(m);
    switch (m.family) {
        case BasisFamily::RootSystemX:
            return {BasisFamily::AdjointSystemY, m.slot == ModeSlot::AssocXSin ? ModeSlot::Sin : m.slot, m.k};
        case BasisFamily::AdjointSystemY:
            return {BasisFamily::RootSystemX, m.slot == ModeSlot::Sin ? ModeSlot::AssocXSin : m.slot, m.k};
        default: return m;
    }
}

double synthesis_weight(const ModeIndex& m) {
    validate(m);
    return (is_self_adjoint(m.family) && m.k >= 1) ? 2.0 : 1.0;
}

// ---- quadrature -------------------------------------------------------------

XQuadrature::XQuadrature(int panels) {
    if (panels < 2 || panels % 2 != 0) throw DomainError("x-quadrature needs an even panel count >= 2");
    const double h = 1.0 / panels;
    nodes_.resize(static_cast<std::size_t>(panels) + 1);
    weights_.resize(nodes_.size());
    for (int j = 0; j <= panels; ++j) {
        nodes_[j] = (j == panels) ? 1.0 : j * h;
        const double w = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        weights_[j] = w * h / 3.0;
    }
}

double XQuadrature::integrate(std::span<const double> values) const {
    if (values.size() != nodes_.size()) throw DomainError("sample count does not match the quadrature grid");
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) acc += weights_[j] * values[j];
    return acc;
}

double XQuadrature::integrate(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) acc += weights_[j] * f(nodes_[j]);
    return acc;
}

double coefficient(const SpaceTimeFn& g, const ModeIndex& m, double t, const XQuadrature& quad) {
    return coefficient([&](double x) { return g(x, t); }, m, quad);
}

double coefficient(const std::function<double(double)>& g, const ModeIndex& m, const XQuadrature& quad) {
    const ModeIndex dual = dual_mode(m);
    return quad.integrate([&](double x) { return g(x) * eval_basis(dual, x); });
}

// ---- matrices ---------------------------------------------------------------

namespace {

Matrix inner_products(const std::vector<ModeIndex>& rows, const std::vector<ModeIndex>& cols,
                      const std::vector<double>& col_scale, const XQuadrature& quad) {
    const auto& x = quad.nodes();
    auto tabulate = [&](const ModeIndex& m) {
        std::vector<double> v(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) v[j] = eval_basis(m, x[j]);
        return v;
    };
    std::vector<std::vector<double>> row_values;
    for (const auto& m : rows) row_values.push_back(tabulate(m));
    Matrix out(rows.size(), std::vector<double>(cols.size()));
    std::vector<double> product(x.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto col = tabulate(cols[j]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t q = 0; q < x.size(); ++q) product[q] = row_values[i][q] * col[q];
            out[i][j] = col_scale[j] * quad.integrate(product);
        }
    }
    return out;
}

}  // namespace

Matrix biorthogonality_matrix(int k_max, const XQuadrature& quad) {
    const auto rows = family_modes(BasisFamily::RootSystemX, k_max);
    std::vector<ModeIndex> cols;
    for (const auto& m : rows) cols.push_back(dual_mode(m));
    return inner_products(rows, cols, std::vector<double>(cols.size(), 1.0), quad);
}

Matrix pairing_matrix(BasisFamily family, int k_max, const XQuadrature& quad) {
    const auto rows = family_modes(family, k_max);
    std::vector<ModeIndex> cols;
    std::vector<double> scale;
    for (const auto& m : rows) {
        cols.push_back(dual_mode(m));
        scale.push_back(synthesis_weight(m));
    }
    return inner_products(rows, cols, scale, quad);
}

double max_off_identity(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            worst = std::max(worst, std::abs(m[i][j] - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

}  // namespace cfheat
