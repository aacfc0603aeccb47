#include "kflow/metric.hpp"

#include <algorithm>
#include <cmath>

#include "kflow/energy.hpp"
#include "kflow/geometry.hpp"

namespace kflow {
namespace metric {
namespace {

double lp_mean(const PeriodicGrid& grid, const std::vector<double>& v,
               const std::vector<double>& weight, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p) * weight[i];
    return std::pow(s * grid.spacing, 1.0 / p);
}

} // namespace

double finsler_norm(const std::vector<double>& xi, const KahlerPotential& u, double p) {
    if (p < 1.0) throw PreconditionViolated("finsler_norm: p must be >= 1");
    if (xi.size() != u.values.size()) throw PreconditionViolated("finsler_norm: size mismatch");
    const auto mu = geometry::ma_measure(u);
    return lp_mean(u.grid, xi, mu.density, p);
}

double dp_symplectic(const SymplecticPotential& g0, const SymplecticPotential& g1, double p) {
    require_same_grid(g0.grid, g1.grid, "dp");
    if (p < 1.0) throw PreconditionViolated("dp: p must be >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < g0.values.size(); ++i)
        s += std::pow(std::abs(g0.values[i] - g1.values[i]), p);
    return std::pow(s * g0.grid.spacing, 1.0 / p);
}

double dp(const KahlerPotential& u0, const KahlerPotential& u1, double p) {
    require_same_grid(u0.grid, u1.grid, "dp");
    // A pair differing by a constant has exact distance |c|.
    double c = u1.values[0] - u0.values[0];
    bool constant_gap = true;
    for (std::size_t i = 1; i < u0.values.size(); ++i) {
        if (std::abs((u1.values[i] - u0.values[i]) - c) > 1e-15 * (1.0 + std::abs(c))) {
            constant_gap = false;
            break;
        }
    }
    if (constant_gap) {
        validate_psh(u0);
        return std::abs(c);
    }
    return dp_symplectic(geometry::legendre(u0), geometry::legendre(u1), p);
}

double d1_envelope(const KahlerPotential& u0, const KahlerPotential& u1) {
    require_same_grid(u0.grid, u1.grid, "d1_envelope");
    const auto p = geometry::envelope(u0, u1);
    const double v = energy::am(u0) + energy::am(u1) - 2.0 * energy::am(p);
    return std::max(0.0, v);
}

double i_functional(const KahlerPotential& u, const KahlerPotential& v) {
    require_same_grid(u.grid, v.grid, "i_functional");
    const auto mu = geometry::ma_measure(u);
    const auto mv = geometry::ma_measure(v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        s += (u.values[i] - v.values[i]) * (mv.density[i] - mu.density[i]);
    return s * u.grid.spacing;
}

std::pair<double, double> dp_ratio_check(const KahlerPotential& u0, const KahlerPotential& u1, double p) {
    require_same_grid(u0.grid, u1.grid, "dp_ratio_check");
    const double d = dp(u0, u1, p);
    const auto mu0 = geometry::ma_measure(u0);
    const auto mu1 = geometry::ma_measure(u1);
    std::vector<double> diff(u0.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u0.values[i] - u1.values[i];
    const double num = lp_mean(u0.grid, diff, mu0.density, p) + lp_mean(u0.grid, diff, mu1.density, p);
    if (d == 0.0 && num == 0.0) return {1.0, 1.0};
    if (d == 0.0 || num == 0.0)
        throw DegenerateMetric("dp_ratio_check: one side vanishes while the other does not");
    const double r = num / d;
    return {r, 1.0 / r};
}

} // namespace metric
} // namespace kflow
