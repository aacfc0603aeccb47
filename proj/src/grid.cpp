#include "kflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kflow {

TwistData::TwistData(PeriodicGrid g, std::vector<double> b, std::vector<double> f)
    : grid(g), beta_density(std::move(b)), f_values(std::move(f)) {
    if (int(beta_density.size()) != grid.n_points || int(f_values.size()) != grid.n_points)
        throw PreconditionViolated("TwistData: array sizes do not match grid");
    for (double v : beta_density)
        if (!(v >= 0.0)) throw PreconditionViolated("TwistData: beta density must be nonnegative");
    const auto d2f = second_difference_periodic(grid, f_values);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n_points; ++i) lo = std::min(lo, beta_density[i] + d2f[i]);
    positivity_flag = lo >= -tol::psh(grid);
    strict_flag = lo > tol::psh(grid);
}

bool TwistData::is_zero() const {
    for (double v : beta_density)
        if (v != 0.0) return false;
    for (double v : f_values)
        if (v != 0.0) return false;
    return true;
}

std::vector<double> second_difference_periodic(const PeriodicGrid& g, const std::vector<double>& v) {
    const int n = g.n_points;
    const double ih2 = 1.0 / (g.spacing * g.spacing);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double vm = v[(i + n - 1) % n];
        const double vp = v[(i + 1) % n];
        out[i] = (vp - 2.0 * v[i] + vm) * ih2;
    }
    return out;
}

std::vector<double> second_difference_quasi(const PeriodicGrid& g, const std::vector<double>& v) {
    const int n = g.n_points;
    const double h = g.spacing;
    const double ih2 = 1.0 / (h * h);
    std::vector<double> out(n);
    for (int i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * ih2;
    // ghost values from g(p-1) = g(p) - p + 1/2 and g(p+1) = g(p) + p + 1/2
    const double ghost_left = v[n - 1] - 0.5 + h; // value at -h
    const double ghost_right = v[0] + 0.5;        // value at 1
    out[0] = (v[1] - 2.0 * v[0] + ghost_left) * ih2;
    out[n - 1] = (ghost_right - 2.0 * v[n - 1] + v[n - 2]) * ih2;
    return out;
}

std::vector<double> first_difference_quasi(const PeriodicGrid& g, const std::vector<double>& v) {
    const int n = g.n_points;
    const double h = g.spacing;
    const double i2h = 1.0 / (2.0 * h);
    std::vector<double> out(n);
    for (int i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) * i2h;
    const double ghost_left = v[n - 1] - 0.5 + h;
    const double ghost_right = v[0] + 0.5;
    out[0] = (v[1] - ghost_left) * i2h;
    out[n - 1] = (ghost_right - v[n - 2]) * i2h;
    return out;
}

void validate_psh(const KahlerPotential& u) {
    const double bound = -tol::psh(u.grid);
    const auto d2 = second_difference_periodic(u.grid, u.values);
    for (int i = 0; i < u.grid.n_points; ++i) {
        if (!std::isfinite(u.values[i]))
            throw PshViolation("potential is not finite at node " + std::to_string(i));
        if (1.0 + d2[i] < bound)
            throw PshViolation("1 + D2 u = " + std::to_string(1.0 + d2[i]) + " < " +
                               std::to_string(bound) + " at node " + std::to_string(i));
    }
}

double validate_convex(const SymplecticPotential& g) {
    const double bound = -tol::psh(g.grid);
    const auto d2 = second_difference_quasi(g.grid, g.values);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.grid.n_points; ++i) {
        if (!std::isfinite(g.values[i]))
            throw ConvexityViolation("symplectic potential is not finite at node " + std::to_string(i));
        lo = std::min(lo, d2[i]);
        if (d2[i] < bound)
            throw ConvexityViolation("D2 g = " + std::to_string(d2[i]) + " < tolerance at node " +
                                     std::to_string(i));
    }
    return lo;
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
    if (a != b)
        throw PreconditionViolated(std::string(where) + ": grids differ (" + std::to_string(a.n_points) +
                                   " vs " + std::to_string(b.n_points) + ")");
}

} // namespace kflow
