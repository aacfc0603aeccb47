#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kflow/errors.hpp"

namespace kflow {

// Uniform grid on the unit circle [0,1). Grid functions are identified with
// their periodic extension; nodes are x_i = i/n.
struct PeriodicGrid {
    int n_points = 0;
    double spacing = 0.0;

    PeriodicGrid() = default;
    explicit PeriodicGrid(int n) : n_points(n), spacing(1.0 / n) {
        if (n < 8) throw PreconditionViolated("PeriodicGrid: need n_points >= 8, got " + std::to_string(n));
    }

    double node(int i) const { return i * spacing; }
    bool operator==(const PeriodicGrid& o) const { return n_points == o.n_points; }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }
};

namespace tol {

// Discretization-aware tolerances shared across modules.
inline double psh(const PeriodicGrid& g) { return 1e-9 * double(g.n_points) * double(g.n_points); }
inline double roundtrip(const PeriodicGrid& g) { return 20.0 * g.spacing * g.spacing; }
constexpr double mass = 1e-9;
constexpr double solver = 1e-10;
constexpr double rho_min = 1e-6;   // density floor for curvature evaluation
constexpr double rho_floor = 1e-300; // log argument floor, keeps 0*log 0 = 0

} // namespace tol

// Potential u on the circle grid; the perturbed volume density is 1 + u''.
struct KahlerPotential {
    PeriodicGrid grid;
    std::vector<double> values;

    KahlerPotential() = default;
    KahlerPotential(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (int(values.size()) != grid.n_points)
            throw PreconditionViolated("KahlerPotential: value count does not match grid");
    }
};

// Convex dual potential on the moment interval [0,1) with the quasi-periodic
// extension g(p+1) = g(p) + p + 1/2. Geodesics are linear in this chart.
struct SymplecticPotential {
    PeriodicGrid grid;
    std::vector<double> values;

    SymplecticPotential() = default;
    SymplecticPotential(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (int(values.size()) != grid.n_points)
            throw PreconditionViolated("SymplecticPotential: value count does not match grid");
    }
};

// Probability density on the circle grid (total mass 1 under the trapezoid rule).
struct DensityMeasure {
    PeriodicGrid grid;
    std::vector<double> density;

    DensityMeasure() = default;
    DensityMeasure(PeriodicGrid g, std::vector<double> d) : grid(g), density(std::move(d)) {
        if (int(density.size()) != grid.n_points)
            throw PreconditionViolated("DensityMeasure: value count does not match grid");
    }

    double mass() const {
        double s = 0.0;
        for (double v : density) s += v;
        return s * grid.spacing;
    }
};

// Twist current chi = beta + f''. beta is carried as a nonnegative density b,
// f as grid samples. positivity/strictness of b + D2 f are recorded flags.
struct TwistData {
    PeriodicGrid grid;
    std::vector<double> beta_density;
    std::vector<double> f_values;
    bool positivity_flag = false;
    bool strict_flag = false;

    TwistData() = default;
    TwistData(PeriodicGrid g, std::vector<double> b, std::vector<double> f);

    double mass() const {
        double s = 0.0;
        for (double v : beta_density) s += v;
        return s * grid.spacing;
    }
    // Mean-curvature constant of the twisted problem; the flat model has
    // vanishing background scalar curvature, so it reduces to minus the mass.
    double s_bar_chi() const { return -mass(); }
    bool is_zero() const;
};

// ---- difference operators -------------------------------------------------

// Periodic (circulant) second difference of a periodic grid function.
std::vector<double> second_difference_periodic(const PeriodicGrid& g, const std::vector<double>& v);

// Second/first differences of a symplectic potential under its quasi-periodic
// extension. The affine ghost corrections make D2(p^2/2) == 1 exactly.
std::vector<double> second_difference_quasi(const PeriodicGrid& g, const std::vector<double>& v);
std::vector<double> first_difference_quasi(const PeriodicGrid& g, const std::vector<double>& v);

// Trapezoid quadrature; exact mass-1 convention (V = 1).
inline double integrate(const PeriodicGrid& g, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s * g.spacing;
}

// ---- validation -----------------------------------------------------------

// Throws PshViolation unless 1 + D2 u >= -psh_tol at every node.
void validate_psh(const KahlerPotential& u);

// Throws ConvexityViolation unless D2 g >= -psh_tol at every node; returns
// the minimum discrete curvature.
double validate_convex(const SymplecticPotential& g);

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where);

} // namespace kflow
