#pragma once

#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace geometry {

// Monge-Ampere density of u: rho = 1 + D2 u, clamped at zero from below by at
// most the psh tolerance. Throws PshViolation on invalid input.
DensityMeasure ma_measure(const KahlerPotential& u);

// Convex dual of w(x) = x^2/2 + u(x), computed as a discrete supremum over
// three fundamental domains of the quasi-periodic extension of w.
SymplecticPotential legendre(const KahlerPotential& u);

// Inverse transform: u(x) = sup_p (x p - g(p)) - x^2/2 over the tripled
// moment grid. Round trip with legendre() is the identity within O(h^2).
KahlerPotential inverse_legendre(const SymplecticPotential& g);

// Largest discrete psh function below min_i u_i: lower convex hull of
// min_i (x^2/2 + u_i) over the tripled domain, minus x^2/2.
KahlerPotential envelope(const std::vector<KahlerPotential>& us);
KahlerPotential envelope(const KahlerPotential& a, const KahlerPotential& b);

struct DecreasingApproximation {
    std::vector<KahlerPotential> sequence; // pointwise decreasing, each >= u
    std::vector<double> d1_gaps;           // d1 distance of each iterate to u
};

// Smooth decreasing approximations of u: mollify by shrinking periodic
// Gaussian kernels and add vanishing constants that enforce monotonicity.
DecreasingApproximation approximate_decreasing(const KahlerPotential& u, int k_max);

// Periodic Gaussian smoothing with standard deviation sigma (grid units of x).
std::vector<double> mollify_periodic(const PeriodicGrid& g, const std::vector<double>& v, double sigma);

// Quasi-periodic extension of grid data over three fundamental domains,
// following v(t + 1) = v(t) + t + 1/2; slot j carries coordinate (j - n) h.
std::vector<double> extend_quasi(const PeriodicGrid& g, const std::vector<double>& v);

// Convex conjugate of quasi-periodic data, evaluated at the dual grid nodes
// through the monotone slope map of a C^2 spline. Smooth output: second
// differences of the result approximate the reciprocal curvature.
std::vector<double> conjugate_convex(const PeriodicGrid& grid, const std::vector<double>& v);

// Discrete-supremum conjugate (max over the tripled node set). Piecewise
// linear output; kept for checks that rely on the exact max-affine structure.
std::vector<double> conjugate_sup(const PeriodicGrid& grid, const std::vector<double>& v);

} // namespace geometry
} // namespace kflow
