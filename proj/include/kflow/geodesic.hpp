#pragma once

#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace geodesic {

// Constant-speed segment between two potentials, stored in the dual chart
// where the path is the straight line g_t = (1-t) g0 + t g1.
class GeodesicSegment {
public:
    GeodesicSegment(SymplecticPotential g0, SymplecticPotential g1);

    const SymplecticPotential& left() const { return g0_; }
    const SymplecticPotential& right() const { return g1_; }
    const PeriodicGrid& grid() const { return g0_.grid; }

    SymplecticPotential symplectic_at(double t) const;
    KahlerPotential sample(double t) const;

    // C^2 spline evaluation of Phi(t, x) = u_t(x). The discrete-sup sample()
    // is piecewise linear in t; space-time second differences need this
    // smooth path instead.
    double smooth_value(double t, double x) const;

private:
    SymplecticPotential g0_, g1_;
    std::vector<double> ext0_, ext1_; // tripled quasi-periodic extensions
    std::vector<double> m0_, m1_;     // spline curvatures of the extensions
};

GeodesicSegment geodesic(const KahlerPotential& u0, const KahlerPotential& u1);

// Max-norm residual of (1 + Phi_xx) Phi_tt - Phi_tx^2 over an n_t x n space-
// time grid; a pure discretization residual for the straight-line segment.
double hcma_residual(const GeodesicSegment& seg, int n_t);

// Comparison of two segments with ordered endpoints; true when
// sample_A(t) <= sample_B(t) + 10 h at all sampled t and nodes.
bool maximum_principle_check(const GeodesicSegment& a, const GeodesicSegment& b,
                             const std::vector<double>& t_samples);

struct SlopeIdentity {
    double left_slope = 0.0;
    double right_slope = 0.0;
    double endpoint_difference = 0.0;
};

// One-sided t-quotients of u_t integrated against mu_{u_t}, next to the
// monotone-energy difference of the endpoints.
SlopeIdentity am_slope_identity(const GeodesicSegment& seg, double t, int n_t);

enum class Functional {
    Am,
    KEnergy,
    Entropy,        // relative to e^{-f_ref} dx
    AmChi,          // contracted energy against chi >= 0
    TwistedKEnergy, // K_chi
};

// Max midpoint convexity violation of the functional along the segment
// (for Am: max absolute deviation from linearity). Functionals are evaluated
// in the segment's native chart so the test sees exact discrete convexity.
double convexity_check(Functional which, const GeodesicSegment& seg,
                       const std::vector<double>& t_samples, const TwistData* chi = nullptr,
                       const std::vector<double>* f_ref = nullptr);

} // namespace geodesic
} // namespace kflow
