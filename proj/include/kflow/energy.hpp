#pragma once

#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace energy {

// Monotone energy AM(u) = (1/2)(int u dx + int u dmu_u); AM(u + c) = AM(u) + c.
double am(const KahlerPotential& u);

// Contracted energy AM_gamma(u) = int u gamma dx for an arbitrary signed
// density gamma.
double am_gamma(const KahlerPotential& u, const std::vector<double>& gamma_density);

// AM_chi via the potential split: AM_beta(u) + int f (dmu_u - dx).
double am_chi(const KahlerPotential& u, const TwistData& chi);

// Relative entropy Ent(e^{-f_ref} dx, mu_u) = int log(rho_u e^{f_ref}) rho_u dx
// with 0 log 0 = 0. Returns +infinity when mu_u charges a node where the
// reference weight vanishes.
double entropy(const std::vector<double>& f_ref, const KahlerPotential& u);

// K-energy: entropy plus the (here vanishing) mean-curvature and Ricci terms,
// kept in the three-term form so the structure generalizes.
double kenergy(const KahlerPotential& u);

// Twisted K-energy, Ent(e^{-f}dx, mu_u) + S_chi AM(u) + AM_beta(u) - int f dx.
double twisted_kenergy(const KahlerPotential& u, const TwistData& chi);

// Same value through the beta/f-independent route:
// Ent(dx, mu_u) + S_chi AM(u) + AM_chi(u).
double twisted_kenergy_alt(const KahlerPotential& u, const TwistData& chi);

// Gradient density S_chi - S_u + tr_u chi of the twisted K-energy with
// respect to the L^2(mu_u) pairing. Throws DegenerateMetric below rho_min.
std::vector<double> kenergy_gradient(const KahlerPotential& u, const TwistData& chi);

// ---- symplectic-chart evaluators -------------------------------------
// Exact identities of the dual chart: AM(u) = 1/6 - int g,
// Ent(dx, mu_u) = -int log D2 g. Used along geodesics and by the flow,
// where transform round trips would pollute convexity diagnostics.

double am_symplectic(const SymplecticPotential& g);
double entropy_symplectic(const SymplecticPotential& g);

// int u dx expressed in the dual chart (exact variational counterpart of the
// x-chart quadrature up to O(h^2)).
double mean_symplectic(const SymplecticPotential& g);

// Twisted K-energy evaluated natively in the dual chart. Twist samples are
// interpolated periodically at the moment-map image x = g'.
double twisted_kenergy_symplectic(const SymplecticPotential& g, const TwistData& chi);

// Periodic cubic Hermite interpolation of circle-grid samples, used to
// evaluate twist data at off-grid moment-map images.
class PeriodicInterpolant {
public:
    PeriodicInterpolant() = default;
    PeriodicInterpolant(const PeriodicGrid& g, const std::vector<double>& samples);
    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

private:
    int n_ = 0;
    double h_ = 0.0;
    std::vector<double> y_;
    std::vector<double> slope_;
};

} // namespace energy
} // namespace kflow
