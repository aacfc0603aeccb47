#pragma once

#include <utility>
#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace metric {

// L^p Finsler norm of a tangent vector xi at u: (int |xi|^p dmu_u)^{1/p}.
double finsler_norm(const std::vector<double>& xi, const KahlerPotential& u, double p);

// Path-length distance, computed in the dual chart where geodesics are
// straight lines: dp = (int |g0 - g1|^p dq)^{1/p}.
double dp(const KahlerPotential& u0, const KahlerPotential& u1, double p);

// Same distance directly between dual potentials (no transform round trip).
double dp_symplectic(const SymplecticPotential& g0, const SymplecticPotential& g1, double p);

// d1 through the envelope identity AM(u0) + AM(u1) - 2 AM(P(u0, u1));
// shares no code with the dual-chart route above.
double d1_envelope(const KahlerPotential& u0, const KahlerPotential& u1);

// Quasi-distance I(u, v) = int (u - v)(dmu_v - dmu_u); symmetric, >= 0.
double i_functional(const KahlerPotential& u, const KahlerPotential& v);

// Two-sided energy surrogate ratio: both orderings of
// ((int |u0-u1|^p dmu_{u0})^{1/p} + (int |u0-u1|^p dmu_{u1})^{1/p}) / dp.
// Returns (ratio, 1/ratio); the degenerate 0/0 pair reports (1, 1).
std::pair<double, double> dp_ratio_check(const KahlerPotential& u0, const KahlerPotential& u1, double p);

} // namespace metric
} // namespace kflow
