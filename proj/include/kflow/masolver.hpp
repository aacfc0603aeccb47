#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace masolver {

// Solve 1 + D2 u = rho for a probability density rho, gauge int u dmu = 0.
// Exact (up to roundoff) inversion of the periodic second difference.
KahlerPotential solve_ma(const DensityMeasure& mu);

struct EpsOptions {
    int max_iters = 60;
    double residual_tol = 1e-13;      // sup-norm target for the nonlinear residual
    bool check_mass = true;           // public contract: density must have mass 1
    const KahlerPotential* initial = nullptr;
};

// Solve 1 + D2 phi = e^{eps phi} rho by damped Newton iteration; the
// exponential pins the additive constant, so no gauge is applied.
KahlerPotential solve_ma_eps(const DensityMeasure& mu, double eps, const EpsOptions& opt = {});

// Verifies that phi solves the eps-equation and psi is a discrete
// subsolution, then reports whether phi >= psi - 10 h everywhere.
bool comparison_check(const KahlerPotential& phi, const KahlerPotential& psi,
                      const DensityMeasure& mu, double eps);

struct EpsLimitRow {
    double eps = 0.0;
    double d1_raw = 0.0;       // distance with the solver's intrinsic constant
    double d2_raw = 0.0;
    double d1_centered = 0.0;  // distance after re-imposing int phi dmu = 0
    double d2_centered = 0.0;
};

// Distances of the eps-solutions to the eps = 0 solution along a decreasing
// eps schedule; both normalization conventions are reported side by side.
std::vector<EpsLimitRow> eps_limit_study(const DensityMeasure& mu, const std::vector<double>& eps_list);

struct ApproxStages {
    int eps_steps = 8;
    double eps0 = 1.0;
    std::vector<double> trunc_levels = {1.0, 2.0, 4.0, 8.0};
    int mollify_steps = 7;
    double sigma0 = 0.04;
};

struct ApproxDiag {
    int stage = 0;        // 1: eps schedule, 2: density truncation, 3: mollification
    double parameter = 0; // eps, truncation level, or kernel width
    double d1 = 0.0;
    double d2 = 0.0;
    double entropy_gap = 0.0;
};

struct ApproxResult {
    std::vector<KahlerPotential> sequence;
    std::vector<ApproxDiag> diagnostics;
};

// Three-stage smooth approximation of u with convergent relative entropy:
// (1) eps-regularized resolves of mu_u, (2) re-solves with the density
// capped at e^k, (3) re-solves with the density mollified toward grid scale.
ApproxResult approximate_with_entropy(const KahlerPotential& u, const std::vector<double>& f_ref,
                                      const ApproxStages& stages = {});

} // namespace masolver
} // namespace kflow
