#pragma once

#include <string>
#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace cat0 {

struct PotentialSequence {
    std::vector<KahlerPotential> items;
    std::string metadata; // generation rule tag

    PotentialSequence() = default;
    PotentialSequence(std::vector<KahlerPotential> xs, std::string tag);
};

// Four-point comparison value
//   d2(p,s)^2 - [l d2(p,r)^2 + (1-l) d2(p,q)^2 - l(1-l) d2(q,r)^2]
// with s the point at parameter l on the segment from q to r. Nonpositive in
// a nonpositively curved space; the flat dual chart gives ~0 exactly.
double cat0_comparison_check(const KahlerPotential& p, const KahlerPotential& q,
                             const KahlerPotential& r, double lambda);

struct AsymptoticCenter {
    KahlerPotential center;
    double radius = 0.0;
};

// Minimizer of x -> max over the tail window of d2(x, x_k); the finite-data
// surrogate of the limsup center. tail_window <= 0 selects the last half.
AsymptoticCenter asymptotic_center(const PotentialSequence& seq, int tail_window = 0,
                                   double unbounded_threshold = 1e3);

// True when the asymptotic centers of n_subseq deterministic subsequences
// (strided and tail-shifted) all lie within weak_tol of the candidate.
bool weak_d2_limit_check(const PotentialSequence& seq, const KahlerPotential& candidate,
                         int n_subseq = 5, double weak_tol = 1e-3);

// d1-ball around `center` of radius rho: geodesic between two members stays
// inside up to 10 h.
bool d1_ball_convexity_check(const KahlerPotential& center, double rho, const KahlerPotential& v0,
                             const KahlerPotential& v1, const std::vector<double>& t_samples);

struct Thm53Report {
    bool d1_converges = false;
    bool l1_converges = false;
    bool weak_converges = false;
    bool biconditional_holds = false;
    double d1_tail = 0.0;
    double l1_tail = 0.0;
};

// Evaluates d1-convergence against the conjunction of L1 and weak d2
// convergence on the given finite data.
Thm53Report thm53_check(const PotentialSequence& seq, const KahlerPotential& u, double conv_tol = 1e-3);

} // namespace cat0
} // namespace kflow
