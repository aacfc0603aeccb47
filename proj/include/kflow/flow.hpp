#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace flow {

TwistData zero_twist(const PeriodicGrid& grid);

struct FlowConfig {
    double tau = 1e-2;
    int n_steps = 100;
    std::optional<TwistData> twist; // nullopt: untwisted
    double prox_tol = 1e-10;        // sup-norm bound on the proximal gradient density
    double evi_tol = 1e-4;
    int halving_checks = 0;         // extra runs at tau/2^l comparing matched times
};

struct Trajectory {
    double tau = 0.0;
    std::optional<TwistData> twist;
    std::vector<double> times;
    std::vector<KahlerPotential> potentials;
    std::vector<SymplecticPotential> duals;   // native flow states
    std::vector<double> energies;             // K_chi, dual-chart evaluation
    std::vector<double> am_values;
    std::vector<double> entropies;
    std::vector<double> step_distances;       // d2(c_k, c_{k+1})
    std::vector<double> d2_from_start;
    std::vector<double> grad_norms;           // final proximal residual per step
    std::vector<double> halving_drifts;       // sup matched-time drift per halving level

    // Energy monotone within slack, monotone energy conserved within am_tol.
    void validate(double prox_tol, double am_tol = 1e-6) const;
};

struct ProxResult {
    SymplecticPotential g;
    double grad_norm = 0.0;
    int iterations = 0;
};

// One backward step: minimize (1/2) d2(v, c)^2 + tau K_chi(v) in the dual
// chart by damped Newton with the -log D2 g barrier.
ProxResult proximal_step_dual(const SymplecticPotential& gc, double tau,
                              const std::optional<TwistData>& chi, double prox_tol = 1e-10);
KahlerPotential proximal_step(const KahlerPotential& c, double tau,
                              const std::optional<TwistData>& chi, double prox_tol = 1e-10);

Trajectory run_flow(const KahlerPotential& c0, const FlowConfig& config);

// Max violation of the step-wise evolution variational inequality against a
// fixed comparison point.
double evi_check(const Trajectory& traj, const KahlerPotential& v);

// Max growth of d2 between paired trajectories relative to the start gap.
double contractivity_check(const Trajectory& a, const Trajectory& b);

enum class FlowKind { Converged, Diverging, Inconclusive };

struct Classification {
    FlowKind kind = FlowKind::Inconclusive;
    KahlerPotential limit;          // final iterate when Converged
    double d1_gap = 0.0;            // tail d1 spread around the limit
    double final_grad_norm = 0.0;
    std::vector<double> entropy_series;
    double divergence_threshold = 0.0;
    double distance_growth = 0.0;   // d2(c_0, c_T)
};

Classification dichotomy_classify(const Trajectory& traj);

struct RayReport {
    std::vector<double> arclengths;
    std::vector<bool> stable;                // per-arclength Cauchy flag
    std::vector<double> instability;         // max successive d1 gap per arclength
    std::vector<KahlerPotential> limit_samples; // last geodesic's samples
    std::vector<double> kchi_profile;        // K_chi along the recovered ray
    bool all_stable = false;
};

// Unit-speed geodesics from c_0 to geometrically spaced trajectory points,
// sampled at fixed arclengths; reports per-arclength Cauchy behavior.
RayReport asymptotic_ray(const Trajectory& traj, double ell_max, int n_times,
                         bool override_divergence_check = false);

// Forward-Euler integration of the smooth descent system in the dual chart,
// sharing the proximal solver's discrete force. Consistency oracle only.
Trajectory smooth_flow_reference(const KahlerPotential& c0, double tau_e, long n_steps,
                                 const std::optional<TwistData>& chi = std::nullopt,
                                 long record_stride = 1);

struct UniquenessReport {
    bool conclusive = false;
    bool agree = false;
    double max_gap = 0.0; // max-norm spread between run limits
};

// Runs the flow from each start (equal monotone energies required) and
// compares the limits.
UniquenessReport minimizer_uniqueness_check(const TwistData& chi,
                                            const std::vector<KahlerPotential>& starts,
                                            const FlowConfig& base_config);

} // namespace flow
} // namespace kflow
