#include "kflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "kflow/energy.hpp"
#include "kflow/geometry.hpp"
#include "kflow/metric.hpp"

namespace kflow {
namespace flow {
namespace {

using Vec = std::vector<double>;

double sup_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Circulant stencil applications (linear parts of the quasi-periodic
// difference operators; the affine ghost corrections are constants and do
// not enter adjoints).
Vec apply_c(const PeriodicGrid& g, const Vec& v) { return second_difference_periodic(g, v); }

Vec apply_g_adj(const PeriodicGrid& g, const Vec& v) {
    const int n = g.n_points;
    const double i2h = 1.0 / (2.0 * g.spacing);
    Vec out(n);
    for (int i = 0; i < n; ++i)
        out[i] = (v[(i + n - 1) % n] - v[(i + 1) % n]) * i2h;
    return out;
}

// Dual-chart twisted K-energy and its exact discrete gradient. The value
// matches energy::twisted_kenergy_symplectic, which the trajectory records.
struct DualEnergy {
    const PeriodicGrid grid;
    const std::optional<TwistData>* chi;
    energy::PeriodicInterpolant bi, fi;
    double s_bar = 0.0;
    bool twisted = false;

    DualEnergy(const PeriodicGrid& g, const std::optional<TwistData>& c) : grid(g), chi(&c) {
        if (c && !c->is_zero()) {
            twisted = true;
            bi = energy::PeriodicInterpolant(c->grid, c->beta_density);
            fi = energy::PeriodicInterpolant(c->grid, c->f_values);
            s_bar = c->s_bar_chi();
        }
    }

    double value(const SymplecticPotential& g) const {
        if (!twisted) return energy::entropy_symplectic(g);
        return energy::twisted_kenergy_symplectic(g, **chi);
    }

    // dK/dg_j including the quadrature weight h.
    Vec gradient(const SymplecticPotential& g) const {
        const int n = grid.n_points;
        const double h = grid.spacing;
        const auto rho = second_difference_quasi(grid, g.values);
        Vec y(n);
        for (int i = 0; i < n; ++i) y[i] = 1.0 / rho[i];
        Vec grad = apply_c(grid, y);
        for (double& v : grad) v = -v; // entropy part: -C (1/rho)

        if (twisted) {
            const auto s = first_difference_quasi(grid, g.values);
            Vec vs(n), vg(n), vr(n);
            for (int i = 0; i < n; ++i) {
                const double q = grid.node(i);
                const double b = bi.value(s[i]);
                const double bp = bi.derivative(s[i]);
                const double a = q * s[i] - g.values[i] - 0.5 * s[i] * s[i];
                vs[i] = fi.derivative(s[i]) + (q - s[i]) * b * rho[i] + a * bp * rho[i];
                vg[i] = -b * rho[i] - s_bar; // AM term contributes -s_bar * h per node
                vr[i] = a * b;
            }
            const auto gs = apply_g_adj(grid, vs);
            const auto cr = apply_c(grid, vr);
            for (int i = 0; i < n; ++i) grad[i] += gs[i] + vg[i] + cr[i];
        }
        for (double& v : grad) v *= h;
        return grad;
    }

    // Sparse Hessian triplets of h^{-1} * (the gradient above); caller scales.
    void hessian(const SymplecticPotential& g, std::vector<Eigen::Triplet<double>>& trip) const {
        const int n = grid.n_points;
        const double h = grid.spacing;
        const double ih2 = 1.0 / (h * h);
        const double i2h = 1.0 / (2.0 * h);
        const auto rho = second_difference_quasi(grid, g.values);

        const double cst[3] = {ih2, -2.0 * ih2, ih2}; // offsets -1, 0, +1
        const double gst[2] = {-i2h, i2h};            // offsets -1, +1
        auto idx = [n](int i) { return ((i % n) + n) % n; };

        // entropy: C diag(1/rho^2) C
        for (int i = 0; i < n; ++i) {
            const double d = 1.0 / (rho[i] * rho[i]);
            for (int a = -1; a <= 1; ++a)
                for (int b = -1; b <= 1; ++b)
                    trip.emplace_back(idx(i + a), idx(i + b), cst[a + 1] * d * cst[b + 1]);
        }
        if (!twisted) return;

        const auto s = first_difference_quasi(grid, g.values);
        for (int i = 0; i < n; ++i) {
            const double q = grid.node(i);
            const double b = bi.value(s[i]);
            const double bp = bi.derivative(s[i]);
            const double a = q * s[i] - g.values[i] - 0.5 * s[i] * s[i];
            const double fpp = fi.second_derivative(s[i]);
            const double a_ss = fpp + (-b + 2.0 * (q - s[i]) * bp) * rho[i];
            const double a_sg = -bp * rho[i];
            const double a_sr = (q - s[i]) * b + a * bp;
            const double a_gr = -b;

            for (int x = 0; x < 2; ++x)
                for (int y2 = 0; y2 < 2; ++y2)
                    trip.emplace_back(idx(i + (x ? 1 : -1)), idx(i + (y2 ? 1 : -1)),
                                      gst[x] * a_ss * gst[y2]);
            for (int x = 0; x < 2; ++x) {
                const int j = idx(i + (x ? 1 : -1));
                trip.emplace_back(j, i, gst[x] * a_sg);
                trip.emplace_back(i, j, gst[x] * a_sg);
                for (int b2 = -1; b2 <= 1; ++b2) {
                    trip.emplace_back(j, idx(i + b2), gst[x] * a_sr * cst[b2 + 1]);
                    trip.emplace_back(idx(i + b2), j, gst[x] * a_sr * cst[b2 + 1]);
                }
            }
            for (int b2 = -1; b2 <= 1; ++b2) {
                trip.emplace_back(i, idx(i + b2), a_gr * cst[b2 + 1]);
                trip.emplace_back(idx(i + b2), i, a_gr * cst[b2 + 1]);
            }
        }
    }
};

double min_rho(const PeriodicGrid& grid, const Vec& g) {
    const auto rho = second_difference_quasi(grid, g);
    double m = std::numeric_limits<double>::infinity();
    for (double r : rho) m = std::min(m, r);
    return m;
}

} // namespace

TwistData zero_twist(const PeriodicGrid& grid) {
    return TwistData(grid, Vec(grid.n_points, 0.0), Vec(grid.n_points, 0.0));
}

ProxResult proximal_step_dual(const SymplecticPotential& gc, double tau,
                              const std::optional<TwistData>& chi, double prox_tol) {
    if (!(tau > 0.0)) throw PreconditionViolated("proximal_step: tau must be positive");
    const PeriodicGrid grid = gc.grid;
    const int n = grid.n_points;
    const double h = grid.spacing;
    DualEnergy en(grid, chi);

    auto objective = [&](const SymplecticPotential& g) {
        double quad = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = g.values[i] - gc.values[i];
            quad += d * d;
        }
        const double e = en.value(g);
        if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
        return 0.5 * quad * h + tau * e;
    };

    SymplecticPotential g = gc;
    double fval = objective(g);
    ProxResult out{g, 0.0, 0};

    Eigen::SparseMatrix<double> H(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(n), delta(n);

    for (int iter = 0; iter < 80; ++iter) {
        Vec grad = en.gradient(g);
        for (int i = 0; i < n; ++i) grad[i] = h * (g.values[i] - gc.values[i]) + tau * grad[i];
        const double gn = sup_norm(grad) / h; // gradient density
        out.grad_norm = gn;
        out.iterations = iter;
        if (gn <= prox_tol) break;
        if (iter == 79)
            throw NoConvergence("proximal_step: residual " + std::to_string(gn) + " after 80 iterations");

        trip.clear();
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
        const std::size_t base = trip.size();
        en.hessian(g, trip);
        for (std::size_t k = base; k < trip.size(); ++k)
            trip[k] = {trip[k].row(), trip[k].col(), tau * trip[k].value()};
        H.setFromTriplets(trip.begin(), trip.end());

        double levenberg = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::SparseMatrix<double> Hs = H;
            if (levenberg > 0.0) {
                for (int i = 0; i < n; ++i) Hs.coeffRef(i, i) += levenberg;
            }
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Hs);
            bool ok = solver.info() == Eigen::Success;
            double descent = 0.0;
            if (ok) {
                for (int i = 0; i < n; ++i) rhs[i] = -grad[i] / h;
                delta = solver.solve(rhs);
                for (int i = 0; i < n; ++i) descent += grad[i] * delta[i];
                ok = delta.allFinite() && descent < 0.0;
            }
            if (!ok) {
                levenberg = levenberg == 0.0 ? 1e-8 : levenberg * 100.0;
                continue;
            }

            // keep D2 g positive along the step
            const auto rho = second_difference_quasi(grid, g.values);
            Vec dv(delta.data(), delta.data() + n);
            const auto crho = apply_c(grid, dv);
            double alpha = 1.0;
            for (int i = 0; i < n; ++i)
                if (crho[i] < 0.0) alpha = std::min(alpha, -0.995 * rho[i] / crho[i]);

            bool accepted = false;
            SymplecticPotential trial = g;
            for (int ls = 0; ls < 50; ++ls) {
                for (int i = 0; i < n; ++i) trial.values[i] = g.values[i] + alpha * delta[i];
                const double ft = objective(trial);
                if (ft <= fval + 1e-4 * alpha * descent) {
                    g = trial;
                    fval = ft;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (accepted) break;
            levenberg = levenberg == 0.0 ? 1e-8 : levenberg * 100.0;
            if (attempt == 7)
                throw NoConvergence("proximal_step: line search failed at residual " +
                                    std::to_string(gn));
        }
    }
    out.g = std::move(g);
    return out;
}

KahlerPotential proximal_step(const KahlerPotential& c, double tau,
                              const std::optional<TwistData>& chi, double prox_tol) {
    auto r = proximal_step_dual(geometry::legendre(c), tau, chi, prox_tol);
    return geometry::inverse_legendre(r.g);
}

void Trajectory::validate(double prox_tol, double am_tol) const {
    for (std::size_t k = 1; k < energies.size(); ++k)
        if (energies[k] > energies[k - 1] + prox_tol)
            throw PreconditionViolated("Trajectory: energy increased at step " + std::to_string(k));
    for (std::size_t k = 0; k < am_values.size(); ++k)
        if (std::abs(am_values[k] - am_values[0]) > am_tol)
            throw PreconditionViolated("Trajectory: monotone energy drifted at step " +
                                       std::to_string(k));
}

namespace {

Trajectory run_flow_impl(const KahlerPotential& c0, const FlowConfig& config, bool do_halving) {
    validate_psh(c0);
    const PeriodicGrid grid = c0.grid;
    Trajectory traj;
    traj.tau = config.tau;
    traj.twist = config.twist;

    auto g = geometry::legendre(c0);
    // A start on the boundary of the admissible cone (vanishing density) has
    // infinite entropy; one tiny proximal step projects into the finite set.
    if (min_rho(grid, g.values) <= 0.0)
        g = proximal_step_dual(g, 1e-8, config.twist, config.prox_tol).g;

    auto record = [&](double t, const SymplecticPotential& gs, double gn) {
        traj.times.push_back(t);
        traj.duals.push_back(gs);
        auto u = geometry::inverse_legendre(gs);
        traj.energies.push_back(config.twist && !config.twist->is_zero()
                                    ? energy::twisted_kenergy_symplectic(gs, *config.twist)
                                    : energy::entropy_symplectic(gs));
        traj.am_values.push_back(energy::am(u));
        traj.entropies.push_back(config.twist ? energy::entropy(config.twist->f_values, u)
                                              : energy::entropy(Vec(grid.n_points, 0.0), u));
        if (!traj.duals.empty() && traj.duals.size() >= 2) {
            const auto& prev = traj.duals[traj.duals.size() - 2];
            traj.step_distances.push_back(metric::dp_symplectic(prev, gs, 2.0));
        }
        traj.d2_from_start.push_back(metric::dp_symplectic(traj.duals.front(), gs, 2.0));
        traj.grad_norms.push_back(gn);
        traj.potentials.push_back(std::move(u));
    };

    record(0.0, g, 0.0);
    for (int k = 0; k < config.n_steps; ++k) {
        auto r = proximal_step_dual(g, config.tau, config.twist, config.prox_tol);
        g = std::move(r.g);
        record((k + 1) * config.tau, g, r.grad_norm);
    }

    if (do_halving && config.halving_checks > 0) {
        for (int lvl = 1; lvl <= config.halving_checks; ++lvl) {
            FlowConfig fine = config;
            fine.tau = config.tau / std::pow(2.0, lvl);
            fine.n_steps = config.n_steps << lvl;
            fine.halving_checks = 0;
            Trajectory ft = run_flow_impl(c0, fine, false);
            double drift = 0.0;
            const long stride = 1L << lvl;
            for (std::size_t k = 0; k < traj.duals.size(); ++k) {
                const std::size_t j = k * stride;
                if (j >= ft.duals.size()) break;
                drift = std::max(drift, metric::dp_symplectic(traj.duals[k], ft.duals[j], 2.0));
            }
            traj.halving_drifts.push_back(drift);
        }
    }
    return traj;
}

} // namespace

Trajectory run_flow(const KahlerPotential& c0, const FlowConfig& config) {
    Trajectory traj = run_flow_impl(c0, config, true);
    traj.validate(std::max(config.prox_tol, 1e-10));
    return traj;
}

double evi_check(const Trajectory& traj, const KahlerPotential& v) {
    if (traj.duals.size() < 2) return 0.0;
    const auto gv = geometry::legendre(v);
    DualEnergy en(gv.grid, traj.twist);
    const double kv = en.value(gv);
    if (!std::isfinite(kv)) throw PreconditionViolated("evi_check: test point has infinite energy");

    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < traj.duals.size(); ++k) {
        const double da = metric::dp_symplectic(traj.duals[k], gv, 2.0);
        const double db = metric::dp_symplectic(traj.duals[k + 1], gv, 2.0);
        const double lhs = 0.5 * (db * db - da * da) / traj.tau;
        const double rhs = kv - en.value(traj.duals[k + 1]);
        worst = std::max(worst, lhs - rhs);
    }
    return worst;
}

double contractivity_check(const Trajectory& a, const Trajectory& b) {
    if (a.duals.size() != b.duals.size() || a.tau != b.tau)
        throw PreconditionViolated("contractivity_check: trajectories not aligned");
    const double d0 = metric::dp_symplectic(a.duals[0], b.duals[0], 2.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.duals.size(); ++k)
        worst = std::max(worst, metric::dp_symplectic(a.duals[k], b.duals[k], 2.0) - d0);
    return worst;
}

Classification dichotomy_classify(const Trajectory& traj) {
    const std::size_t N = traj.duals.size();
    if (N < 4) throw PreconditionViolated("dichotomy_classify: trajectory too short");
    Classification out;
    out.entropy_series = traj.entropies;
    out.final_grad_norm = traj.grad_norms.back();
    out.distance_growth = traj.d2_from_start.back();

    // declared threshold: ten times a proxy for the start's level-set size
    const auto& grid = traj.potentials.front().grid;
    std::vector<double> flat(grid.n_points);
    const double a0 = traj.am_values.front();
    for (int i = 0; i < grid.n_points; ++i) {
        const double p = grid.node(i);
        flat[i] = 0.5 * p * p - a0;
    }
    const double level_proxy =
        2.0 * metric::dp_symplectic(traj.duals.front(), SymplecticPotential(grid, flat), 2.0) + 1e-3;
    out.divergence_threshold = 10.0 * level_proxy;

    const std::size_t q = std::max<std::size_t>(2, N / 4);
    bool growing = true;
    for (std::size_t k = N - q; k + 1 < N; ++k)
        if (traj.d2_from_start[k + 1] <= traj.d2_from_start[k] + 1e-12) growing = false;
    if (out.distance_growth >= out.divergence_threshold && growing) {
        out.kind = FlowKind::Diverging;
        out.limit = traj.potentials.back();
        return out;
    }

    double tail_step = 0.0;
    for (std::size_t k = traj.step_distances.size() - std::min(traj.step_distances.size(), q);
         k < traj.step_distances.size(); ++k)
        tail_step = std::max(tail_step, traj.step_distances[k]);
    const double settled =
        std::abs(traj.d2_from_start[N - 1] - traj.d2_from_start[N - 1 - q]);
    if (tail_step <= 1e-6 && settled <= 1e-5 * (1.0 + traj.d2_from_start.back())) {
        out.kind = FlowKind::Converged;
        out.limit = traj.potentials.back();
        double gap = 0.0;
        for (std::size_t k = N - q; k < N; ++k)
            gap = std::max(gap, metric::dp_symplectic(traj.duals[k], traj.duals.back(), 1.0));
        out.d1_gap = gap;
        return out;
    }
    out.kind = FlowKind::Inconclusive;
    out.limit = traj.potentials.back();
    return out;
}

RayReport asymptotic_ray(const Trajectory& traj, double ell_max, int n_times,
                         bool override_divergence_check) {
    if (!override_divergence_check) {
        const auto cls = dichotomy_classify(traj);
        if (cls.kind != FlowKind::Diverging)
            throw NotDiverging("asymptotic_ray: trajectory is not diverging");
    }
    const std::size_t N = traj.duals.size();
    const auto& g0 = traj.duals.front();
    const auto& grid = g0.grid;
    DualEnergy en(grid, traj.twist);

    // geometrically spaced probe indices ending at the last snapshot
    std::vector<std::size_t> probes;
    for (int j = n_times - 1; j >= 0; --j) {
        const std::size_t k = std::max<std::size_t>(1, (N - 1) >> j);
        if (probes.empty() || k != probes.back()) probes.push_back(k);
    }
    if (probes.size() < 2) throw PreconditionViolated("asymptotic_ray: need at least two probe times");

    const int n_ell = 9;
    RayReport rep;
    rep.arclengths.resize(n_ell);
    std::vector<std::vector<SymplecticPotential>> samples(n_ell);
    for (int e = 0; e < n_ell; ++e) rep.arclengths[e] = ell_max * (e + 1) / double(n_ell);

    for (std::size_t k : probes) {
        const auto& gk = traj.duals[k];
        const double dist = metric::dp_symplectic(g0, gk, 2.0);
        if (dist <= 0.0) continue;
        for (int e = 0; e < n_ell; ++e) {
            const double ell = std::min(rep.arclengths[e], dist);
            std::vector<double> gl(g0.values.size());
            const double w = ell / dist;
            for (std::size_t i = 0; i < gl.size(); ++i)
                gl[i] = g0.values[i] + w * (gk.values[i] - g0.values[i]);
            samples[e].emplace_back(grid, std::move(gl));
        }
    }

    rep.all_stable = true;
    for (int e = 0; e < n_ell; ++e) {
        double inst = 0.0;
        for (std::size_t j = 0; j + 1 < samples[e].size(); ++j)
            inst = std::max(inst, metric::dp_symplectic(samples[e][j], samples[e][j + 1], 1.0));
        rep.instability.push_back(inst);
        const bool ok = inst <= 10.0 * grid.spacing;
        rep.stable.push_back(ok);
        rep.all_stable = rep.all_stable && ok;
        rep.limit_samples.push_back(geometry::inverse_legendre(samples[e].back()));
        rep.kchi_profile.push_back(en.value(samples[e].back()));
    }
    return rep;
}

Trajectory smooth_flow_reference(const KahlerPotential& c0, double tau_e, long n_steps,
                                 const std::optional<TwistData>& chi, long record_stride) {
    validate_psh(c0);
    const auto mu0 = geometry::ma_measure(c0);
    for (double r : mu0.density)
        if (r < tol::rho_min)
            throw DegenerateMetric("smooth_flow_reference: initial density below floor");

    const PeriodicGrid grid = c0.grid;
    const double h = grid.spacing;
    DualEnergy en(grid, chi);
    auto g = geometry::legendre(c0);

    Trajectory traj;
    traj.tau = tau_e * record_stride;
    traj.twist = chi;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.duals.push_back(g);
        auto u = geometry::inverse_legendre(g);
        traj.energies.push_back(en.value(g));
        traj.am_values.push_back(energy::am(u));
        traj.entropies.push_back(energy::entropy(
            chi ? chi->f_values : Vec(grid.n_points, 0.0), u));
        traj.d2_from_start.push_back(metric::dp_symplectic(traj.duals.front(), g, 2.0));
        traj.grad_norms.push_back(0.0);
        if (traj.duals.size() >= 2)
            traj.step_distances.push_back(metric::dp_symplectic(
                traj.duals[traj.duals.size() - 2], g, 2.0));
        traj.potentials.push_back(std::move(u));
    };

    record(0.0);
    for (long k = 1; k <= n_steps; ++k) {
        const auto grad = en.gradient(g); // includes the h weight
        for (int i = 0; i < grid.n_points; ++i) g.values[i] -= tau_e * grad[i] / h;
        if (min_rho(grid, g.values) < 1e-2 * tol::rho_min)
            throw Blowup("smooth_flow_reference: density floor violated at step " + std::to_string(k));
        if (k % record_stride == 0) record(k * tau_e);
    }
    return traj;
}

UniquenessReport minimizer_uniqueness_check(const TwistData& chi,
                                            const std::vector<KahlerPotential>& starts,
                                            const FlowConfig& base_config) {
    if (!chi.strict_flag)
        throw PreconditionViolated("minimizer_uniqueness_check: twist must be strictly positive");
    if (starts.size() < 2) throw PreconditionViolated("minimizer_uniqueness_check: need >= 2 starts");
    const double a0 = energy::am(starts.front());
    for (const auto& s : starts)
        if (std::abs(energy::am(s) - a0) > 1e-8)
            throw PreconditionViolated("minimizer_uniqueness_check: starts have different monotone energy");

    FlowConfig cfg = base_config;
    cfg.twist = chi;
    UniquenessReport rep;
    std::vector<KahlerPotential> limits;
    for (const auto& s : starts) {
        auto traj = run_flow(s, cfg);
        const auto cls = dichotomy_classify(traj);
        if (cls.kind != FlowKind::Converged) return rep; // inconclusive
        limits.push_back(cls.limit);
    }
    rep.conclusive = true;
    rep.max_gap = 0.0;
    for (std::size_t i = 1; i < limits.size(); ++i) {
        double gap = 0.0;
        for (int j = 0; j < limits[0].grid.n_points; ++j)
            gap = std::max(gap, std::abs(limits[i].values[j] - limits[0].values[j]));
        rep.max_gap = std::max(rep.max_gap, gap);
    }
    rep.agree = rep.max_gap <= 1e-3;
    return rep;
}

} // namespace flow
} // namespace kflow
