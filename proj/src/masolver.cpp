#include "kflow/masolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "kflow/energy.hpp"
#include "kflow/geometry.hpp"
#include "kflow/metric.hpp"

namespace kflow {
namespace masolver {
namespace {

double dot_h(const PeriodicGrid& g, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * g.spacing;
}

std::vector<double> residual_eps(const PeriodicGrid& grid, const std::vector<double>& phi,
                                 const std::vector<double>& rho, double eps) {
    const auto d2 = second_difference_periodic(grid, phi);
    std::vector<double> r(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        r[i] = d2[i] + 1.0 - std::exp(eps * phi[i]) * rho[i];
    return r;
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

KahlerPotential solve_ma(const DensityMeasure& mu) {
    const double defect = mu.mass() - 1.0;
    if (std::abs(defect) > tol::mass)
        throw MassMismatch("solve_ma: density mass is " + std::to_string(mu.mass()));
    const int n = mu.grid.n_points;
    const double h = mu.grid.spacing;

    // rhs = rho - 1, mean projected out so the cyclic system is compatible
    std::vector<double> r(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += mu.density[i] - 1.0;
    mean /= n;
    for (int i = 0; i < n; ++i) r[i] = mu.density[i] - 1.0 - mean;

    // first differences s_i = (u_{i+1} - u_i)/h from s_i - s_{i-1} = h r_i
    std::vector<double> s(n, 0.0);
    for (int i = 1; i < n; ++i) s[i] = s[i - 1] + h * r[i];
    double smean = 0.0;
    for (double v : s) smean += v;
    smean /= n;
    for (double& v : s) v -= smean;

    std::vector<double> u(n, 0.0);
    for (int i = 1; i < n; ++i) u[i] = u[i - 1] + h * s[i - 1];

    // gauge: int u dmu = 0
    const double c = dot_h(mu.grid, u, mu.density);
    for (double& v : u) v -= c;
    return KahlerPotential(mu.grid, std::move(u));
}

KahlerPotential solve_ma_eps(const DensityMeasure& mu, double eps, const EpsOptions& opt) {
    if (!(eps > 0.0)) throw PreconditionViolated("solve_ma_eps: eps must be positive");
    if (opt.check_mass && std::abs(mu.mass() - 1.0) > tol::mass)
        throw MassMismatch("solve_ma_eps: density mass is " + std::to_string(mu.mass()));

    const int n = mu.grid.n_points;
    const double h = mu.grid.spacing;
    const double ih2 = 1.0 / (h * h);

    std::vector<double> phi(n, 0.0);
    if (opt.initial) {
        require_same_grid(mu.grid, opt.initial->grid, "solve_ma_eps initial iterate");
        phi = opt.initial->values;
    }

    Eigen::SparseMatrix<double> A(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    Eigen::VectorXd rhs(n), delta(n);

    auto res = residual_eps(mu.grid, phi, mu.density, eps);
    double rn = sup_norm(res);
    for (int iter = 0; iter < opt.max_iters; ++iter) {
        if (rn <= opt.residual_tol) break;

        // Newton system: (-D2 + eps diag(e^{eps phi} rho)) delta = res
        trip.clear();
        for (int i = 0; i < n; ++i) {
            const double w = eps * std::exp(eps * phi[i]) * mu.density[i];
            trip.emplace_back(i, i, 2.0 * ih2 + w);
            trip.emplace_back(i, (i + 1) % n, -ih2);
            trip.emplace_back(i, (i + n - 1) % n, -ih2);
        }
        A.setFromTriplets(trip.begin(), trip.end());
        for (int i = 0; i < n; ++i) rhs[i] = res[i];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
        if (solver.info() != Eigen::Success)
            throw NoConvergence("solve_ma_eps: Newton system factorization failed");
        delta = solver.solve(rhs);

        // Armijo backtracking on the residual norm
        double step = 1.0;
        std::vector<double> trial(n);
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < n; ++i) trial[i] = phi[i] + step * delta[i];
            const auto tres = residual_eps(mu.grid, trial, mu.density, eps);
            const double tn = sup_norm(tres);
            if (tn <= (1.0 - 0.25 * step) * rn || tn <= opt.residual_tol) {
                phi.swap(trial);
                res = tres;
                rn = tn;
                break;
            }
            step *= 0.5;
            if (ls == 39)
                throw NoConvergence("solve_ma_eps: line search stalled at residual " +
                                    std::to_string(rn));
        }
    }
    if (rn > std::max(opt.residual_tol, tol::solver))
        throw NoConvergence("solve_ma_eps: final residual " + std::to_string(rn));
    return KahlerPotential(mu.grid, std::move(phi));
}

bool comparison_check(const KahlerPotential& phi, const KahlerPotential& psi,
                      const DensityMeasure& mu, double eps) {
    require_same_grid(phi.grid, psi.grid, "comparison_check");
    require_same_grid(phi.grid, mu.grid, "comparison_check");
    const auto rphi = residual_eps(phi.grid, phi.values, mu.density, eps);
    if (sup_norm(rphi) > 1e3 * tol::solver)
        throw PreconditionViolated("comparison_check: phi does not solve the eps-equation, residual " +
                                   std::to_string(sup_norm(rphi)));
    const auto d2psi = second_difference_periodic(psi.grid, psi.values);
    for (int i = 0; i < psi.grid.n_points; ++i) {
        const double lhs = 1.0 + d2psi[i];
        const double rhs = std::exp(eps * psi.values[i]) * mu.density[i];
        if (lhs < rhs - 1e3 * tol::solver - tol::psh(psi.grid))
            throw PreconditionViolated("comparison_check: psi is not a subsolution at node " +
                                       std::to_string(i));
    }
    const double slack = 10.0 * phi.grid.spacing;
    for (int i = 0; i < phi.grid.n_points; ++i)
        if (phi.values[i] < psi.values[i] - slack) return false;
    return true;
}

std::vector<EpsLimitRow> eps_limit_study(const DensityMeasure& mu, const std::vector<double>& eps_list) {
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1]))
            throw PreconditionViolated("eps_limit_study: eps_list must decrease");

    const auto phi0 = solve_ma(mu);
    std::vector<EpsLimitRow> table;
    const KahlerPotential* warm = nullptr;
    KahlerPotential prev;
    for (double eps : eps_list) {
        EpsOptions opt;
        opt.initial = warm;
        auto phi = solve_ma_eps(mu, eps, opt);
        EpsLimitRow row;
        row.eps = eps;
        row.d1_raw = metric::dp(phi, phi0, 1.0);
        row.d2_raw = metric::dp(phi, phi0, 2.0);
        const double c = dot_h(mu.grid, phi.values, mu.density);
        KahlerPotential centered = phi;
        for (double& v : centered.values) v -= c;
        row.d1_centered = metric::dp(centered, phi0, 1.0);
        row.d2_centered = metric::dp(centered, phi0, 2.0);
        table.push_back(row);
        prev = std::move(phi);
        warm = &prev;
    }
    return table;
}

ApproxResult approximate_with_entropy(const KahlerPotential& u, const std::vector<double>& f_ref,
                                      const ApproxStages& stages) {
    validate_psh(u);
    if (f_ref.size() != u.values.size())
        throw PreconditionViolated("approximate_with_entropy: f_ref size mismatch");

    const PeriodicGrid grid = u.grid;
    const auto mu = geometry::ma_measure(u);

    // target normalized as int u dmu_u = 0
    KahlerPotential target = u;
    const double c0 = dot_h(grid, target.values, mu.density);
    for (double& v : target.values) v -= c0;
    const double ent_target = energy::entropy(f_ref, target);

    ApproxResult out;
    KahlerPotential warm = target;
    auto record = [&](int stage, double param, KahlerPotential phi) {
        ApproxDiag d;
        d.stage = stage;
        d.parameter = param;
        d.d1 = metric::dp(phi, target, 1.0);
        d.d2 = metric::dp(phi, target, 2.0);
        d.entropy_gap = std::abs(energy::entropy(f_ref, phi) - ent_target);
        out.diagnostics.push_back(d);
        warm = phi;
        out.sequence.push_back(std::move(phi));
    };

    double eps_fin = stages.eps0;
    for (int j = 0; j < stages.eps_steps; ++j) {
        const double eps = stages.eps0 * std::pow(2.0, -double(j));
        eps_fin = eps;
        EpsOptions opt;
        opt.initial = &warm;
        record(1, eps, solve_ma_eps(mu, eps, opt));
    }

    for (double k : stages.trunc_levels) {
        std::vector<double> capped(mu.density);
        const double cap = std::exp(k);
        for (double& r : capped) r = std::min(r, cap);
        EpsOptions opt;
        opt.check_mass = false; // capping may remove mass; the exponential re-balances
        opt.initial = &warm;
        record(2, k, solve_ma_eps(DensityMeasure(grid, std::move(capped)), eps_fin, opt));
    }

    for (int l = 0; l < stages.mollify_steps; ++l) {
        const double sigma = stages.sigma0 * std::pow(2.0, -double(l));
        auto smooth = geometry::mollify_periodic(grid, mu.density, sigma);
        EpsOptions opt;
        opt.check_mass = false;
        opt.initial = &warm;
        record(3, sigma, solve_ma_eps(DensityMeasure(grid, std::move(smooth)), eps_fin, opt));
    }
    return out;
}

} // namespace masolver
} // namespace kflow
