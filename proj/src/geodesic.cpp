#include "kflow/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/energy.hpp"
#include "kflow/geometry.hpp"
#include "kflow/metric.hpp"
#include "kflow/spline.hpp"

namespace kflow {
namespace geodesic {

GeodesicSegment::GeodesicSegment(SymplecticPotential g0, SymplecticPotential g1)
    : g0_(std::move(g0)), g1_(std::move(g1)) {
    require_same_grid(g0_.grid, g1_.grid, "GeodesicSegment");
    validate_convex(g0_);
    validate_convex(g1_);
    ext0_ = geometry::extend_quasi(g0_.grid, g0_.values);
    ext1_ = geometry::extend_quasi(g1_.grid, g1_.values);
    m0_ = spline::curvatures(ext0_, g0_.grid.spacing);
    m1_ = spline::curvatures(ext1_, g1_.grid.spacing);
}

SymplecticPotential GeodesicSegment::symplectic_at(double t) const {
    std::vector<double> g(g0_.values.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = (1.0 - t) * g0_.values[i] + t * g1_.values[i];
    return SymplecticPotential(g0_.grid, std::move(g));
}

KahlerPotential GeodesicSegment::sample(double t) const {
    return geometry::inverse_legendre(symplectic_at(t));
}

double GeodesicSegment::smooth_value(double t, double x) const {
    const int n = g0_.grid.n_points;
    const double h = g0_.grid.spacing;
    const int total = 3 * n;
    std::vector<double> y(total), m(total);
    for (int j = 0; j < total; ++j) {
        y[j] = (1.0 - t) * ext0_[j] + t * ext1_[j];
        m[j] = (1.0 - t) * m0_[j] + t * m1_[j];
    }
    int j = std::clamp(int((x + 1.0) / h), 1, total - 3);
    while (j > 1 && spline::derivative_at_node(y, m, h, j) > x) --j;
    while (j + 3 < total && spline::derivative_at_node(y, m, h, j + 1) < x) ++j;
    const double r = spline::invert_derivative(y, m, h, j, x);
    const double p = (j - n + r) * h;
    return x * p - spline::value(y, m, h, j, r) - 0.5 * x * x;
}

GeodesicSegment geodesic(const KahlerPotential& u0, const KahlerPotential& u1) {
    require_same_grid(u0.grid, u1.grid, "geodesic");
    return GeodesicSegment(geometry::legendre(u0), geometry::legendre(u1));
}

double hcma_residual(const GeodesicSegment& seg, int n_t) {
    if (n_t < 8) throw PreconditionViolated("hcma_residual: n_t must be >= 8");
    const int n = seg.grid().n_points;
    const double h = seg.grid().spacing;
    const double dt = 1.0 / n_t;

    std::vector<std::vector<double>> phi(n_t + 1, std::vector<double>(n));
    for (int k = 0; k <= n_t; ++k) {
        const double t = k * dt;
        for (int i = 0; i < n; ++i) phi[k][i] = seg.smooth_value(t, i * h);
    }

    double worst = 0.0;
    for (int k = 1; k < n_t; ++k) {
        for (int i = 0; i < n; ++i) {
            const int im = (i + n - 1) % n, ip = (i + 1) % n;
            const double ptt = (phi[k + 1][i] - 2.0 * phi[k][i] + phi[k - 1][i]) / (dt * dt);
            const double pxx = (phi[k][ip] - 2.0 * phi[k][i] + phi[k][im]) / (h * h);
            const double ptx =
                (phi[k + 1][ip] - phi[k + 1][im] - phi[k - 1][ip] + phi[k - 1][im]) / (4.0 * dt * h);
            worst = std::max(worst, std::abs((1.0 + pxx) * ptt - ptx * ptx));
        }
    }
    return worst;
}

bool maximum_principle_check(const GeodesicSegment& a, const GeodesicSegment& b,
                             const std::vector<double>& t_samples) {
    require_same_grid(a.grid(), b.grid(), "maximum_principle_check");
    const auto u0a = a.sample(0.0), u0b = b.sample(0.0);
    const auto u1a = a.sample(1.0), u1b = b.sample(1.0);
    const double slack = 10.0 * a.grid().spacing;
    for (int i = 0; i < a.grid().n_points; ++i) {
        if (u0a.values[i] > u0b.values[i] + slack || u1a.values[i] > u1b.values[i] + slack)
            throw PreconditionViolated("maximum_principle_check: endpoints not ordered at node " +
                                       std::to_string(i));
    }
    for (double t : t_samples) {
        const auto ua = a.sample(t), ub = b.sample(t);
        for (int i = 0; i < a.grid().n_points; ++i)
            if (ua.values[i] > ub.values[i] + slack) return false;
    }
    return true;
}

SlopeIdentity am_slope_identity(const GeodesicSegment& seg, double t, int n_t) {
    if (!(t > 0.0 && t < 1.0)) throw PreconditionViolated("am_slope_identity: t must be interior");
    const int n = seg.grid().n_points;
    const double h = seg.grid().spacing;
    const double dt = 1.0 / n_t;

    std::vector<double> ut(n), um(n), up(n);
    for (int i = 0; i < n; ++i) {
        const double x = i * h;
        ut[i] = seg.smooth_value(t, x);
        um[i] = seg.smooth_value(t - dt, x);
        up[i] = seg.smooth_value(t + dt, x);
    }
    const auto d2 = second_difference_periodic(seg.grid(), ut);

    SlopeIdentity out;
    for (int i = 0; i < n; ++i) {
        const double rho = std::max(0.0, 1.0 + d2[i]);
        out.left_slope += (ut[i] - um[i]) / dt * rho;
        out.right_slope += (up[i] - ut[i]) / dt * rho;
    }
    out.left_slope *= h;
    out.right_slope *= h;
    out.endpoint_difference =
        energy::am_symplectic(seg.right()) - energy::am_symplectic(seg.left());
    return out;
}

namespace {

// Contracted energy against a fixed nonnegative density, with u_t evaluated
// by the discrete supremum: pointwise a max of t-affine functions, so the
// result is exactly convex in t.
double am_chi_maxroute(const GeodesicSegment& seg, double t, const std::vector<double>& chi_density) {
    const auto& grid = seg.grid();
    std::vector<double> gt(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i)
        gt[i] = (1.0 - t) * seg.left().values[i] + t * seg.right().values[i];
    const auto sup = geometry::conjugate_sup(grid, gt);
    double s = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.node(i);
        s += (sup[i] - 0.5 * x * x) * chi_density[i];
    }
    return s * grid.spacing;
}

} // namespace

double convexity_check(Functional which, const GeodesicSegment& seg,
                       const std::vector<double>& t_samples, const TwistData* chi,
                       const std::vector<double>* f_ref) {
    const PeriodicGrid& grid = seg.grid();
    std::vector<double> chi_density;
    if (which == Functional::AmChi || which == Functional::TwistedKEnergy) {
        if (!chi) throw PreconditionViolated("convexity_check: twist required for this functional");
        const auto d2f = second_difference_periodic(chi->grid, chi->f_values);
        chi_density.resize(grid.n_points);
        for (int i = 0; i < grid.n_points; ++i) chi_density[i] = chi->beta_density[i] + d2f[i];
    }
    energy::PeriodicInterpolant f_interp;
    if (which == Functional::Entropy && f_ref) f_interp = energy::PeriodicInterpolant(grid, *f_ref);

    auto eval = [&](double t) -> double {
        const auto g = seg.symplectic_at(t);
        switch (which) {
        case Functional::Am:
            return energy::am_symplectic(g);
        case Functional::KEnergy:
            return energy::entropy_symplectic(g);
        case Functional::Entropy: {
            double v = energy::entropy_symplectic(g);
            if (f_ref) {
                const auto d1 = first_difference_quasi(grid, g.values);
                double s = 0.0;
                for (int i = 0; i < grid.n_points; ++i) s += f_interp.value(d1[i]);
                v += s * grid.spacing;
            }
            return v;
        }
        case Functional::AmChi:
            return am_chi_maxroute(seg, t, chi_density);
        case Functional::TwistedKEnergy:
            return energy::entropy_symplectic(g) + chi->s_bar_chi() * energy::am_symplectic(g) +
                   am_chi_maxroute(seg, t, chi_density);
        }
        return 0.0;
    };

    double worst = (which == Functional::Am) ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < t_samples.size(); ++k) {
        const double tm = t_samples[k - 1], t0 = t_samples[k], tp = t_samples[k + 1];
        const double mid = eval(t0);
        // interpolate the chord value at t0 for possibly non-uniform samples
        const double lam = (t0 - tm) / (tp - tm);
        const double chord = (1.0 - lam) * eval(tm) + lam * eval(tp);
        const double viol = mid - chord;
        worst = (which == Functional::Am) ? std::max(worst, std::abs(viol)) : std::max(worst, viol);
    }
    return worst;
}

} // namespace geodesic
} // namespace kflow
