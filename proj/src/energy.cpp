#include "kflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/geometry.hpp"

namespace kflow {
namespace energy {

double am(const KahlerPotential& u) {
    const auto mu = geometry::ma_measure(u);
    double s = 0.0;
    for (int i = 0; i < u.grid.n_points; ++i) s += u.values[i] * (1.0 + mu.density[i]);
    return 0.5 * s * u.grid.spacing;
}

double am_gamma(const KahlerPotential& u, const std::vector<double>& gamma_density) {
    validate_psh(u);
    if (gamma_density.size() != u.values.size())
        throw PreconditionViolated("am_gamma: density size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < gamma_density.size(); ++i) s += u.values[i] * gamma_density[i];
    return s * u.grid.spacing;
}

double am_chi(const KahlerPotential& u, const TwistData& chi) {
    require_same_grid(u.grid, chi.grid, "am_chi");
    const auto mu = geometry::ma_measure(u);
    double s = am_gamma(u, chi.beta_density);
    for (int i = 0; i < u.grid.n_points; ++i) s += chi.f_values[i] * (mu.density[i] - 1.0) * u.grid.spacing;
    return s;
}

double entropy(const std::vector<double>& f_ref, const KahlerPotential& u) {
    if (f_ref.size() != u.values.size()) throw PreconditionViolated("entropy: f_ref size mismatch");
    const auto mu = geometry::ma_measure(u);
    double s = 0.0;
    for (int i = 0; i < u.grid.n_points; ++i) {
        const double rho = mu.density[i];
        if (rho <= 0.0) continue; // 0 log 0 = 0
        if (!std::isfinite(f_ref[i]) || std::exp(-f_ref[i]) <= 0.0)
            return std::numeric_limits<double>::infinity(); // mu_u not subordinate
        s += rho * (std::log(std::max(rho, tol::rho_floor)) + f_ref[i]);
    }
    return s * u.grid.spacing;
}

double kenergy(const KahlerPotential& u) {
    // Flat background: mean scalar curvature and Ricci term both vanish, but
    // the three-term shape is kept.
    const double s_bar = 0.0;
    const std::vector<double> ricci_density(u.values.size(), 0.0);
    const std::vector<double> f0(u.values.size(), 0.0);
    return entropy(f0, u) + s_bar * am(u) - am_gamma(u, ricci_density);
}

double twisted_kenergy(const KahlerPotential& u, const TwistData& chi) {
    require_same_grid(u.grid, chi.grid, "twisted_kenergy");
    const double ent = entropy(chi.f_values, u);
    if (!std::isfinite(ent)) return ent;
    return ent + chi.s_bar_chi() * am(u) + am_gamma(u, chi.beta_density) -
           integrate(u.grid, chi.f_values);
}

double twisted_kenergy_alt(const KahlerPotential& u, const TwistData& chi) {
    require_same_grid(u.grid, chi.grid, "twisted_kenergy_alt");
    const std::vector<double> f0(u.values.size(), 0.0);
    return entropy(f0, u) + chi.s_bar_chi() * am(u) + am_chi(u, chi);
}

std::vector<double> kenergy_gradient(const KahlerPotential& u, const TwistData& chi) {
    require_same_grid(u.grid, chi.grid, "kenergy_gradient");
    const auto mu = geometry::ma_measure(u);
    const int n = u.grid.n_points;
    for (int i = 0; i < n; ++i)
        if (mu.density[i] < tol::rho_min)
            throw DegenerateMetric("kenergy_gradient: density " + std::to_string(mu.density[i]) +
                                   " below floor at node " + std::to_string(i));
    std::vector<double> log_rho(n);
    for (int i = 0; i < n; ++i) log_rho[i] = std::log(mu.density[i]);
    const auto d2log = second_difference_periodic(u.grid, log_rho);
    const auto d2f = second_difference_periodic(u.grid, chi.f_values);
    const double s_bar = chi.s_bar_chi();
    std::vector<double> grad(n);
    for (int i = 0; i < n; ++i) {
        const double scal = -d2log[i] / mu.density[i];
        const double trace = (chi.beta_density[i] + d2f[i]) / mu.density[i];
        grad[i] = s_bar - scal + trace;
    }
    return grad;
}

// ---- symplectic-chart evaluators -------------------------------------

double am_symplectic(const SymplecticPotential& g) {
    return 1.0 / 6.0 - integrate(g.grid, g.values);
}

double entropy_symplectic(const SymplecticPotential& g) {
    const auto d2 = second_difference_quasi(g.grid, g.values);
    double s = 0.0;
    for (double r : d2) {
        if (r <= 0.0) return std::numeric_limits<double>::infinity();
        s -= std::log(r);
    }
    return s * g.grid.spacing;
}

double mean_symplectic(const SymplecticPotential& g) {
    // int u dx = int (q g' - g) g'' dq - 1/6
    const auto d1 = first_difference_quasi(g.grid, g.values);
    const auto d2 = second_difference_quasi(g.grid, g.values);
    double s = 0.0;
    for (int i = 0; i < g.grid.n_points; ++i) {
        const double q = g.grid.node(i);
        s += (q * d1[i] - g.values[i]) * d2[i];
    }
    return s * g.grid.spacing - 1.0 / 6.0;
}

double twisted_kenergy_symplectic(const SymplecticPotential& g, const TwistData& chi) {
    require_same_grid(g.grid, chi.grid, "twisted_kenergy_symplectic");
    const int n = g.grid.n_points;
    const double h = g.grid.spacing;
    const auto d1 = first_difference_quasi(g.grid, g.values);
    const auto d2 = second_difference_quasi(g.grid, g.values);

    double ent = 0.0;
    for (double r : d2) {
        if (r <= 0.0) return std::numeric_limits<double>::infinity();
        ent -= std::log(r);
    }
    ent *= h;

    if (chi.is_zero()) return ent;

    const PeriodicInterpolant fi(chi.grid, chi.f_values);
    const PeriodicInterpolant bi(chi.grid, chi.beta_density);
    double f_at_image = 0.0;  // int f(g') dq
    double am_beta = 0.0;     // int u b dx pulled back through x = g'
    for (int i = 0; i < n; ++i) {
        const double q = g.grid.node(i);
        const double s = d1[i];
        f_at_image += fi.value(s);
        am_beta += (q * s - g.values[i] - 0.5 * s * s) * bi.value(s) * d2[i];
    }
    f_at_image *= h;
    am_beta *= h;

    return ent + f_at_image + chi.s_bar_chi() * am_symplectic(g) + am_beta -
           integrate(chi.grid, chi.f_values);
}

PeriodicInterpolant::PeriodicInterpolant(const PeriodicGrid& g, const std::vector<double>& samples)
    : n_(g.n_points), h_(g.spacing), y_(samples) {
    slope_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        const double ym = y_[(i + n_ - 1) % n_];
        const double yp = y_[(i + 1) % n_];
        slope_[i] = (yp - ym) / (2.0 * h_);
    }
}

double PeriodicInterpolant::value(double x) const {
    double t = x - std::floor(x); // wrap to [0,1)
    const double s = t / h_;
    int i = int(std::floor(s));
    if (i >= n_) i = n_ - 1;
    const double r = s - i; // local coordinate in [0,1]
    const int j = (i + 1) % n_;
    const double y0 = y_[i], y1 = y_[j];
    const double m0 = slope_[i] * h_, m1 = slope_[j] * h_;
    const double r2 = r * r, r3 = r2 * r;
    return (2 * r3 - 3 * r2 + 1) * y0 + (r3 - 2 * r2 + r) * m0 + (-2 * r3 + 3 * r2) * y1 +
           (r3 - r2) * m1;
}

double PeriodicInterpolant::derivative(double x) const {
    double t = x - std::floor(x);
    const double s = t / h_;
    int i = int(std::floor(s));
    if (i >= n_) i = n_ - 1;
    const double r = s - i;
    const int j = (i + 1) % n_;
    const double y0 = y_[i], y1 = y_[j];
    const double m0 = slope_[i] * h_, m1 = slope_[j] * h_;
    const double r2 = r * r;
    const double d = (6 * r2 - 6 * r) * y0 + (3 * r2 - 4 * r + 1) * m0 + (-6 * r2 + 6 * r) * y1 +
                     (3 * r2 - 2 * r) * m1;
    return d / h_;
}

double PeriodicInterpolant::second_derivative(double x) const {
    double t = x - std::floor(x);
    const double s = t / h_;
    int i = int(std::floor(s));
    if (i >= n_) i = n_ - 1;
    const double r = s - i;
    const int j = (i + 1) % n_;
    const double y0 = y_[i], y1 = y_[j];
    const double m0 = slope_[i] * h_, m1 = slope_[j] * h_;
    const double d = (12 * r - 6) * y0 + (6 * r - 4) * m0 + (-12 * r + 6) * y1 + (6 * r - 2) * m1;
    return d / (h_ * h_);
}

} // namespace energy
} // namespace kflow
