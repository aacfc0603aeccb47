#include "kflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/spline.hpp"

namespace kflow {
namespace geometry {
namespace {

std::vector<double> w_of(const KahlerPotential& u) {
    std::vector<double> w(u.values.size());
    for (int i = 0; i < u.grid.n_points; ++i) {
        const double x = u.grid.node(i);
        w[i] = 0.5 * x * x + u.values[i];
    }
    return w;
}

} // namespace

std::vector<double> extend_quasi(const PeriodicGrid& g, const std::vector<double>& v) {
    const int n = g.n_points;
    std::vector<double> ext(3 * n);
    for (int i = 0; i < n; ++i) {
        const double t = g.node(i);
        ext[i] = v[i] - t + 0.5;          // value at t - 1
        ext[i + n] = v[i];                // value at t
        ext[i + 2 * n] = v[i] + t + 0.5;  // value at t + 1
    }
    return ext;
}

std::vector<double> conjugate_convex(const PeriodicGrid& grid, const std::vector<double>& v) {
    const int n = grid.n_points;
    const double h = grid.spacing;
    const auto ext = extend_quasi(grid, v);
    const auto m = spline::curvatures(ext, h);

    std::vector<double> out(n);
    int j = 1;
    for (int k = 0; k < n; ++k) {
        const double s = grid.node(k);
        while (j + 2 < 3 * n && spline::derivative_at_node(ext, m, h, j + 1) < s) ++j;
        const double r = spline::invert_derivative(ext, m, h, j, s);
        const double t = (j - n + r) * h;
        out[k] = s * t - spline::value(ext, m, h, j, r);
    }
    return out;
}

std::vector<double> conjugate_sup(const PeriodicGrid& grid, const std::vector<double>& v) {
    const int n = grid.n_points;
    const double h = grid.spacing;
    const auto ext = extend_quasi(grid, v);
    std::vector<double> out(n);
    int j = 0;
    for (int k = 0; k < n; ++k) {
        const double s = grid.node(k);
        auto val = [&](int jj) { return s * ((jj - n) * h) - ext[jj]; };
        while (j + 1 < 3 * n && val(j + 1) >= val(j)) ++j;
        out[k] = val(j);
    }
    return out;
}

DensityMeasure ma_measure(const KahlerPotential& u) {
    validate_psh(u);
    const auto d2 = second_difference_periodic(u.grid, u.values);
    std::vector<double> rho(u.grid.n_points);
    for (int i = 0; i < u.grid.n_points; ++i) rho[i] = std::max(0.0, 1.0 + d2[i]);
    DensityMeasure mu(u.grid, std::move(rho));
    if (std::abs(mu.mass() - 1.0) > tol::mass + tol::psh(u.grid))
        throw MassMismatch("ma_measure: total mass " + std::to_string(mu.mass()));
    return mu;
}

SymplecticPotential legendre(const KahlerPotential& u) {
    validate_psh(u);
    return SymplecticPotential(u.grid, conjugate_convex(u.grid, w_of(u)));
}

KahlerPotential inverse_legendre(const SymplecticPotential& g) {
    validate_convex(g);
    auto u = conjugate_convex(g.grid, g.values);
    for (int i = 0; i < g.grid.n_points; ++i) {
        const double x = g.grid.node(i);
        u[i] -= 0.5 * x * x;
    }
    return KahlerPotential(g.grid, std::move(u));
}

KahlerPotential envelope(const std::vector<KahlerPotential>& us) {
    if (us.empty()) throw PreconditionViolated("envelope: empty family");
    const PeriodicGrid grid = us.front().grid;
    for (const auto& u : us) {
        require_same_grid(grid, u.grid, "envelope");
        validate_psh(u);
    }

    const int n = grid.n_points;
    const double h = grid.spacing;
    std::vector<double> m(3 * n, std::numeric_limits<double>::infinity());
    for (const auto& u : us) {
        const auto ext = extend_quasi(grid, w_of(u));
        for (int j = 0; j < 3 * n; ++j) m[j] = std::min(m[j], ext[j]);
    }

    // Lower convex hull of (c_j, m_j) by monotone chain; c_j = (j - n) h.
    std::vector<int> hull;
    hull.reserve(3 * n);
    for (int j = 0; j < 3 * n; ++j) {
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            // drop b if it lies on or above chord a-j
            const double cross = (m[b] - m[a]) * (j - a) - (m[j] - m[a]) * (b - a);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(j);
    }

    std::vector<double> wp(n);
    std::size_t seg = 0;
    for (int i = 0; i < n; ++i) {
        const int j = i + n;
        while (seg + 1 < hull.size() && hull[seg + 1] <= j) ++seg;
        if (hull[seg] == j) {
            wp[i] = m[j];
        } else {
            const int a = hull[seg], b = hull[seg + 1];
            const double t = double(j - a) / double(b - a);
            wp[i] = (1.0 - t) * m[a] + t * m[b];
        }
        const double x = i * h;
        wp[i] -= 0.5 * x * x;
    }
    return KahlerPotential(grid, std::move(wp));
}

KahlerPotential envelope(const KahlerPotential& a, const KahlerPotential& b) {
    return envelope(std::vector<KahlerPotential>{a, b});
}

std::vector<double> mollify_periodic(const PeriodicGrid& g, const std::vector<double>& v, double sigma) {
    const int n = g.n_points;
    const double h = g.spacing;
    if (sigma <= 0.25 * h) return v; // kernel narrower than the grid: identity
    const int half = std::min(n / 2, int(std::ceil(6.0 * sigma / h)));
    std::vector<double> kernel(2 * half + 1);
    double sum = 0.0;
    for (int l = -half; l <= half; ++l) {
        const double d = l * h;
        kernel[l + half] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += kernel[l + half];
    }
    for (double& k : kernel) k /= sum;
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int l = -half; l <= half; ++l) acc += kernel[l + half] * v[((i + l) % n + n) % n];
        out[i] = acc;
    }
    return out;
}

DecreasingApproximation approximate_decreasing(const KahlerPotential& u, int k_max) {
    validate_psh(u);
    if (k_max < 1) throw PreconditionViolated("approximate_decreasing: k_max must be >= 1");
    const int n = u.grid.n_points;

    // Mollified candidates, each shifted to dominate u.
    std::vector<std::vector<double>> cand(k_max);
    for (int k = 0; k < k_max; ++k) {
        const double sigma = 0.25 * std::pow(2.0, -double(k));
        auto smooth = mollify_periodic(u.grid, u.values, sigma);
        double shift = 0.0;
        for (int i = 0; i < n; ++i) shift = std::max(shift, u.values[i] - smooth[i]);
        for (int i = 0; i < n; ++i) smooth[i] += shift;
        cand[k] = std::move(smooth);
    }
    // Fix constants from the tail so the sequence decreases pointwise.
    for (int k = k_max - 2; k >= 0; --k) {
        double lift = 0.0;
        for (int i = 0; i < n; ++i) lift = std::max(lift, cand[k + 1][i] - cand[k][i]);
        for (int i = 0; i < n; ++i) cand[k][i] += lift;
    }

    DecreasingApproximation out;
    const auto gu = legendre(u);
    for (int k = 0; k < k_max; ++k) {
        KahlerPotential uk(u.grid, std::move(cand[k]));
        const auto gk = legendre(uk);
        double gap = 0.0;
        for (int i = 0; i < n; ++i) gap += std::abs(gk.values[i] - gu.values[i]);
        out.sequence.push_back(std::move(uk));
        out.d1_gaps.push_back(gap * u.grid.spacing);
    }
    return out;
}

} // namespace geometry
} // namespace kflow
