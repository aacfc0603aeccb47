#pragma once

#include <cmath>
#include <vector>

namespace kflow {
namespace spline {

// Natural cubic spline curvatures on a uniform grid (Thomas solve of the
// standard tridiagonal system). End curvatures are zero; callers keep the
// evaluation away from the ends (the data here always spans three periods).
inline std::vector<double> curvatures(const std::vector<double>& y, double h) {
    const int n = int(y.size());
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    std::vector<double> c(n, 0.0), d(n, 0.0), rhs(n, 0.0);
    for (int j = 1; j + 1 < n; ++j) rhs[j] = 6.0 * (y[j + 1] - 2.0 * y[j] + y[j - 1]) / (h * h);
    c[1] = 1.0 / 4.0;
    d[1] = rhs[1] / 4.0;
    for (int j = 2; j + 1 < n; ++j) {
        const double w = 4.0 - c[j - 1];
        c[j] = 1.0 / w;
        d[j] = (rhs[j] - d[j - 1]) / w;
    }
    for (int j = n - 2; j >= 1; --j) m[j] = d[j] - c[j] * (j + 2 < n ? m[j + 1] : 0.0);
    return m;
}

// Piecewise-cubic evaluation on the interval [x_j, x_j + h] in the local
// coordinate r in [0, 1].
inline double value(const std::vector<double>& y, const std::vector<double>& m, double h, int j,
                    double r) {
    const double a = 1.0 - r;
    return a * y[j] + r * y[j + 1] +
           h * h / 6.0 * ((a * a * a - a) * m[j] + (r * r * r - r) * m[j + 1]);
}

inline double derivative(const std::vector<double>& y, const std::vector<double>& m, double h,
                         int j, double r) {
    const double a = 1.0 - r;
    return (y[j + 1] - y[j]) / h +
           h / 6.0 * ((-3.0 * a * a + 1.0) * m[j] + (3.0 * r * r - 1.0) * m[j + 1]);
}

inline double derivative_at_node(const std::vector<double>& y, const std::vector<double>& m,
                                 double h, int j) {
    return (y[j + 1] - y[j]) / h - h / 6.0 * (2.0 * m[j] + m[j + 1]);
}

// Solves S'(x) = s inside interval j (S' is quadratic there); returns the
// local coordinate r in [0, 1], clamped. Bisection fallback keeps this
// robust when the spline slope is locally non-monotone near kinks.
inline double invert_derivative(const std::vector<double>& y, const std::vector<double>& m,
                                double h, int j, double s) {
    double lo = 0.0, hi = 1.0;
    double flo = derivative(y, m, h, j, lo) - s;
    if (flo > 0.0) return 0.0;
    if (derivative(y, m, h, j, hi) - s < 0.0) return 1.0;
    double r = 0.5;
    for (int it = 0; it < 60; ++it) {
        const double f = derivative(y, m, h, j, r) - s;
        if (f > 0.0)
            hi = r;
        else
            lo = r;
        const double fp = (1.0 - r) * m[j] + r * m[j + 1]; // S'' in local coords
        double next = (std::abs(fp) > 1e-300) ? r - f / fp : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) < 1e-16) return next;
        r = next;
    }
    return r;
}

} // namespace spline
} // namespace kflow
