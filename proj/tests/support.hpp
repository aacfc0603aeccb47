#pragma once

// Shared helpers for the test suites: seeded potential generators and the
// independent oracles (brute-force conjugates, obstacle projection,
// refined-grid quadrature).

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "kflow/grid.hpp"

namespace testsupport {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Deterministic uniform in [0,1); avoids std::uniform_real_distribution,
// whose output is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Random trigonometric potential rescaled so min(1 + D2 u) hits a prescribed
// floor in (0, 1); always strictly psh.
inline kflow::KahlerPotential random_psh(const kflow::PeriodicGrid& grid, std::uint64_t seed,
                                         int k_max = 5, double density_floor = 0.3) {
    std::mt19937_64 rng(seed);
    const int n = grid.n_points;
    std::vector<double> u(n, 0.0);
    for (int k = 1; k <= k_max; ++k) {
        const double a = uniform(rng, -1.0, 1.0) / (k * k);
        const double b = uniform(rng, -1.0, 1.0) / (k * k);
        for (int i = 0; i < n; ++i) {
            const double x = grid.node(i);
            u[i] += a * std::cos(kTwoPi * k * x) + b * std::sin(kTwoPi * k * x);
        }
    }
    const auto d2 = kflow::second_difference_periodic(grid, u);
    double lo = 0.0;
    for (double v : d2) lo = std::min(lo, v);
    const double target = 1.0 - density_floor; // want min(1 + s * d2) = density_floor
    const double scale = (lo < 0.0) ? target / (-lo) : 0.0;
    for (double& v : u) v *= scale;
    return kflow::KahlerPotential(grid, std::move(u));
}

inline kflow::KahlerPotential cos_potential(const kflow::PeriodicGrid& grid, double a) {
    std::vector<double> u(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i)
        u[i] = a / (kTwoPi * kTwoPi) * std::cos(kTwoPi * grid.node(i));
    return kflow::KahlerPotential(grid, std::move(u));
}

inline kflow::KahlerPotential const_potential(const kflow::PeriodicGrid& grid, double c) {
    return kflow::KahlerPotential(grid, std::vector<double>(grid.n_points, c));
}

// Brute-force convex conjugate on a refined x-grid; the oracle for the
// module's linear-scan transform. Evaluates w by periodic cubic resampling
// of u plus the exact x^2/2 part.
inline std::vector<double> legendre_oracle(const kflow::KahlerPotential& u, int refine = 10) {
    const int n = u.grid.n_points;
    const int N = refine * n;
    const double H = 1.0 / N;
    std::vector<double> g(n, -1e300);
    for (int k = 0; k < n; ++k) {
        const double p = u.grid.node(k);
        for (int j = -N; j < 2 * N; ++j) {
            const double x = j * H;
            // periodic-linear interpolation of u at x
            double xr = x - std::floor(x);
            int i0 = int(xr * n) % n;
            const double t = xr * n - i0;
            const double uval = (1.0 - t) * u.values[i0] + t * u.values[(i0 + 1) % n];
            const double w = 0.5 * x * x + uval;
            g[k] = std::max(g[k], p * x - w);
        }
    }
    return g;
}

// Largest function below the obstacle whose sum with x^2/2 is discretely
// convex: Gauss-Seidel projection iterated to a fixed point. Oracle for the
// hull-based envelope.
inline std::vector<double> envelope_oracle(const kflow::PeriodicGrid& grid,
                                           const std::vector<std::vector<double>>& obstacles,
                                           int sweeps = 200000, double tol = 1e-14) {
    const int n = grid.n_points;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.node(i);
        double m = 1e300;
        for (const auto& u : obstacles) m = std::min(m, u[i]);
        w[i] = m + 0.5 * x * x;
    }
    // obstacle values in w-coordinates with quasi-periodic neighbors
    std::vector<double> obstacle = w;
    for (int s = 0; s < sweeps; ++s) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            // w(x - 1) = w(x) - x + 1/2 and w(x + 1) = w(x) + x + 1/2
            const double left = (i == 0) ? w[n - 1] - grid.node(n - 1) + 0.5 : w[i - 1];
            const double right = (i == n - 1) ? w[0] + grid.node(0) + 0.5 : w[i + 1];
            const double cand = std::min(obstacle[i], 0.5 * (left + right));
            moved = std::max(moved, std::abs(w[i] - cand));
            w[i] = cand;
        }
        if (moved < tol) break;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.node(i);
        out[i] = w[i] - 0.5 * x * x;
    }
    return out;
}

// Composite Simpson quadrature of a callable over [0,1].
template <class F>
double simpson(F f, int n = 4096) {
    double s = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) s += f(i / double(n)) * (i % 2 ? 4.0 : 2.0);
    return s / (3.0 * n);
}

} // namespace testsupport
