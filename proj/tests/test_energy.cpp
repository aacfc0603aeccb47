#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "kflow/energy.hpp"
#include "kflow/geometry.hpp"
#include "kflow/metric.hpp"
#include "support.hpp"

using namespace kflow;
using testsupport::kTwoPi;

namespace {

TwistData uniform_twist(const PeriodicGrid& grid, double m) {
    return TwistData(grid, std::vector<double>(grid.n_points, m),
                     std::vector<double>(grid.n_points, 0.0));
}

TwistData cos_f_twist(const PeriodicGrid& grid, double b0) {
    std::vector<double> f(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) f[i] = std::cos(kTwoPi * grid.node(i));
    return TwistData(grid, std::vector<double>(grid.n_points, b0), std::move(f));
}

} // namespace

TEST_CASE("am on constants and the cosine potential") {
    PeriodicGrid grid(256);
    CHECK(energy::am(testsupport::const_potential(grid, 0.0)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(energy::am(testsupport::const_potential(grid, -1.7)) == doctest::Approx(-1.7).epsilon(1e-13));

    const double a = 0.5;
    const double closed_form = -a * a / (16.0 * M_PI * M_PI); // = -1.5831434944...e-3
    const double v = energy::am(testsupport::cos_potential(grid, a));
    CHECK(std::abs(v - closed_form) < 2e-7);
    CHECK(closed_form == doctest::Approx(-1.5831434944615583e-3).epsilon(1e-12));

    // independent quadrature oracle on the analytic integrand
    const double oracle = testsupport::simpson([&](double x) {
        const double u = a / (4.0 * M_PI * M_PI) * std::cos(kTwoPi * x);
        const double rho = 1.0 - a * std::cos(kTwoPi * x);
        return 0.5 * u * (1.0 + rho);
    });
    CHECK(std::abs(v - oracle) < 2e-7);
}

TEST_CASE("am shifts by added constants") {
    PeriodicGrid grid(128);
    auto u = testsupport::random_psh(grid, 3);
    const double base = energy::am(u);
    for (double& x : u.values) x += 0.42;
    CHECK(energy::am(u) == doctest::Approx(base + 0.42).epsilon(1e-12));
}

TEST_CASE("am_gamma basics and the difference identity") {
    PeriodicGrid grid(128);
    std::vector<double> zero(grid.n_points, 0.0);
    auto u = testsupport::random_psh(grid, 4);
    CHECK(energy::am_gamma(u, zero) == 0.0);

    std::vector<double> gamma(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) gamma[i] = 0.3 + 0.2 * std::sin(kTwoPi * grid.node(i));
    double mass = 0.0;
    for (double g : gamma) mass += g;
    mass *= grid.spacing;
    CHECK(energy::am_gamma(testsupport::const_potential(grid, 2.0), gamma) ==
          doctest::Approx(2.0 * mass).epsilon(1e-13));

    // difference equals the contracted integral of the gap
    auto v = testsupport::random_psh(grid, 5);
    double rhs = 0.0;
    for (int i = 0; i < grid.n_points; ++i) rhs += (v.values[i] - u.values[i]) * gamma[i];
    rhs *= grid.spacing;
    CHECK(std::abs(energy::am_gamma(v, gamma) - energy::am_gamma(u, gamma) - rhs) < 1e-8);
}

TEST_CASE("am difference formula against both endpoint measures") {
    PeriodicGrid grid(256);
    for (std::uint64_t seed : {10ULL, 20ULL, 30ULL}) {
        auto u = testsupport::random_psh(grid, seed);
        auto v = testsupport::random_psh(grid, seed + 1);
        const auto mu = geometry::ma_measure(u);
        const auto mv = geometry::ma_measure(v);
        double sym = 0.0, lower = 0.0, upper = 0.0;
        for (int i = 0; i < grid.n_points; ++i) {
            const double gap = u.values[i] - v.values[i];
            sym += gap * (mu.density[i] + mv.density[i]);
            lower += gap * mu.density[i];
            upper += gap * mv.density[i];
        }
        sym *= 0.5 * grid.spacing;
        lower *= grid.spacing;
        upper *= grid.spacing;
        const double diff = energy::am(u) - energy::am(v);
        CHECK(std::abs(diff - sym) < 1e-8);
        CHECK(lower <= diff + 1e-8);
        CHECK(diff <= upper + 1e-8);
    }
}

TEST_CASE("contracted-energy chain with a measure-type density") {
    PeriodicGrid grid(128);
    auto u = testsupport::random_psh(grid, 40);
    auto v = testsupport::random_psh(grid, 41);
    auto psi = testsupport::random_psh(grid, 42);
    const auto theta = geometry::ma_measure(psi);
    double mid = 0.0;
    for (int i = 0; i < grid.n_points; ++i)
        mid += (u.values[i] - v.values[i]) * theta.density[i];
    mid *= grid.spacing;
    const double diff = energy::am_gamma(u, theta.density) - energy::am_gamma(v, theta.density);
    CHECK(std::abs(diff - mid) < 1e-12);
}

TEST_CASE("am monotone under pointwise domination") {
    PeriodicGrid grid(128);
    auto u = testsupport::random_psh(grid, 6);
    KahlerPotential v(grid, u.values);
    for (int i = 0; i < grid.n_points; ++i)
        v.values[i] += 0.004 * (2.0 + std::cos(kTwoPi * grid.node(i)));
    validate_psh(v);
    CHECK(energy::am(u) <= energy::am(v) + 1e-12);
}

TEST_CASE("am domination: tiny energy gap forces a tiny uniform gap") {
    PeriodicGrid grid(1024);
    auto psi = testsupport::random_psh(grid, 77, 4, 0.5);
    // narrow nonnegative bump, scaled so the energy gap is 1e-8
    std::vector<double> bump(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.node(i) - 0.5;
        bump[i] = std::exp(-x * x / (2.0 * 0.02 * 0.02));
    }
    const auto mu = geometry::ma_measure(psi);
    double pairing = 0.0;
    for (int i = 0; i < grid.n_points; ++i) pairing += bump[i] * (1.0 + mu.density[i]);
    pairing *= 0.5 * grid.spacing; // first-order energy response
    const double alpha = 1e-8 / pairing;
    KahlerPotential phi(grid, psi.values);
    for (int i = 0; i < grid.n_points; ++i) phi.values[i] += alpha * bump[i];
    validate_psh(phi);
    const double gap = energy::am(phi) - energy::am(psi);
    CHECK(gap <= 2e-8);
    CHECK(gap >= 0.0);
    double sup = 0.0;
    for (int i = 0; i < grid.n_points; ++i) sup = std::max(sup, phi.values[i] - psi.values[i]);
    CHECK(sup <= 1e-3);
}

TEST_CASE("am is d1-Lipschitz") {
    PeriodicGrid grid(256);
    for (std::uint64_t seed : {50ULL, 51ULL, 52ULL, 53ULL}) {
        auto u = testsupport::random_psh(grid, seed);
        auto v = testsupport::random_psh(grid, seed + 10);
        const double d1 = metric::dp(u, v, 1.0);
        CHECK(std::abs(energy::am(u) - energy::am(v)) <= d1 * (1.0 + 1e-6) + 1e-12);
    }
}

TEST_CASE("am_chi basics and agreement with the contracted density route") {
    PeriodicGrid grid(256);
    auto zero_chi = TwistData(grid, std::vector<double>(grid.n_points, 0.0),
                              std::vector<double>(grid.n_points, 0.0));
    auto u = testsupport::cos_potential(grid, 0.5);
    CHECK(std::abs(energy::am_chi(u, zero_chi)) < 1e-14);
    CHECK(energy::am_chi(testsupport::const_potential(grid, 1.3), uniform_twist(grid, 1.0)) ==
          doctest::Approx(1.3).epsilon(1e-12));

    auto chi = cos_f_twist(grid, 1.0);
    const auto d2f = second_difference_periodic(grid, chi.f_values);
    std::vector<double> density(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) density[i] = chi.beta_density[i] + d2f[i];
    CHECK(std::abs(energy::am_chi(u, chi) - energy::am_gamma(u, density)) < 1e-12);
}

TEST_CASE("entropy values") {
    PeriodicGrid grid(256);
    std::vector<double> f0(grid.n_points, 0.0);
    CHECK(energy::entropy(f0, testsupport::const_potential(grid, 0.0)) == 0.0);
    CHECK(energy::entropy(f0, testsupport::const_potential(grid, 9.0)) == 0.0);

    const double a = 0.1;
    const double v = energy::entropy(f0, testsupport::cos_potential(grid, a));
    CHECK(std::abs(v - 0.0025) / 0.0025 < 0.05); // leading term a^2/4
    const double oracle = testsupport::simpson([&](double x) {
        const double rho = 1.0 - a * std::cos(kTwoPi * x);
        return rho * std::log(rho);
    });
    CHECK(std::abs(v - oracle) < 1e-6);
}

TEST_CASE("entropy sentinel when the reference weight vanishes") {
    PeriodicGrid grid(64);
    std::vector<double> f(grid.n_points, 0.0);
    f[10] = std::numeric_limits<double>::infinity();
    const double v = energy::entropy(f, testsupport::cos_potential(grid, 0.2));
    CHECK(std::isinf(v));
}

TEST_CASE("kenergy equals the entropy path on the flat background") {
    PeriodicGrid grid(256);
    CHECK(energy::kenergy(testsupport::const_potential(grid, 0.0)) == 0.0);
    CHECK(energy::kenergy(testsupport::const_potential(grid, 4.2)) == 0.0);
    auto u = testsupport::cos_potential(grid, 0.5);
    std::vector<double> f0(grid.n_points, 0.0);
    CHECK(std::abs(energy::kenergy(u) - energy::entropy(f0, u)) < 1e-12);
}

TEST_CASE("twisted kenergy: trivial twists and the dual formula") {
    PeriodicGrid grid(256);
    auto omega = uniform_twist(grid, 1.0);
    CHECK(std::abs(energy::twisted_kenergy(testsupport::const_potential(grid, 0.0), omega)) < 1e-13);

    auto zero_chi = TwistData(grid, std::vector<double>(grid.n_points, 0.0),
                              std::vector<double>(grid.n_points, 0.0));
    auto u = testsupport::random_psh(grid, 8);
    CHECK(std::abs(energy::twisted_kenergy(u, zero_chi) - energy::kenergy(u)) < 1e-13);

    for (auto& chi : {uniform_twist(grid, 1.0), cos_f_twist(grid, 1.0)}) {
        const double a = energy::twisted_kenergy(u, chi);
        const double b = energy::twisted_kenergy_alt(u, chi);
        CHECK(std::abs(a - b) < 1e-6);
    }
    // constant invariance
    auto chi = cos_f_twist(grid, 1.0);
    KahlerPotential shifted(grid, u.values);
    for (double& x : shifted.values) x += 0.9;
    CHECK(std::abs(energy::twisted_kenergy(shifted, chi) - energy::twisted_kenergy(u, chi)) < 1e-10);
}

TEST_CASE("kenergy gradient vanishes at twisted critical points") {
    PeriodicGrid grid(128);
    auto flat = testsupport::const_potential(grid, 0.0);
    auto zero_chi = TwistData(grid, std::vector<double>(grid.n_points, 0.0),
                              std::vector<double>(grid.n_points, 0.0));
    for (double g : energy::kenergy_gradient(flat, zero_chi)) CHECK(std::abs(g) < 1e-13);
    for (double g : energy::kenergy_gradient(flat, uniform_twist(grid, 1.0)))
        CHECK(std::abs(g) < 1e-13);
}

TEST_CASE("kenergy gradient matches central finite differences") {
    PeriodicGrid grid(256);
    auto u = testsupport::cos_potential(grid, 0.1);
    auto chi = cos_f_twist(grid, 0.8);
    const auto grad = energy::kenergy_gradient(u, chi);
    const auto mu = geometry::ma_measure(u);

    std::vector<double> dir(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i)
        dir[i] = std::sin(kTwoPi * grid.node(i)) + 0.5 * std::cos(2.0 * kTwoPi * grid.node(i));
    double pairing = 0.0;
    for (int i = 0; i < grid.n_points; ++i) pairing += grad[i] * dir[i] * mu.density[i];
    pairing *= grid.spacing;

    const double s = 1e-5;
    KahlerPotential up(grid, u.values), um(grid, u.values);
    for (int i = 0; i < grid.n_points; ++i) {
        up.values[i] += s * dir[i];
        um.values[i] -= s * dir[i];
    }
    const double fd =
        (energy::twisted_kenergy(up, chi) - energy::twisted_kenergy(um, chi)) / (2.0 * s);
    CHECK(std::abs(fd - pairing) / std::abs(fd) < 1e-4);
}

TEST_CASE("kenergy gradient rejects degenerate metrics") {
    PeriodicGrid grid(256);
    auto kink = geometry::envelope(testsupport::const_potential(grid, 0.0),
                                   testsupport::cos_potential(grid, 0.5));
    auto zero_chi = TwistData(grid, std::vector<double>(grid.n_points, 0.0),
                              std::vector<double>(grid.n_points, 0.0));
    CHECK_THROWS_AS(energy::kenergy_gradient(kink, zero_chi), DegenerateMetric);
}

TEST_CASE("lower semicontinuity proxy along decreasing approximations") {
    PeriodicGrid grid(512);
    auto kink = geometry::envelope(testsupport::const_potential(grid, 0.0),
                                   testsupport::cos_potential(grid, 0.5));
    auto approx = geometry::approximate_decreasing(kink, 16);
    for (auto& chi : {uniform_twist(grid, 1.0), cos_f_twist(grid, 1.0)}) {
        const double at_limit = energy::twisted_kenergy(kink, chi);
        double liminf = std::numeric_limits<double>::infinity();
        for (std::size_t k = approx.sequence.size() - 4; k < approx.sequence.size(); ++k)
            liminf = std::min(liminf, energy::twisted_kenergy(approx.sequence[k], chi));
        CHECK(liminf >= at_limit - 1e-6);
    }
}

TEST_CASE("symplectic-chart evaluators agree with the circle-chart ones") {
    PeriodicGrid grid(512);
    auto u = testsupport::random_psh(grid, 9, 4, 0.4);
    auto g = geometry::legendre(u);
    CHECK(std::abs(energy::am_symplectic(g) - energy::am(u)) < 1e-5);
    std::vector<double> f0(grid.n_points, 0.0);
    CHECK(std::abs(energy::entropy_symplectic(g) - energy::entropy(f0, u)) < 1e-4);
    const double mean_x = integrate(grid, u.values);
    CHECK(std::abs(energy::mean_symplectic(g) - mean_x) < 1e-5);
    for (auto& chi : {uniform_twist(grid, 1.0), cos_f_twist(grid, 1.0)}) {
        CHECK(std::abs(energy::twisted_kenergy_symplectic(g, chi) -
                       energy::twisted_kenergy(u, chi)) < 1e-3);
    }
}
