#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kflow/energy.hpp"
#include "kflow/geometry.hpp"
#include "kflow/metric.hpp"
#include "support.hpp"

using namespace kflow;
using testsupport::kTwoPi;

TEST_CASE("finsler norm basics") {
    PeriodicGrid grid(256);
    auto u = testsupport::random_psh(grid, 13);
    std::vector<double> one(grid.n_points, 1.0);
    CHECK(metric::finsler_norm(one, u, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metric::finsler_norm(one, u, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> c(grid.n_points, -2.5);
    CHECK(metric::finsler_norm(c, u, 1.5) == doctest::Approx(2.5).epsilon(1e-12));

    std::vector<double> xi(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) xi[i] = std::cos(kTwoPi * grid.node(i));
    auto flat = testsupport::const_potential(grid, 0.0);
    CHECK(metric::finsler_norm(xi, flat, 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("dp: identity, constants, translation invariance") {
    PeriodicGrid grid(256);
    auto u = testsupport::random_psh(grid, 14);
    for (double p : {1.0, 2.0}) {
        CHECK(metric::dp(u, u, p) == 0.0);
        CHECK(metric::dp(testsupport::const_potential(grid, 0.0),
                         testsupport::const_potential(grid, -3.25), p) ==
              doctest::Approx(3.25).epsilon(1e-14));
    }
    auto v = testsupport::random_psh(grid, 15);
    KahlerPotential us(grid, u.values), vs(grid, v.values);
    for (int i = 0; i < grid.n_points; ++i) {
        us.values[i] += 1.234;
        vs.values[i] += 1.234;
    }
    for (double p : {1.0, 2.0})
        CHECK(std::abs(metric::dp(us, vs, p) - metric::dp(u, v, p)) < 1e-12);
}

TEST_CASE("dp symmetry, triangle inequality, p-monotonicity on seeded data") {
    PeriodicGrid grid(256);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto a = testsupport::random_psh(grid, 3 * seed + 1);
        auto b = testsupport::random_psh(grid, 3 * seed + 2);
        auto c = testsupport::random_psh(grid, 3 * seed + 3);
        for (double p : {1.0, 2.0}) {
            const double ab = metric::dp(a, b, p);
            const double ba = metric::dp(b, a, p);
            CHECK(ab == ba); // symmetric exactly
            CHECK(ab <= metric::dp(a, c, p) + metric::dp(c, b, p) + 1e-10);
        }
        CHECK(metric::dp(a, b, 1.0) <= metric::dp(a, b, 2.0) + 1e-12);
    }
}

TEST_CASE("dp zero distance forces equality up to a constant") {
    PeriodicGrid grid(128);
    auto u = testsupport::random_psh(grid, 31);
    KahlerPotential v(grid, u.values);
    for (double& x : v.values) x += 0.5;
    CHECK(metric::dp(u, v, 2.0) == doctest::Approx(0.5).epsilon(1e-13));
    // conversely, distance ~0 means difference ~constant
    const auto gu = geometry::legendre(u);
    const auto gv = geometry::legendre(v);
    double span = 0.0;
    for (int i = 0; i < grid.n_points; ++i)
        span = std::max(span, std::abs((gv.values[i] - gu.values[i]) - (-0.5)));
    CHECK(span <= 10.0 * grid.spacing);
}

TEST_CASE("dp against the brute-force dual oracle") {
    PeriodicGrid grid(128);
    auto z = testsupport::const_potential(grid, 0.0);
    auto u = testsupport::cos_potential(grid, 0.5);
    const auto g0 = testsupport::legendre_oracle(z, 10);
    const auto g1 = testsupport::legendre_oracle(u, 10);
    double oracle = 0.0;
    for (int k = 0; k < grid.n_points; ++k) {
        const double d = g0[k] - g1[k];
        oracle += d * d;
    }
    oracle = std::sqrt(oracle * grid.spacing);
    CHECK(std::abs(metric::dp(z, u, 2.0) - oracle) < 1e-5);
}

TEST_CASE("d1 via envelopes: trivial cases and the dual-route agreement") {
    PeriodicGrid grid(512);
    auto u = testsupport::random_psh(grid, 16);
    CHECK(metric::d1_envelope(u, u) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(metric::d1_envelope(testsupport::const_potential(grid, 0.0),
                              testsupport::const_potential(grid, 2.0)) ==
          doctest::Approx(2.0).epsilon(1e-10));

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto a = testsupport::random_psh(grid, 100 + 2 * seed);
        auto b = testsupport::random_psh(grid, 101 + 2 * seed);
        const double via_envelope = metric::d1_envelope(a, b);
        const double via_dual = metric::dp(a, b, 1.0);
        CHECK(std::abs(via_envelope - via_dual) <= 10.0 * grid.spacing);
    }
}

TEST_CASE("i_functional: symmetry, positivity, exact cosine value") {
    PeriodicGrid grid(256);
    auto u = testsupport::random_psh(grid, 17);
    auto v = testsupport::random_psh(grid, 18);
    CHECK(metric::i_functional(u, u) == 0.0);
    CHECK(metric::i_functional(testsupport::const_potential(grid, 0.0),
                               testsupport::const_potential(grid, 5.0)) == 0.0);
    const double iuv = metric::i_functional(u, v);
    CHECK(iuv >= 0.0);
    CHECK(iuv == doctest::Approx(metric::i_functional(v, u)).epsilon(1e-12));
    // constants drop out
    KahlerPotential us(grid, u.values);
    for (double& x : us.values) x += 3.0;
    KahlerPotential vs(grid, v.values);
    for (double& x : vs.values) x += 3.0;
    CHECK(metric::i_functional(us, vs) == doctest::Approx(iuv).epsilon(1e-10));

    const double a = 0.5;
    const double exact = a * a / (8.0 * M_PI * M_PI); // int u (-u'') = int (u')^2
    const double computed = metric::i_functional(testsupport::const_potential(grid, 0.0),
                                                 testsupport::cos_potential(grid, a));
    CHECK(std::abs(computed - exact) < 1e-6);
    CHECK(exact == doctest::Approx(3.1662869889231166e-3).epsilon(1e-12));
}

TEST_CASE("i_functional tracks d1 on shrinking families") {
    PeriodicGrid grid(256);
    auto u = testsupport::random_psh(grid, 19);
    double prev_i = 1e300, prev_d = 1e300;
    for (double t : {1.0, 0.5, 0.25, 0.125}) {
        KahlerPotential v(grid, u.values);
        for (int i = 0; i < grid.n_points; ++i) v.values[i] *= (1.0 - 0.3 * t);
        const double d1 = metric::dp(u, v, 1.0);
        const double iq = metric::i_functional(u, v);
        CHECK(d1 <= prev_d + 1e-12);
        CHECK(iq <= prev_i + 1e-12);
        prev_d = d1;
        prev_i = iq;
    }
    CHECK(prev_d < 1e-2);
    CHECK(prev_i < 1e-2);
}

TEST_CASE("two-sided ratio: degenerate and constant cases") {
    PeriodicGrid grid(128);
    auto u = testsupport::random_psh(grid, 21);
    auto same = metric::dp_ratio_check(u, u, 2.0);
    CHECK(same.first == 1.0);
    auto consts = metric::dp_ratio_check(testsupport::const_potential(grid, 0.0),
                                         testsupport::const_potential(grid, 1.0), 2.0);
    CHECK(consts.first == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("two-sided ratio stays within a factor of ten on the sweep") {
    PeriodicGrid grid(256);
    double worst_hi = 0.0, worst_lo = 1e300;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto a = testsupport::random_psh(grid, 1000 + 2 * seed);
        auto b = testsupport::random_psh(grid, 1001 + 2 * seed);
        for (double p : {1.0, 2.0}) {
            const auto r = metric::dp_ratio_check(a, b, p);
            worst_hi = std::max(worst_hi, r.first);
            worst_lo = std::min(worst_lo, r.first);
        }
    }
    CHECK(worst_hi <= 10.0);
    CHECK(worst_lo >= 0.1);
}
