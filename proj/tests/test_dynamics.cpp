#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <random>
#include <vector>

#include "oracle_values.hpp"
#include "weierdyn/bigfloat.hpp"
#include "weierdyn/dynamics.hpp"

using namespace weierdyn;

namespace {

struct Fixture {
    PoleCriticalLattice pc = make_pole_critical_lattice(-11);
    EllipticEvaluator ev{pc.lattice};
    cx c1 = pc.gamma1 * 0.5;
};

const cx rot{-0.5, 0.8660254037844386}; // e^{2 pi i/3}

} // namespace

TEST_CASE("status names") {
    CHECK(std::strcmp(to_string(OrbitStatus::Bounded), "bounded") == 0);
    CHECK(std::strcmp(to_string(OrbitStatus::Escaping), "escaping") == 0);
    CHECK(std::strcmp(to_string(OrbitStatus::Prepole), "prepole") == 0);
    CHECK(std::strcmp(to_string(OrbitStatus::NearPoleUnresolved), "near-pole-unresolved") ==
          0);
}

TEST_CASE("g_beta and the frozen second-iterate oracle") {
    Fixture f;
    CHECK(std::abs(g_beta(f.ev, cx(2.0, 0.0), f.c1) - 2.0 * f.ev.wp(f.c1)) <= 1e-12);

    ParamMapValue v1 = h_n(f.ev, oracle::pc11_beta0, 1);
    ParamMapValue v2 = h_n(f.ev, oracle::pc11_beta0, 2);
    CHECK(std::abs(v1.value - oracle::pc11_h1_beta0) <=
          1e-13 * std::abs(oracle::pc11_h1_beta0));
    CHECK(std::abs(v2.value - oracle::pc11_h2_beta0) <=
          1e-12 * std::abs(oracle::pc11_h2_beta0));
    CHECK_FALSE(v2.singular);
}

TEST_CASE("h_n equals manual composition of g_beta") {
    Fixture f;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        cx beta = cx(1.0, 0.0) + 0.02 * cx(u(rng), u(rng));
        cx z = f.c1;
        for (int n = 1; n <= 5; ++n) {
            z = beta * f.ev.wp(z);
            ParamMapValue v = h_n(f.ev, beta, n);
            REQUIRE_FALSE(v.singular);
            CHECK(std::abs(v.value - z) <= 1e-11 * (1.0 + std::abs(z)));
        }
    }
    // closed form for the first level
    cx beta(1.013, -0.007);
    CHECK(std::abs(h_n(f.ev, beta, 1).value - beta * f.ev.wp(f.c1)) <= 1e-13);
}

TEST_CASE("derivative: recursion vs product formula vs finite differences") {
    Fixture f;
    cx e1 = f.ev.wp(f.c1);
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 8; ++k) {
        cx beta = cx(1.0, 0.0) + 0.02 * cx(u(rng), u(rng));
        for (int n = 2; n <= 6; ++n) {
            ParamMapValue v = h_n(f.ev, beta, n);
            REQUIRE_FALSE(v.singular);
            cx prod = h_n_prime(f.ev, beta, n);
            CHECK(std::abs(prod - v.derivative) <= 1e-9 * std::abs(v.derivative));
        }
        // independent closed form at n = 2
        cx h1 = beta * e1;
        cx closed2 = f.ev.wp(h1) + beta * f.ev.wp_prime(h1) * e1;
        CHECK(std::abs(h_n(f.ev, beta, 2).derivative - closed2) <=
              1e-9 * std::abs(closed2));
    }

    // Richardson-extrapolated central differences at 50 digits. Near beta = 1
    // the singular parameters of h_n accumulate at spacing well below any
    // workable double step, so the slope check runs at extended precision with
    // a step far inside the analytic scale of every sample point.
    auto basis = make_pole_critical_basis<bigcx>(-11);
    wp_engine<bigcx> big(basis.gamma1, basis.gamma2);
    const bigreal d("1e-30");
    int exercised = 0;
    for (int k = 0; k < 8; ++k) {
        cx beta = cx(1.0, 0.0) + 0.02 * cx(u(rng), u(rng));
        bigcx bb = to_big(beta);
        auto at = [&](const bigcx& b, int n) {
            std::vector<bigcx> h, hp;
            REQUIRE(run_param_orbit(big, b, n, bigreal(0), h, hp));
            return h[static_cast<std::size_t>(n)];
        };
        for (int n = 2; n <= 4; ++n) {
            std::vector<bigcx> H, HP;
            REQUIRE(run_param_orbit(big, bb, n, bigreal(0), H, HP));
            bigcx d1 = (at(bb + d, n) - at(bb - d, n)) / (2 * d);
            bigcx d2 = (at(bb + d / 2, n) - at(bb - d / 2, n)) / d;
            bigcx fd = (bigreal(4) * d2 - d1) / bigreal(3);
            // recursion vs independent slope, both at 50 digits
            CHECK(dbl(abs(HP[static_cast<std::size_t>(n)] - fd) / abs(fd)) <= 1e-20);
            // reduction cancellation compounds through the chain rule, so the
            // double derivative is only held to a tight band where every
            // orbit point is far from the poles relative to its size
            bool resolved = true;
            for (int j = 1; j < n; ++j)
                if (dbl(abs(H[static_cast<std::size_t>(j)])) >
                    100.0 * dbl(big.dist_to_lattice(H[static_cast<std::size_t>(j)])))
                    resolved = false;
            if (resolved) {
                cx dd = h_n(f.ev, beta, n).derivative;
                CHECK(std::abs(dd - to_cx(fd)) <= 1e-6 * std::abs(to_cx(fd)));
                ++exercised;
            }
        }
    }
    CHECK(exercised >= 1); // the gate must not make the double check vacuous
}

TEST_CASE("prepole parameters flag singular orbits") {
    Fixture f;
    cx b = f.pc.lattice.point(3, 2);
    cx beta = b / f.pc.e_star; // h_1(beta) = b exactly
    ParamMapValue v = h_n(f.ev, beta, 3);
    CHECK(v.singular);
    CHECK(v.singular_index == 1);

    OrbitTrace t = orbit(f.ev, beta, f.c1, 6, 3.0);
    CHECK(t.status == OrbitStatus::Prepole);
    CHECK(t.n == 1);
    CHECK(std::abs(t.pole - b) <= 1e-9 * std::abs(b));
    CHECK(t.points.size() == 2);

    // a parameter near, but not on, the root resolves as near-pole
    OrbitTrace u = orbit(f.ev, beta + cx(1.2e-9, 0.0), f.c1, 6, 3.0);
    CHECK(u.status == OrbitStatus::NearPoleUnresolved);
    CHECK(u.min_pole_dist > 0.0);
}

TEST_CASE("bounded and escaping classifications") {
    Fixture f;
    OrbitTrace b = orbit(f.ev, cx(1.0005, 0.0), f.c1, 12, 4.0);
    CHECK(b.status == OrbitStatus::Bounded);
    CHECK(b.n == 12);
    CHECK(b.points.size() == 13);

    // the doubling certificate is reachable in plain double for short horizons
    bool found = false;
    for (int k = 0; k <= 50 && !found; ++k) {
        cx beta(2.0 + 0.1 * k, 0.3);
        OrbitTrace t = orbit(f.ev, beta, f.c1, 2, 1.0);
        if (t.status == OrbitStatus::Escaping) {
            found = true;
            CHECK(t.n == 2);
            REQUIRE(t.radii_checked.size() >= 2);
            CHECK(t.radii_checked[0] == doctest::Approx(2.0));
            CHECK(t.radii_checked[1] == doctest::Approx(4.0));
            CHECK(std::abs(t.points[1]) >= 2.0);
            CHECK(std::abs(t.points[2]) >= 4.0);
        }
    }
    CHECK(found);
}

TEST_CASE("classify_beta matches the critical orbit and its symmetry") {
    Fixture f;
    cx c1, c2, c3;
    f.ev.critical_points(c1, c2, c3);
    cx beta(1.02, 0.01);

    OrbitTrace a = classify_beta(f.ev, beta, 8, 4.0);
    OrbitTrace b = orbit(f.ev, beta, c1, 8, 4.0);
    CHECK(a.status == b.status);
    CHECK(a.n == b.n);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK(std::abs(a.points[i] - b.points[i]) == 0.0);

    // the three critical orbits are cube-root rotations of each other:
    // g^n(c2) = rot * g^n(c1), g^n(c3) = rot^2 * g^n(c1). Orbit separation
    // grows by the step derivative, so double roundoff is amplified by orders
    // of magnitude per step; the identity is checked at 50 digits where the
    // seed error stays far below the amplification over eight steps.
    auto basis = make_pole_critical_basis<bigcx>(-11);
    wp_engine<bigcx> big(basis.gamma1, basis.gamma2);
    bigcx bb = to_big(beta);
    bigcx z1 = basis.gamma1 / 2, z2 = basis.gamma2 / 2, z3 = (basis.gamma1 + basis.gamma2) / 2;
    bigcx rho = basis.gamma2 / basis.gamma1;
    for (int i = 1; i <= 8; ++i) {
        z1 = bb * big.wp(z1);
        z2 = bb * big.wp(z2);
        z3 = bb * big.wp(z3);
        CHECK(dbl(abs(z2 - rho * z1) / abs(z1)) <= 1e-30);
        CHECK(dbl(abs(z3 - rho * rho * z1) / abs(z1)) <= 1e-30);
        // the double orbit only tracks the true one while the amplified
        // roundoff stays small; three steps is the safe window here
        if (i <= 3)
            CHECK(std::abs(a.points[static_cast<std::size_t>(i)] - to_cx(z1)) <=
                  1e-8 * (1.0 + std::abs(to_cx(z1))));
    }
}

TEST_CASE("run_param_orbit agrees with h_n in both precisions") {
    Fixture f;
    cx beta(1.01, 0.004);
    std::vector<cx> h, hp;
    REQUIRE(run_param_orbit(f.ev.engine(), beta, 4, 0.0, h, hp));
    REQUIRE(h.size() == 5);
    CHECK(std::abs(h[0] - f.c1) == 0.0);
    for (int n = 1; n <= 4; ++n) {
        ParamMapValue v = h_n(f.ev, beta, n);
        CHECK(std::abs(h[n] - v.value) <= 1e-11 * (1.0 + std::abs(v.value)));
        CHECK(std::abs(hp[n] - v.derivative) <= 1e-9 * (1.0 + std::abs(v.derivative)));
    }

    auto basis = make_pole_critical_basis<bigcx>(-11);
    wp_engine<bigcx> big(basis.gamma1, basis.gamma2);
    std::vector<bigcx> H, HP;
    REQUIRE(run_param_orbit(big, to_big(beta), 3, bigreal(0), H, HP));
    // lattice reduction at |h| ~ 1e2..1e4 plus one amplified step costs the
    // double path several digits; 1e-8 still flags any structural regression
    for (int n = 0; n <= 3; ++n)
        CHECK(std::abs(to_cx(H[n]) - h[n]) <= 1e-8 * (1.0 + std::abs(h[n])));

    // the guard stops the orbit before a pole and reports the hit index
    cx b = f.pc.lattice.point(3, 2);
    std::vector<cx> hg, hpg;
    int hit = -1;
    CHECK_FALSE(run_param_orbit(f.ev.engine(), b / f.pc.e_star, 4, 1e-6, hg, hpg, &hit));
    CHECK(hit == 1);
    CHECK(hg.size() == 2);
}
