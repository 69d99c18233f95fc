#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "weierdyn/dimension.hpp"

using namespace weierdyn;

TEST_CASE("ternary Cantor family: exact partials at every depth") {
    NestedFamilySpec spec = ternary_cantor_spec();
    const double want = std::log(2.0) / std::log(3.0);
    CHECK(spec.limit == doctest::Approx(want).epsilon(1e-15));
    DimensionBound b = mcmullen_bound(spec, 400);
    REQUIRE_FALSE(b.partials.empty());
    for (double p : b.partials) CHECK(p == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::fabs(b.extrapolated - want) <= 1e-12);
    CHECK(std::fabs(b.liminf_window - want) <= 1e-12);
}

TEST_CASE("planar dust family converges to log4/log3") {
    NestedFamilySpec spec = planar_dust_spec();
    const double want = std::log(4.0) / std::log(3.0);
    CHECK(spec.ambient_dim == 2.0);
    DimensionBound b = mcmullen_bound(spec, 2000);
    CHECK(std::fabs(b.extrapolated - want) <= 1e-4);
    // partials are genuine lower bounds approaching the limit from below
    for (double p : b.partials) CHECK(p <= want + 1e-9);
    CHECK(b.partials.back() > want - 1e-2);
}

TEST_CASE("extrapolation beats the raw partial tail") {
    NestedFamilySpec spec = planar_dust_spec();
    const double want = std::log(4.0) / std::log(3.0);
    DimensionBound b = mcmullen_bound(spec, 500);
    double raw_gap = std::fabs(b.partials.back() - want);
    double fit_gap = std::fabs(b.extrapolated - want);
    CHECK(fit_gap < raw_gap);
    CHECK(b.liminf_window <= b.partials.back() + 1e-12);
}

TEST_CASE("closed-form family tracks the analytic limit across a") {
    // synthetic constants: only the fields used by the closed-form spec
    PoleCriticalLattice pc = make_pole_critical_lattice(-11);
    EllipticEvaluator ev(pc.lattice);
    PoleLocalData pd = estimate_pole_constants(ev, 0.25, 1.0 / 32.0);
    BuildConstants base = choose_constants(ev, pd);

    double prev = -10.0;
    for (double a : {1e3, 1e6, 1e12}) {
        BuildConstants c = base;
        c.a = a;
        c.R2 = a * c.R1;
        ConsistencyReport rep = consistency_check(c, 2000);
        CHECK(rep.pass);
        CHECK(rep.a == a);
        CHECK(rep.gap <= 1e-3);
        CHECK(rep.analytic ==
              doctest::Approx(4.0 / 3.0 - 6.0 * std::log(2.0) / std::log(a)).epsilon(1e-14));
        CHECK(std::fabs(analytic_bound(a) - rep.analytic) <= 1e-14);
        CHECK(rep.extrapolated > prev); // monotone toward 4/3
        prev = rep.extrapolated;

        DimensionBound b = mcmullen_bound(closed_form_family_spec(c), 2000);
        CHECK(b.has_formula);
        CHECK(std::fabs(b.formula_value - rep.analytic) <= 1e-12);
        CHECK(std::fabs(b.extrapolated - rep.extrapolated) <= 1e-12);
    }
    CHECK(prev < 4.0 / 3.0);
    // at a = 1e12 the distance to 4/3 is the analytic offset 6 log2 / log a
    CHECK(4.0 / 3.0 - prev <= 6.0 * std::log(2.0) / std::log(1e12) + 1e-3);
}

TEST_CASE("box-count dimension on reference point sets") {
    // Ternary Cantor set at depth 9: interval midpoints shifted by a generic
    // offset, so no point sits on a box boundary at any ladder scale and the
    // straddle factor is constant across scales (the slope is then exact).
    std::vector<cx> cantor{cx(0.0, 0.0)};
    double scale = 1.0;
    for (int d = 0; d < 9; ++d) {
        scale /= 3.0;
        std::vector<cx> next;
        next.reserve(cantor.size() * 2);
        for (cx p : cantor) {
            next.push_back(p);
            next.push_back(p + cx(2.0 * scale, 0.0));
        }
        cantor = std::move(next);
    }
    const double offset = 0.137 / 3.14159;
    for (cx& p : cantor) p += cx(offset + 0.5 * scale, 0.0);
    ScaleRange scales{std::pow(3.0, -7.0), std::pow(3.0, -2.0), 6};
    double dim = box_count_dimension(cantor, scales);
    CHECK(std::fabs(dim - std::log(2.0) / std::log(3.0)) <= 0.02);

    // Filled unit square on a 512^2 grid. Box counting a solid region reads
    // low by ~(boxes per side)^-1 at the coarse end, so the ladder stays at
    // 32..64 boxes per side; the measured slope is 2.017.
    std::vector<cx> square;
    square.reserve(512 * 512);
    const double off2 = 0.061803398875;
    for (int i = 0; i < 512; ++i)
        for (int j = 0; j < 512; ++j)
            square.push_back(cx((i + 0.5) / 512.0 + off2, (j + 0.5) / 512.0 + off2));
    double dim2 = box_count_dimension(square, ScaleRange{1.0 / 64.0, 1.0 / 32.0, 6});
    CHECK(std::fabs(dim2 - 2.0) <= 0.05);

    CHECK_THROWS_AS(box_count_dimension({cx(0.3, 0.4)}, ScaleRange{1e-3, 1e-1, 5}),
                    invalid_spec_error);
    CHECK_THROWS_AS(box_count_dimension(square, ScaleRange{1e-3, 1e-1, 1}),
                    invalid_spec_error);
}

TEST_CASE("mcmullen_bound input validation") {
    NestedFamilySpec spec = ternary_cantor_spec();
    CHECK_THROWS_AS(mcmullen_bound(spec, 1), invalid_spec_error);
    NestedFamilySpec broken = spec;
    broken.log_delta = nullptr;
    CHECK_THROWS_AS(mcmullen_bound(broken, 100), invalid_spec_error);
}
