// Microbenchmarks of the evaluation hot paths: the row series at both
// precisions, orbit iteration, the parameter map, pole enumeration, and one
// raster tile. Run with --benchmark_min_time=... to tighten timings.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "weierdyn/bigfloat.hpp"
#include "weierdyn/cantor.hpp"
#include "weierdyn/dynamics.hpp"
#include "weierdyn/lattice.hpp"
#include "weierdyn/weierstrass.hpp"

using namespace weierdyn;

namespace {

const PoleCriticalLattice& pc11() {
    static const PoleCriticalLattice pc = make_pole_critical_lattice(-11);
    return pc;
}

const EllipticEvaluator& ev11() {
    static const EllipticEvaluator ev(pc11().lattice);
    return ev;
}

const wp_engine<bigcx>& big_engine() {
    static const pole_critical_basis<bigcx> basis = make_pole_critical_basis<bigcx>(-11);
    static const wp_engine<bigcx> eng(basis.gamma1, basis.gamma2);
    return eng;
}

void bm_wp_double(benchmark::State& state) {
    const wp_engine<cx>& eng = ev11().engine();
    cx z(0.31, 0.24);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eng.wp(z));
        z += cx(1e-12, -3e-13); // defeat value caching without leaving the cell
    }
}
BENCHMARK(bm_wp_double);

void bm_wp_both_double(benchmark::State& state) {
    const wp_engine<cx>& eng = ev11().engine();
    cx z(0.31, 0.24), p, pp;
    for (auto _ : state) {
        eng.wp_both(z, p, pp);
        benchmark::DoNotOptimize(p);
        benchmark::DoNotOptimize(pp);
        z += cx(1e-12, -3e-13);
    }
}
BENCHMARK(bm_wp_both_double);

void bm_wp_big(benchmark::State& state) {
    const wp_engine<bigcx>& eng = big_engine();
    bigcx z(bigreal("0.31"), bigreal("0.24"));
    const bigcx step(bigreal("1e-30"), bigreal("-3e-31"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(eng.wp(z));
        z += step;
    }
}
BENCHMARK(bm_wp_big);

void bm_orbit_step(benchmark::State& state) {
    const EllipticEvaluator& ev = ev11();
    cx beta(1.0005, 0.0);
    cx z = pc11().gamma1 * 0.5;
    for (auto _ : state) {
        z = g_beta(ev, beta, z);
        benchmark::DoNotOptimize(z);
    }
}
BENCHMARK(bm_orbit_step);

void bm_param_map_h4(benchmark::State& state) {
    const EllipticEvaluator& ev = ev11();
    cx beta(1.0005, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(h_n(ev, beta, 4));
        beta += cx(1e-13, 0.0);
    }
}
BENCHMARK(bm_param_map_h4);

void bm_classify_depth8(benchmark::State& state) {
    const EllipticEvaluator& ev = ev11();
    PoleLocalData pd = estimate_pole_constants(ev, 0.25, 1.0 / 32.0);
    BuildConstants c = choose_constants(ev, pd);
    cx beta(1.002, 0.004);
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify_beta(ev, beta, 8, c.R1));
        beta += cx(1e-13, 0.0);
    }
}
BENCHMARK(bm_classify_depth8);

void bm_count_poles(benchmark::State& state) {
    const Lattice& lat = pc11().lattice;
    double R = 106.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            count_poles_in_half_annulus(lat, R, -1.5707963267948966, 0.25));
    }
}
BENCHMARK(bm_count_poles);

void bm_first_poles_16(benchmark::State& state) {
    const Lattice& lat = pc11().lattice;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            first_poles_in_half_annulus(lat, 106.3, -1.5707963267948966, 0.25, 16));
    }
}
BENCHMARK(bm_first_poles_16);

void bm_level2_root(benchmark::State& state) {
    const wp_engine<bigcx>& eng = big_engine();
    static const pole_critical_basis<bigcx> basis = make_pole_critical_basis<bigcx>(-11);
    auto poles = first_poles_in_half_annulus(pc11().lattice, 106.3,
                                             -1.5707963267948966, 0.25, 1);
    bigcx target = to_big(poles[0].b);
    bigcx seed = target / basis.e_star * bigcx(bigreal(1), bigreal("1e-3"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_param_root(eng, 1, target, seed));
    }
}
BENCHMARK(bm_level2_root);

void bm_raster_tile_32(benchmark::State& state) {
    const EllipticEvaluator& ev = ev11();
    for (auto _ : state) {
        int bounded = 0;
        for (int py = 0; py < 32; ++py)
            for (int px = 0; px < 32; ++px) {
                cx beta(1.0 + 0.05 * (2.0 * (px + 0.5) / 32.0 - 1.0),
                        0.05 * (1.0 - 2.0 * (py + 0.5) / 32.0));
                OrbitTrace t = classify_beta(ev, beta, 12, 6.6);
                if (t.status == OrbitStatus::Bounded) ++bounded;
            }
        benchmark::DoNotOptimize(bounded);
    }
}
BENCHMARK(bm_raster_tile_32)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
