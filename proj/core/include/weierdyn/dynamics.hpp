#pragma once

#include <vector>

#include "weierdyn/complexops.hpp"
#include "weierdyn/errors.hpp"
#include "weierdyn/weierstrass.hpp"

namespace weierdyn {

enum class OrbitStatus { Bounded, Escaping, Prepole, NearPoleUnresolved };

const char* to_string(OrbitStatus s);

struct OrbitTrace {
    cx beta;
    cx start;
    std::vector<cx> points; // points[k] = g_beta^k(start), points[0] = start
    OrbitStatus status = OrbitStatus::Bounded;
    // Escaping: growth certified through n; Prepole: points[n] is the hit;
    // Bounded: n = max_n; NearPoleUnresolved: index of the unresolved point
    int n = 0;
    cx pole;                           // lattice point hit when status == Prepole
    std::vector<double> radii_checked; // 2^k * R_base for k = 1..#steps
    double min_pole_dist = 0.0;        // over the evaluated points
};

// g_beta(z) = beta * wp(z); the pole guard of the evaluator applies
cx g_beta(const EllipticEvaluator& ev, cx beta, cx z);

// Iterates z0 under g_beta through max_n steps. Classification:
//   Prepole(n, b):   dist(points[n], lattice) < prepole_tol
//   Escaping(n):     |points[k]| >= 2^k * R_base for all 1 <= k <= n
//   NearPoleUnresolved(n): points[n] too close to a pole to evaluate but not
//                    within prepole_tol, or too large to reduce accurately
//   Bounded(max_n):  none of the above through max_n
// prepole_tol < 0 selects the default 1e-8 * |lambda1|.
OrbitTrace orbit(const EllipticEvaluator& ev, cx beta, cx z0, int max_n, double R_base,
                 double prepole_tol = -1.0);

struct ParamMapValue {
    int n = 1;
    cx beta;
    cx value;      // h_n(beta) = g_beta^n(c1)
    cx derivative; // dh_n/dbeta by the chain-rule recursion
    bool singular = false;
    int singular_index = -1; // first k with points[k] within tolerance of a pole
};

// Parameter map h_n(beta) = g_beta^n(c1) with c1 = lambda1/2 of ev's lattice.
// A singular orbit sets the flag; value/derivative hold the last finite level.
ParamMapValue h_n(const EllipticEvaluator& ev, cx beta, int n);

// Derivative by the closed product formula
//   h_n'(beta) = (1/beta) Prod_{k=1}^{n-1} g'(h_k) *
//                [h_1 + Sum_{k=2}^{n} h_k / Prod_{i=1}^{k-1} g'(h_i)]
// with g'(z) = beta*wp'(z); cross-checks the recursion used by h_n.
cx h_n_prime(const EllipticEvaluator& ev, cx beta, int n);

// Critical-orbit classification of the parameter beta; by the rotation
// symmetry of triangular lattices one orbit decides all three critical points.
OrbitTrace classify_beta(const EllipticEvaluator& ev, cx beta, int depth, double R_base);

// Shared critical-orbit runner: h[k] = g_beta^k(c1) and hp[k] = dh_k/dbeta for
// k = 0..n (h[0] = c1, hp[0] = 0, h[1] = beta*wp(c1)). Stops before evaluating
// at a point within `guard` of a lattice point and reports its index through
// *hit; returns false in that case with h/hp filled up to that level.
template <class C>
bool run_param_orbit(const wp_engine<C>& eng, const C& beta, int n, real_t<C> guard,
                     std::vector<C>& h, std::vector<C>& hp, int* hit = nullptr) {
    using R = real_t<C>;
    h.assign(static_cast<std::size_t>(n) + 1, C(R(0)));
    hp.assign(static_cast<std::size_t>(n) + 1, C(R(0)));
    h[0] = eng.critical_point(1);
    if (n == 0) return true;
    for (int k = 1; k <= n; ++k) {
        const C& z = h[k - 1];
        if (k > 1 || guard > R(0)) {
            R d = eng.dist_to_lattice(z);
            if (d < guard) {
                if (hit) *hit = k - 1;
                h.resize(static_cast<std::size_t>(k));
                hp.resize(static_cast<std::size_t>(k));
                return false;
            }
        }
        C p, pp;
        eng.wp_both(z, p, pp);
        h[k] = beta * p;
        hp[k] = p + beta * pp * hp[k - 1];
    }
    return true;
}

} // namespace weierdyn
