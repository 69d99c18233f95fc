#pragma once

#include <cstdint>
#include <vector>

#include "weierdyn/bigfloat.hpp"
#include "weierdyn/complexops.hpp"
#include "weierdyn/dynamics.hpp"
#include "weierdyn/errors.hpp"
#include "weierdyn/lattice.hpp"
#include "weierdyn/weierstrass.hpp"

namespace weierdyn {

// Constants of the nested-cylinder construction. Annulus radii grow as
// R_n = a^{n-1} R1; segments have radius eps; parameters live in B(1, r).
struct BuildConstants {
    double eps0 = 0.0; // certified pole-local ball
    double eps = 0.0;  // segment radius, dyadic
    double r = 0.0;    // parameter-disk radius
    double R1 = 0.0;   // U(e_star, eps) lies in the annulus (R1, 2 R1)
    double R2 = 0.0;   // = a * R1
    double a0 = 0.0;   // max of the seven growth-constant candidates
    double a = 0.0;    // >= 2 a0 (or the requested value if larger)
    double phi = 0.0;  // half-plane direction of the target annuli
    double alpha = 0.0; // sin(pi/8)
    double C1 = 0.0, C2 = 0.0, M1 = 0.0, M2 = 0.0, K1 = 0.0, K2 = 0.0;
    cx e_star;           // wp(c1), apex of the level-1 segment
    double minU = 0.0, maxU = 0.0; // |z| range over U(e_star, eps)
    double a0_terms[7] = {0, 0, 0, 0, 0, 0, 0};

    double Rn(int n) const; // a^{n-1} * R1
};

// One cylinder A_n: the preimage of the segment U(b, eps) under the parameter
// map h_n, represented by its root, an interior sample, and a sampled
// boundary polygon. Parameters are kept at extended precision; by level 4
// cylinder diameters drop below double ulp at |beta| ~ 1.
struct Cylinder {
    int id = 0;
    int parent = -1;
    int level = 1;
    PoleEntry target; // apex pole b^{(n)} with its lattice indices
    bigcx root;       // h_n(root) = b
    bigcx interior;   // h_n(interior) = b + eps/2
    std::vector<bigcx> boundary; // preimages of the boundary loop of U(b, eps)
    std::vector<int> children;
    double diam = 0.0;      // max pairwise distance of boundary samples
    double area = 0.0;      // shoelace area of the sampled polygon
    double deriv_min = 0.0; // |h_n'| over boundary samples
    double deriv_max = 0.0;
    double residual_max = 0.0; // max |h_n(sample) - target| / eps
    bool nested_ok = true;     // all samples inside the parent polygon

    cx root_d() const { return to_cx(root); }
    cx interior_d() const { return to_cx(interior); }
    // boundary offsets from the root stay resolvable in double at all levels
    std::vector<cx> boundary_offsets() const;
};

struct CylinderTree {
    std::vector<Cylinder> nodes; // ids are indices; node 0 is the level-1 root
    BuildConstants consts;
    long m = 0; // pole-critical lattice parameter
    int depth = 0;
    int branching = 0;
    // full-branching density measured at level 1 (every available level-2
    // pole solved, child areas by the conformal estimate)
    double sweep_delta1 = 0.0;
    std::uint64_t sweep_count = 0;
    std::uint64_t sweep_failures = 0;
};

struct LevelStats {
    int level = 0;
    std::uint64_t count = 0;       // cylinders built at this level
    std::uint64_t n_available = 0; // poles available at this level
    double diam_max = 0.0;
    double diam_bound_upper = 0.0;
    double diam_bound_lower = 0.0;
    double distortion_max = 0.0;
    double distortion_bound = 0.0;
    double delta_built = 0.0;    // min over parents, built children only
    double delta_full_est = 0.0; // n_available(next) * min child area / parent area
    double delta_bound = 0.0;
    double residual_max = 0.0;
};

// Derivative, diameter, distortion, and density bounds of the construction
// in closed form; log variants avoid underflow at large n.
double log_scale_factor(const BuildConstants& c, int n); // log X_n
double deriv_lower_bound(const BuildConstants& c, int n); // X_n / (2(1+r))
double deriv_upper_bound(const BuildConstants& c, int n); // 5/(2(1-r)) 2^{3(n-1)/2} X_n
double diam_upper_bound(const BuildConstants& c, int n);  // 4 eps (1+r) / X_n
double log_diam_upper_bound(const BuildConstants& c, int n);
double diam_lower_bound(const BuildConstants& c, int n);
double distortion_bound(const BuildConstants& c, int n);
double density_bound(const BuildConstants& c, int n); // children of a level-n parent
double log_density_bound(const BuildConstants& c, int n);

// Selects eps (largest dyadic value meeting the segment conditions, with
// injectivity of wp on U checked by sampling), R1, the half-plane direction
// phi (verified by preimage sampling), the seven-term growth constant a0, and
// a = max(2 a0, a_request).
BuildConstants choose_constants(const EllipticEvaluator& ev, const PoleLocalData& pd,
                                double a_request = 0.0);

// Root of h_n(beta) = target near seed: damped Newton at extended precision.
bigcx solve_param_root(const wp_engine<bigcx>& eng, int n, const bigcx& target,
                       bigcx seed, double rel_tol = 1e-30, int max_steps = 60);

// Parameter with h_n(beta) = b inside the parent cylinder (level n-1), found
// by Newton from the pole-local asymptotic seed at the parent root, with a
// winding-number subdivision fallback.
cx solve_prepole_param(const PoleCriticalLattice& pc, const BuildConstants& c,
                       const Cylinder& parent, const PoleEntry& target, int n);

// Builds the nested family to `depth` with `branching` target poles per level
// (the smallest-|b| valid poles, shared by all parents of the level). Node 0
// is the exact level-1 pullback of U(e_star, eps) under the linear h_1.
// full_sweep additionally measures the full-branching level-1 density.
CylinderTree build_family(const PoleCriticalLattice& pc, const BuildConstants& c,
                          int depth, int branching, bool full_sweep = true);

std::vector<LevelStats> family_stats(const CylinderTree& tree);

// Interior parameter of the deepest cylinder along one branch;
// pole_choices[k] selects among the available poles at level k+2 (0 = nearest).
// The critical orbit of the result satisfies the doubling growth certificate.
// Extended precision is part of the contract: by depth 5 the cylinder is
// narrower than a double ulp at |beta| ~ 1 and rounding loses the orbit.
bigcx escaping_parameter(const PoleCriticalLattice& pc, const BuildConstants& c,
                         const std::vector<std::size_t>& pole_choices, int depth);

} // namespace weierdyn
