#pragma once

#include <cstdint>
#include <vector>

#include "weierdyn/complexops.hpp"
#include "weierdyn/errors.hpp"

namespace weierdyn {

// Lattice points are b = l*lambda1 + m*lambda2 for integer (l, m).
struct Lattice {
    cx lambda1{1.0, 0.0};
    cx lambda2{0.0, 1.0};
    int orientation = 1;        // sign of Im(lambda2/lambda1)
    double cell_area = 1.0;     // area of the fundamental parallelogram
    double cell_diameter = 0.0; // longest diagonal of the parallelogram
    double min_cell_dist = 0.0; // min |x*lambda1 + y*lambda2| over max(|x|,|y|) = 1

    cx point(long long l, long long m) const {
        return static_cast<double>(l) * lambda1 + static_cast<double>(m) * lambda2;
    }
    // lambda2 = e^{2 pi i/3} lambda1 within tol*|lambda1|
    bool is_triangular(double tol = 1e-9) const;
    bool is_square(double tol = 1e-9) const;
};

Lattice make_lattice(cx lambda1, cx lambda2);

struct LatticeInvariants {
    cx g2{0.0, 0.0};
    cx g3{0.0, 0.0};
    int truncation_radius = 0;
    double tail_g2 = 0.0; // certified bound on |g2 - truncated sum|
    double tail_g3 = 0.0;
    double tail_bound() const { return tail_g2 > tail_g3 ? tail_g2 : tail_g3; }
};

// Truncated Eisenstein sums over 0 < |w| <= truncation_radius * min(|l1|,|l2|)
// with integral-comparison tail bounds.
LatticeInvariants invariants(const Lattice& lat, int truncation_radius = 200);

struct Reduction {
    cx z_red;     // z - l*lambda1 - m*lambda2 with coordinates in [0,1)
    long long l = 0;
    long long m = 0;
};

Reduction reduce_to_fundamental(const Lattice& lat, cx z);

// distance to the nearest lattice point; optionally reports that point
double dist_to_lattice(const Lattice& lat, cx z, cx* nearest = nullptr);

// Triangular lattice alpha*[1, e^{2 pi i/3}] with g3 = g3_target (g2 = 0).
Lattice equianharmonic_lattice(double g3_target);

struct PoleCriticalLattice {
    Lattice lattice;
    long m = -1;   // wp(gamma1/2) = m*gamma1, odd and negative
    cx gamma1;
    cx gamma2;
    cx e_star;     // wp(gamma1/2) = m*gamma1, a lattice point
};

// Triangular lattice whose critical values are lattice points (poles).
PoleCriticalLattice make_pole_critical_lattice(long m);

// Circular sector {z0 + rho e^{i theta} : 0 <= rho <= eps, |theta| <= 3 pi/8}.
struct Segment {
    cx apex;
    double eps = 0.0;

    static double angular_halfwidth() { return 3.0 * const_pi<double>() / 8.0; }

    bool contains(cx z, double len_slack = 0.0, double ang_slack = 0.0) const;
    double min_abs() const;
    double max_abs() const;
    // min over the segment of Im(e^{-i phi} z); positive iff the segment lies
    // strictly inside the upper half-plane rotated by phi
    double halfplane_margin(double phi) const;
    cx boundary_point(double t) const; // t in [0,1), loop: ray in, arc, ray out
    double area() const;               // 3 pi eps^2 / 8
};

// (rho_unit, theta) of the boundary loop at parameter t in [0,1);
// rho_unit in [0,1] scales eps. Shared by all precisions.
void segment_boundary_param(double t, double& rho_unit, double& theta);

struct PoleEntry {
    cx b;
    long long l = 0;
    long long m = 0;
};

// All lattice points b with U(b,eps) inside P+(0,R,2R) =
// {R < |z| < 2R, phi < arg z < phi + pi}, sorted by (|b|, arg b).
std::vector<PoleEntry> poles_in_half_annulus(const Lattice& lat, double R, double phi,
                                             double eps);

// Exact count of the same set without materializing it (per-row interval
// arithmetic); usable at radii where enumeration is infeasible.
std::uint64_t count_poles_in_half_annulus(const Lattice& lat, double R, double phi,
                                          double eps);

// First k entries of poles_in_half_annulus in the same order, found by
// growing a thin annulus from the inner edge.
std::vector<PoleEntry> first_poles_in_half_annulus(const Lattice& lat, double R,
                                                   double phi, double eps,
                                                   std::size_t k);

} // namespace weierdyn
