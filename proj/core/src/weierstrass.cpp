#include "weierdyn/weierstrass.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace weierdyn {

namespace {

double pi() { return const_pi<double>(); }

} // namespace

EllipticEvaluator::EllipticEvaluator(const Lattice& lat, int truncation_radius,
                                     double target_tolerance,
                                     double pole_exclusion_radius)
    : lat_(lat),
      eng_(lat.lambda1, lat.lambda2),
      inv_(weierdyn::invariants(lat, truncation_radius)),
      trunc_(truncation_radius),
      tol_(target_tolerance) {
    if (!(target_tolerance > 0.0))
        throw invalid_spec_error("target tolerance must be positive");
    excl_ = pole_exclusion_radius >= 0.0 ? pole_exclusion_radius
                                         : 1e-6 * std::abs(lat.lambda1);
}

void EllipticEvaluator::check_pole(cx z, cx& out_pole) const {
    cx b;
    double d = eng_.dist_to_lattice(z, &b);
    if (d < excl_)
        throw near_pole_error("evaluation inside the pole exclusion radius", b);
    out_pole = b;
}

cx EllipticEvaluator::wp(cx z) const {
    cx b;
    check_pole(z, b);
    return eng_.wp(z);
}

cx EllipticEvaluator::wp_prime(cx z) const {
    cx b;
    check_pole(z, b);
    return eng_.wp_prime(z);
}

std::pair<cx, cx> EllipticEvaluator::wp_both(cx z) const {
    cx b;
    check_pole(z, b);
    cx p, pp;
    eng_.wp_both(z, p, pp);
    return {p, pp};
}

void EllipticEvaluator::critical_points(cx& c1, cx& c2, cx& c3) const {
    c1 = lat_.lambda1 / 2.0;
    c2 = lat_.lambda2 / 2.0;
    c3 = (lat_.lambda1 + lat_.lambda2) / 2.0;
}

void EllipticEvaluator::critical_values(cx& e1, cx& e2, cx& e3) const {
    cx c1, c2, c3;
    critical_points(c1, c2, c3);
    e1 = eng_.wp(c1);
    e2 = eng_.wp(c2);
    e3 = eng_.wp(c3);
}

LaurentFactors EllipticEvaluator::laurent_factors(cx z, double regime_radius) const {
    double rr = regime_radius > 0.0 ? regime_radius : std::abs(lat_.lambda1) / 3.0;
    cx b;
    double d = eng_.dist_to_lattice(z, &b);
    if (!(d < rr))
        throw wrong_regime_error("point is not within the pole-local regime radius");
    LaurentFactors out;
    out.pole = b;
    if (d == 0.0) {
        out.G = cx(1.0, 0.0);
        out.H = cx(-2.0, 0.0);
        return out;
    }
    cx w = z - b;
    cx w2 = w * w;
    cx p, pp;
    eng_.wp_both(z, p, pp);
    out.G = p * w2;
    out.H = pp * w2 * w;
    return out;
}

// Pair-summed defining series at the centered representative z_red of z.
// Ring k > N contributes at most 8k points with |w| >= k*mu, and the
// precondition N*mu >= 2|z_red| keeps |z^2 - w^2| >= (3/4)|w|^2, giving the
// closed-form tails below.
DirectValue EllipticEvaluator::wp_direct(cx z, int N) const {
    cx b;
    check_pole(z, b);
    cx z_red;
    long long l, m;
    eng_.reduce_centered(z, z_red, l, m);
    double az = std::abs(z_red);
    double mu = lat_.min_cell_dist;
    if (N < 1 || !(N * mu >= 2.0 * az))
        throw invalid_spec_error("truncation order too small for a certified tail");

    cx z2 = z_red * z_red;
    cx z4 = z2 * z2;
    std::complex<long double> acc(0.0L);
    auto add_pair = [&](long long pl, long long pm) {
        cx w = lat_.point(pl, pm);
        cx w2 = w * w;
        cx dz = z2 - w2;
        cx term = (6.0 * z2 * w2 - 2.0 * z4) / (w2 * dz * dz);
        acc += std::complex<long double>(term.real(), term.imag());
    };
    for (long long pl = 1; pl <= N; ++pl)
        for (long long pm = -N; pm <= N; ++pm) add_pair(pl, pm);
    for (long long pm = 1; pm <= N; ++pm) add_pair(0, pm);

    std::complex<long double> head = 1.0L / std::complex<long double>(z2.real(), z2.imag());
    std::complex<long double> total = head + acc;
    DirectValue out;
    out.value = cx(static_cast<double>(total.real()), static_cast<double>(total.imag()));
    out.tail = 48.0 * az * az / (mu * mu * mu * mu * double(N) * double(N));
    return out;
}

DirectValue EllipticEvaluator::wp_prime_direct(cx z, int N) const {
    cx b;
    check_pole(z, b);
    cx z_red;
    long long l, m;
    eng_.reduce_centered(z, z_red, l, m);
    double az = std::abs(z_red);
    double mu = lat_.min_cell_dist;
    if (N < 1 || !(N * mu >= 2.0 * az))
        throw invalid_spec_error("truncation order too small for a certified tail");

    cx z2 = z_red * z_red;
    cx z3 = z2 * z_red;
    std::complex<long double> acc(0.0L);
    auto add_pair = [&](long long pl, long long pm) {
        cx w = lat_.point(pl, pm);
        cx w2 = w * w;
        cx dz = z2 - w2;
        cx term = (2.0 * z3 + 6.0 * z_red * w2) / (dz * dz * dz);
        acc += std::complex<long double>(term.real(), term.imag());
    };
    for (long long pl = 1; pl <= N; ++pl)
        for (long long pm = -N; pm <= N; ++pm) add_pair(pl, pm);
    for (long long pm = 1; pm <= N; ++pm) add_pair(0, pm);

    std::complex<long double> head = 1.0L / std::complex<long double>(z3.real(), z3.imag());
    std::complex<long double> total = -2.0L * (head + acc);
    DirectValue out;
    out.value = cx(static_cast<double>(total.real()), static_cast<double>(total.imag()));
    out.tail = 124.0 * az / (mu * mu * mu * mu * double(N) * double(N));
    return out;
}

PoleLocalData estimate_pole_constants(const EllipticEvaluator& ev, double eps0, double r) {
    if (!(eps0 > 0.0)) throw invalid_spec_error("eps0 must be positive");
    if (!(r > 0.0 && r <= 0.5)) throw invalid_spec_error("r must lie in (0, 1/2]");
    const Lattice& lat = ev.lattice();
    // keep the ball a third of the way to the nearest other pole
    double nn = std::min({std::abs(lat.lambda1), std::abs(lat.lambda2),
                          std::abs(lat.lambda1 + lat.lambda2),
                          std::abs(lat.lambda1 - lat.lambda2)});
    eps0 = std::min(eps0, nn / 3.0);

    const double dphi = std::asin(r); // arg beta range over |beta - 1| = r
    const double spread_cap = pi() / 4.0;

    struct GridStats {
        double supG, infG, supH, infH, argGmin, argGmax;
    };
    auto sample = [&](double eps, int na, int nr) {
        GridStats s;
        s.supG = 1.0;
        s.infG = 1.0; // rho -> 0 limits: G -> 1, H -> -2
        s.supH = 2.0;
        s.infH = 2.0;
        s.argGmin = 0.0;
        s.argGmax = 0.0;
        for (int i = 0; i < nr; ++i) {
            double rho = eps * (i + 1.0) / nr;
            for (int j = 0; j < na; ++j) {
                double th = -pi() + 2.0 * pi() * (j + 0.5) / na;
                cx zp = rho * cx(std::cos(th), std::sin(th));
                cx p, pp;
                ev.engine().wp_both(zp, p, pp);
                cx zp2 = zp * zp;
                cx G = p * zp2;
                cx H = pp * zp2 * zp;
                double aG = std::abs(G), aH = std::abs(H);
                s.supG = std::max(s.supG, aG);
                s.infG = std::min(s.infG, aG);
                s.supH = std::max(s.supH, aH);
                s.infH = std::min(s.infH, aH);
                double ag = std::atan2(G.imag(), G.real());
                s.argGmin = std::min(s.argGmin, ag);
                s.argGmax = std::max(s.argGmax, ag);
            }
        }
        return s;
    };

    for (int halving = 0; halving <= 40; ++halving) {
        int na = 96, nr = 64;
        GridStats s = sample(eps0, na, nr);
        if (s.argGmax - s.argGmin + 2.0 * dphi < spread_cap && s.infG > 0.0 &&
            s.infH > 0.0) {
            // refine the grid until K1, K2 move by less than 1%
            double k1 = std::max(s.supG, 1.0 / s.infG);
            double k2 = std::max(s.supH, 1.0 / s.infH);
            for (int pass = 0; pass < 3; ++pass) {
                na *= 2;
                nr *= 2;
                GridStats t = sample(eps0, na, nr);
                double k1n = std::max(t.supG, 1.0 / t.infG);
                double k2n = std::max(t.supH, 1.0 / t.infH);
                bool stable = std::fabs(k1n - k1) <= 0.01 * k1 &&
                              std::fabs(k2n - k2) <= 0.01 * k2;
                s = t;
                k1 = k1n;
                k2 = k2n;
                if (stable) break;
            }
            double spread = s.argGmax - s.argGmin + 2.0 * dphi;
            if (spread < spread_cap) {
                PoleLocalData out;
                out.pole = cx(0.0, 0.0);
                out.eps0 = eps0;
                out.r = r;
                out.K1 = std::max(s.supG, 1.0 / s.infG);
                out.K2 = std::max(s.supH, 1.0 / s.infH);
                out.C1 = 2.0 * out.K1;
                out.C2 = 2.0 * out.K2;
                out.M1 = s.argGmin - dphi;
                out.M2 = s.argGmax + dphi;
                out.grid_points = na * nr;
                out.arg_spread = spread;
                return out;
            }
        }
        eps0 /= 2.0;
    }
    throw constants_not_found_error(
        "argument spread of the pole-local factor did not contract below pi/4");
}

} // namespace weierdyn
