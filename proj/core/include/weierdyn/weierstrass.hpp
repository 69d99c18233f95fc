#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "weierdyn/complexops.hpp"
#include "weierdyn/errors.hpp"
#include "weierdyn/lattice.hpp"

namespace weierdyn {

// Evaluator core for wp and wp' on the lattice [lambda1, lambda2], templated
// on the complex type (std::complex<double> or a multiprecision complex).
//
// wp(z) = pi^2 [ -1/3 + 1/sin^2(pi u) + sum_{m>=1} ( 1/sin^2(pi(u - m tau))
//         + 1/sin^2(pi(u + m tau)) - 2/sin^2(pi m tau) ) ] / lambda1^2
// with u = z/lambda1 reduced to centered lattice coordinates. Each row is a
// closed form in v = e^{+-2 pi i u} q^m, q = e^{2 pi i tau}:
//   1/sin^2(pi w)       = -4v/(1-v)^2
//   cos(pi w)/sin^3(pi w) = -4i v(1+v)/(1-v)^3
// so the row sum converges geometrically at rate |q| and stays fully accurate
// next to poles (no cancellation: the m = 0 term uses real sin/cos/sinh/cosh).
// Invariants come from the same nome: g2 = (4 pi^4/3) E4(tau) / lambda1^4,
// g3 = (8 pi^6/27) E6(tau) / lambda1^6 with E4/E6 Lambert series.
template <class C>
class wp_engine {
  public:
    using R = real_t<C>;

    wp_engine(const C& lambda1, const C& lambda2) : lam1_(lambda1), lam2_(lambda2) {
        using std::abs;
        using std::ceil;
        using std::exp;
        using std::log;
        pi_ = const_pi<R>();
        R a1 = abs(lambda1), a2 = abs(lambda2);
        if (!(a1 > 0) || !(a2 > 0)) throw invalid_lattice_error("zero lattice generator");
        C ratio = lambda2 / lambda1;
        R imr = ratio.imag();
        R imr_abs = imr < 0 ? R(-imr) : imr;
        if (!(imr_abs > abs(ratio) * R(1e-12)))
            throw invalid_lattice_error("collinear lattice generators");
        if (imr > 0) {
            b1_ = lambda1;
            b2_ = lambda2;
        } else {
            b1_ = lambda2;
            b2_ = lambda1;
        }
        tau_ = b2_ / b1_;
        R imtau = tau_.imag();
        R eps = std::numeric_limits<R>::epsilon();
        // rows M with 4|q|^{M-1/2} below eps of the unit-scale bracket
        R need = (log(R(40)) + pi_ * imtau - log(eps)) / (2 * pi_ * imtau);
        long M = static_cast<long>(dbl(ceil(need))) + 2;
        if (M < 3) M = 3;
        if (M > 20000) throw invalid_lattice_error("generator ratio too close to real");
        rows_ = static_cast<int>(M);
        q_ = exp(C(R(0), R(2) * pi_) * tau_);
        qpow_.resize(rows_ + 1);
        cm_.resize(rows_ + 1);
        qpow_[0] = C(R(1));
        for (int k = 1; k <= rows_; ++k) {
            qpow_[k] = qpow_[k - 1] * q_;
            C d = C(R(1)) - qpow_[k];
            cm_[k] = R(-4) * qpow_[k] / (d * d);
        }
        compute_invariants();
        C b1sq = b1_ * b1_;
        inv_b1_2_ = C(R(1)) / b1sq;
        inv_b1_3_ = inv_b1_2_ / b1_;
    }

    const C& lambda1() const { return lam1_; }
    const C& lambda2() const { return lam2_; }
    const C& tau() const { return tau_; }
    int rows() const { return rows_; }
    const C& g2() const { return g2_; }
    const C& g3() const { return g3_; }

    C critical_point(int i) const {
        if (i == 1) return lam1_ / R(2);
        if (i == 2) return lam2_ / R(2);
        return (lam1_ + lam2_) / R(2);
    }

    C wp(const C& z) const {
        C p, pp;
        eval(z, true, false, p, pp);
        return p;
    }

    C wp_prime(const C& z) const {
        C p, pp;
        eval(z, false, true, p, pp);
        return pp;
    }

    void wp_both(const C& z, C& p, C& pp) const { eval(z, true, true, p, pp); }

    // z = z_red + l*lambda1 + m*lambda2 with coordinates of z_red in [-1/2, 1/2]
    void reduce_centered(const C& z, C& z_red, long long& l, long long& m) const {
        using std::round;
        R t1, t2;
        coords(z, t1, t2);
        R n1 = round(t1), n2 = round(t2);
        z_red = C(t1 - n1) * b1_ + C(t2 - n2) * b2_;
        long long i1 = static_cast<long long>(dbl(n1));
        long long i2 = static_cast<long long>(dbl(n2));
        if (b1_swapped()) {
            l = i2;
            m = i1;
        } else {
            l = i1;
            m = i2;
        }
    }

    R dist_to_lattice(const C& z, C* nearest = nullptr) const {
        using std::abs;
        using std::round;
        R t1, t2;
        coords(z, t1, t2);
        R n1 = round(t1), n2 = round(t2);
        R f1 = t1 - n1, f2 = t2 - n2;
        R best = R(-1);
        int bi = 0, bj = 0;
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                C cand = C(f1 - R(i)) * b1_ + C(f2 - R(j)) * b2_;
                R d = abs(cand);
                if (best < 0 || d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (nearest) *nearest = C(n1 + R(bi)) * b1_ + C(n2 + R(bj)) * b2_;
        return best;
    }

  private:
    bool b1_swapped() const {
        // true when the evaluation basis is (lambda2, lambda1)
        return !(b1_.real() == lam1_.real() && b1_.imag() == lam1_.imag());
    }

    void coords(const C& z, R& t1, R& t2) const {
        C u = z / b1_;
        t2 = u.imag() / tau_.imag();
        t1 = u.real() - t2 * tau_.real();
    }

    void compute_invariants() {
        // Lambert series for E4/E6; sigma_k computed by divisor sieve.
        using std::abs;
        int nmax = 3 * rows_ + 8;
        std::vector<R> s3(nmax + 1, R(0)), s5(nmax + 1, R(0));
        for (int d = 1; d <= nmax; ++d) {
            R rd(d);
            R d3 = rd * rd * rd;
            R d5 = d3 * rd * rd;
            for (int n = d; n <= nmax; n += d) {
                s3[n] += d3;
                s5[n] += d5;
            }
        }
        C qn = q_;
        C a4(R(0)), a6(R(0));
        for (int n = 1; n <= nmax; ++n) {
            a4 += s3[n] * qn;
            a6 += s5[n] * qn;
            qn *= q_;
        }
        R pi2 = pi_ * pi_;
        R pi4 = pi2 * pi2;
        R pi6 = pi4 * pi2;
        C e4 = C(R(1)) + R(240) * a4;
        C e6 = C(R(1)) - R(504) * a6;
        C b1sq = b1_ * b1_;
        C b14 = b1sq * b1sq;
        C b16 = b14 * b1sq;
        g2_ = (R(4) * pi4 / R(3)) * e4 / b14;
        g3_ = (R(8) * pi6 / R(27)) * e6 / b16;
    }

    void eval(const C& z, bool want_p, bool want_pp, C& p, C& pp) const {
        using std::cos;
        using std::exp;
        using std::round;
        using std::sin;
        R t1, t2;
        coords(z, t1, t2);
        R f1 = t1 - round(t1), f2 = t2 - round(t2);
        C u = C(f1) + C(f2) * tau_;
        R x = u.real(), y = u.imag();
        R px = pi_ * x, py = pi_ * y;
        R sx = sin(px), cxr = cos(px);
        R em = exp(-py);
        R ep = R(1) / em;
        R ch = (ep + em) / 2, sh = (ep - em) / 2;
        C s0(sx * ch, cxr * sh);  // sin(pi u)
        C c0(cxr * ch, -sx * sh); // cos(pi u)
        C E(em * cxr, em * sx);   // e^{i pi u}
        C Einv(ep * cxr, -ep * sx);
        C E2 = E * E, Einv2 = Einv * Einv;
        const C one(R(1));
        C inv_s0 = one / s0;
        C inv_s02 = inv_s0 * inv_s0;
        C psum(R(0)), ppsum(R(0));
        C vp = Einv2, vm = E2;
        const C m4i(R(0), R(-4));
        for (int m = 1; m <= rows_; ++m) {
            vp = vp * q_;
            vm = vm * q_;
            C dp = one - vp, dm = one - vm;
            if (want_p) {
                C fp = R(-4) * vp / (dp * dp);
                C fm = R(-4) * vm / (dm * dm);
                psum += fp + fm - R(2) * cm_[m];
            }
            if (want_pp) {
                C gp = m4i * (vp * (one + vp)) / (dp * dp * dp);
                C gm = m4i * (vm * (one + vm)) / (dm * dm * dm);
                ppsum += gp - gm;
            }
        }
        R pi2 = pi_ * pi_;
        if (want_p) p = pi2 * (C(R(-1) / R(3)) + inv_s02 + psum) * inv_b1_2_;
        if (want_pp)
            pp = R(-2) * pi2 * pi_ * (c0 * inv_s0 * inv_s02 + ppsum) * inv_b1_3_;
    }

    C lam1_, lam2_;
    C b1_, b2_;
    C tau_;
    C q_;
    R pi_;
    int rows_ = 0;
    std::vector<C> qpow_;
    std::vector<C> cm_;
    C g2_, g3_;
    C inv_b1_2_, inv_b1_3_;
};

// Pole-critical triangular basis at arbitrary precision:
// gamma1 = principal cube root of wp_[1,rho](1/2)/m (negative real for m < 0,
// so arg gamma1 = pi/3), gamma2 = e^{2 pi i/3} gamma1. By homogeneity
// wp_Gamma(gamma1/2) = m*gamma1 exactly.
template <class C>
struct pole_critical_basis {
    C gamma1, gamma2, e_star;
    long m = -1;
};

template <class C>
pole_critical_basis<C> make_pole_critical_basis(long m) {
    using R = real_t<C>;
    if (m >= 0 || m % 2 == 0)
        throw invalid_spec_error("pole-critical construction needs odd negative m");
    using std::cbrt;
    using std::sqrt;
    const R half = R(1) / 2;
    const R s3h = sqrt(R(3)) / 2;
    const C rho(-half, s3h); // e^{2 pi i/3}
    wp_engine<C> unit(C(R(1)), rho);
    C e1u = unit.wp(C(half));
    R mag = cbrt(e1u.real() / R(-m));
    pole_critical_basis<C> out;
    out.m = m;
    out.gamma1 = mag * C(half, s3h); // e^{i pi/3}
    out.gamma2 = rho * out.gamma1;
    out.e_star = R(m) * out.gamma1;
    return out;
}

struct LaurentFactors {
    cx G;    // wp(z) (z-b)^2, -> 1 at the pole
    cx H;    // wp'(z) (z-b)^3, -> -2 at the pole
    cx pole; // nearest lattice point b
};

struct DirectValue {
    cx value;
    double tail; // certified truncation bound
};

// Configured double-precision evaluator: row-series evaluation plus the
// direct-summation certification path and pole guards.
class EllipticEvaluator {
  public:
    explicit EllipticEvaluator(const Lattice& lat, int truncation_radius = 200,
                               double target_tolerance = 1e-12,
                               double pole_exclusion_radius = -1.0);

    const Lattice& lattice() const { return lat_; }
    const LatticeInvariants& invariants() const { return inv_; }
    int truncation_radius() const { return trunc_; }
    double target_tolerance() const { return tol_; }
    double pole_exclusion_radius() const { return excl_; }
    const wp_engine<cx>& engine() const { return eng_; }

    cx g2() const { return eng_.g2(); } // nome series, machine accuracy
    cx g3() const { return eng_.g3(); }

    cx wp(cx z) const;       // refuses dist(z, lattice) < pole_exclusion_radius
    cx wp_prime(cx z) const;
    std::pair<cx, cx> wp_both(cx z) const;

    cx wp_unchecked(cx z) const { return eng_.wp(z); }
    cx wp_prime_unchecked(cx z) const { return eng_.wp_prime(z); }

    void critical_points(cx& c1, cx& c2, cx& c3) const;
    void critical_values(cx& e1, cx& e2, cx& e3) const;

    // pole-local factors; z must lie within regime_radius (default |lambda1|/3)
    // of a lattice point
    LaurentFactors laurent_factors(cx z, double regime_radius = -1.0) const;

    // defining-series truncation over pairs max(|l|,|m|) <= N with certified
    // tail; the cross-check path for the row-series evaluation
    DirectValue wp_direct(cx z, int N) const;
    DirectValue wp_prime_direct(cx z, int N) const;

  private:
    void check_pole(cx z, cx& out_pole) const;

    Lattice lat_;
    wp_engine<cx> eng_;
    LatticeInvariants inv_;
    int trunc_;
    double tol_;
    double excl_;
};

struct PoleLocalData {
    cx pole;           // representative; periodicity makes the data universal
    double eps0 = 0.0; // certified ball radius after halvings
    double r = 0.0;    // radius of the parameter disk B(1, r) the data covers
    double K1 = 1.0;   // max(sup|G|, 1/inf|G|) on B(pole, eps0)
    double K2 = 2.0;   // same for H
    double C1 = 2.0;   // 2 K1
    double C2 = 4.0;   // 2 K2
    double M1 = 0.0;   // min arg(beta G) over the grid and |beta - 1| = r
    double M2 = 0.0;   // max
    int grid_points = 0;
    double arg_spread = 0.0; // M2 - M1
};

// Grid estimation of the pole-local constants; halves eps0 until the
// argument spread M2 - M1 drops below pi/4, refining the grid until K1, K2
// are stable to 1%.
PoleLocalData estimate_pole_constants(const EllipticEvaluator& ev, double eps0, double r);

} // namespace weierdyn
