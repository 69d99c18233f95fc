#include "weierdyn/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace weierdyn {

namespace {

double pi() { return const_pi<double>(); }

double shoelace_area(const std::vector<cx>& p) {
    double s = 0.0;
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++)
        s += p[j].real() * p[i].imag() - p[i].real() * p[j].imag();
    return std::fabs(s) / 2.0;
}

double polygon_diameter(const std::vector<cx>& p) {
    double best = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            best = std::max(best, std::abs(p[i] - p[j]));
    return best;
}

bool point_in_polygon(cx z, const std::vector<cx>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        double yi = poly[i].imag(), yj = poly[j].imag();
        if ((yi > z.imag()) == (yj > z.imag())) continue;
        double xi = poly[i].real(), xj = poly[j].real();
        double xint = xi + (z.imag() - yi) * (xj - xi) / (yj - yi);
        if (z.real() < xint) in = !in;
    }
    return in;
}

// injectivity of wp on the segment U(0, eps), checked by sampling
bool injective_on_segment(const wp_engine<cx>& eng, double eps) {
    const int nr = 24, na = 40;
    const double hw = Segment::angular_halfwidth();
    std::vector<cx> pts, vals;
    pts.reserve(nr * na);
    for (int i = 0; i < nr; ++i) {
        double rho = eps * (i + 1.0) / nr;
        for (int j = 0; j < na; ++j) {
            double th = -hw + 2.0 * hw * (j + 0.5) / na;
            cx z = rho * cx(std::cos(th), std::sin(th));
            pts.push_back(z);
            vals.push_back(eng.wp(z));
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (std::abs(pts[i] - pts[j]) <= 1e-6 * eps) continue;
            double scale = std::abs(vals[i]) + std::abs(vals[j]);
            if (std::abs(vals[i] - vals[j]) < 1e-9 * scale) return false;
        }
    return true;
}

// preimage of w = wmag e^{i warg} under g_beta inside U(0, eps) by the
// fixed point z <- sqrt(beta wp(z) z^2 / w), branch chosen inside the sector
bool preimage_in_segment(const wp_engine<cx>& eng, cx beta, double wmag, double warg,
                         double eps) {
    double abeta = std::atan2(beta.imag(), beta.real());
    double mag0 = std::sqrt(std::abs(beta) / wmag);
    double ang0 = (abeta - warg) / 2.0;
    {
        double a1 = wrap_angle(ang0), a2 = wrap_angle(ang0 + pi());
        ang0 = std::fabs(a1) <= std::fabs(a2) ? a1 : a2;
    }
    cx z = mag0 * cx(std::cos(ang0), std::sin(ang0));
    if (std::abs(z) > eps) z *= eps / std::abs(z) * 0.9;
    for (int it = 0; it < 60; ++it) {
        cx G = eng.wp(z) * z * z;
        cx bg = beta * G;
        double mag = std::sqrt(std::abs(bg) / wmag);
        double half = (std::atan2(bg.imag(), bg.real()) - warg) / 2.0;
        double a1 = wrap_angle(half), a2 = wrap_angle(half + pi());
        double ang = std::fabs(a1) <= std::fabs(a2) ? a1 : a2;
        cx znew = mag * cx(std::cos(ang), std::sin(ang));
        double step = std::abs(znew - z);
        z = znew;
        if (step < 1e-14 * eps) break;
    }
    Segment u{cx(0.0, 0.0), eps};
    if (!u.contains(z, 1e-9 * eps, 1e-9)) return false;
    cx w = wmag * cx(std::cos(warg), std::sin(warg));
    cx fwd = beta * eng.wp(z);
    return std::abs(fwd - w) <= 1e-6 * wmag;
}

// sampled containment of {|w| >= R2, phi <= arg w <= phi + pi} in the image
// of every segment under every g_beta with |beta - 1| = r
bool verify_halfplane_coverage(const wp_engine<cx>& eng, double R2, double phi,
                               double r, double eps) {
    std::vector<cx> betas;
    betas.push_back(cx(1.0, 0.0));
    for (int k = 0; k < 8; ++k)
        betas.push_back(cx(1.0, 0.0) + r * cx(std::cos(2 * pi() * k / 8.0),
                                              std::sin(2 * pi() * k / 8.0)));
    for (const cx& beta : betas) {
        for (int j = 0; j < 96; ++j) { // inner arc
            double warg = phi + pi() * (j + 0.5) / 96.0;
            if (!preimage_in_segment(eng, beta, R2, warg, eps)) return false;
        }
        for (int j = 0; j <= 9; ++j) { // the two edge rays, outward
            double wmag = R2 * std::pow(2.0, j);
            if (!preimage_in_segment(eng, beta, wmag, phi + 1e-3, eps)) return false;
            if (!preimage_in_segment(eng, beta, wmag, phi + pi() - 1e-3, eps)) return false;
        }
    }
    return true;
}

bigcx lattice_point_big(const pole_critical_basis<bigcx>& basis, const PoleEntry& pe) {
    return bigreal(pe.l) * basis.gamma1 + bigreal(pe.m) * basis.gamma2;
}

// boundary loop target on the segment U(b, eps); the (rho, theta) pair comes
// from the shared double-precision parametrization so every precision level
// solves for identical points
bigcx loop_target(const bigcx& b, double eps, double t) {
    double rho, th;
    segment_boundary_param(t, rho, th);
    return b + bigreal(eps * rho) * bigcx(bigreal(std::cos(th)), bigreal(std::sin(th)));
}

const bigreal& orbit_guard() {
    static const bigreal g(1e-45);
    return g;
}

// asymptotic root seed: near the parent root beta_p (which maps onto the
// parent pole) h_n(beta) ~ beta_p G / (h'_{n-1}(beta_p) (beta - beta_p))^2,
// so h_n = b starts at beta_p + sqrt(beta_p / b) / h'_{n-1}(beta_p)
bigcx apex_seed(const wp_engine<bigcx>& eng, const Cylinder& parent, const bigcx& b,
                int n) {
    using std::atan2;
    using std::sqrt;
    std::vector<bigcx> h, hp;
    run_param_orbit(eng, parent.root, n - 1, bigreal(0), h, hp);
    bigcx hp_prev = hp[static_cast<std::size_t>(n) - 1];
    bigcx delta = sqrt(parent.root / b) / hp_prev;
    // image offset h'_{n-1} delta = sqrt(beta_p/b) must point into the sector
    bigcx off = hp_prev * delta;
    bigreal ang = atan2(off.imag(), off.real());
    if (!(ang > bigreal(-3) * const_pi<bigreal>() / 8 &&
          ang < bigreal(3) * const_pi<bigreal>() / 8))
        delta = -delta;
    return parent.root + delta;
}

int winding_number(const wp_engine<bigcx>& eng, const bigcx& target, int n,
                   const std::vector<bigcx>& loop) {
    double total = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    std::vector<bigcx> h, hp;
    for (const bigcx& beta : loop) {
        if (!run_param_orbit(eng, beta, n, orbit_guard(), h, hp)) return 0;
        cx f = to_cx(h[static_cast<std::size_t>(n)] - target);
        double a = std::atan2(f.imag(), f.real());
        if (have_prev) total += wrap_angle(a - prev);
        prev = a;
        have_prev = true;
    }
    return static_cast<int>(std::lround(total / (2.0 * pi())));
}

// subdivision fallback: h_n has one double pole inside the parent (at the
// parent root), so a box holds winding + 2 roots when it contains that pole
bigcx winding_fallback(const wp_engine<bigcx>& eng, const Cylinder& parent,
                       const bigcx& b, int n) {
    std::vector<cx> off;
    for (const bigcx& s : parent.boundary) off.push_back(to_cx(s - parent.root));
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    for (cx o : off) {
        xmin = std::min(xmin, o.real());
        xmax = std::max(xmax, o.real());
        ymin = std::min(ymin, o.imag());
        ymax = std::max(ymax, o.imag());
    }
    double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
    xmin -= pad, xmax += pad, ymin -= pad, ymax += pad;

    struct Box {
        double x0, x1, y0, y1;
    };
    auto box_loop = [&](const Box& bx) {
        std::vector<bigcx> loop;
        const int side = 24;
        auto push = [&](double x, double y) {
            loop.push_back(parent.root + bigcx(bigreal(x), bigreal(y)));
        };
        for (int i = 0; i < side; ++i)
            push(bx.x0 + (bx.x1 - bx.x0) * i / side, bx.y0);
        for (int i = 0; i < side; ++i)
            push(bx.x1, bx.y0 + (bx.y1 - bx.y0) * i / side);
        for (int i = 0; i < side; ++i)
            push(bx.x1 - (bx.x1 - bx.x0) * i / side, bx.y1);
        for (int i = 0; i <= side; ++i)
            push(bx.x0, bx.y1 - (bx.y1 - bx.y0) * i / side);
        return loop;
    };
    auto contains_pole = [&](const Box& bx) {
        return bx.x0 <= 0 && 0 <= bx.x1 && bx.y0 <= 0 && 0 <= bx.y1;
    };

    Box cur{xmin, xmax, ymin, ymax};
    for (int depth = 0; depth < 80; ++depth) {
        double w = cur.x1 - cur.x0, hgt = cur.y1 - cur.y0;
        if (std::max(w, hgt) < 1e-8 * std::max(xmax - xmin, ymax - ymin)) break;
        double xm = cur.x0 + w / 2, ym = cur.y0 + hgt / 2;
        Box quads[4] = {{cur.x0, xm, cur.y0, ym},
                        {xm, cur.x1, cur.y0, ym},
                        {cur.x0, xm, ym, cur.y1},
                        {xm, cur.x1, ym, cur.y1}};
        bool found = false;
        for (const Box& q : quads) {
            int wind = winding_number(eng, b, n, box_loop(q));
            int roots = wind + (contains_pole(q) ? 2 : 0);
            if (roots >= 1) {
                cur = q;
                found = true;
                break;
            }
        }
        if (!found) break;
    }
    bigcx center = parent.root + bigcx(bigreal((cur.x0 + cur.x1) / 2),
                                       bigreal((cur.y0 + cur.y1) / 2));
    return solve_param_root(eng, n, b, center);
}

bigcx solve_child_root(const wp_engine<bigcx>& eng, const Cylinder& parent,
                       const bigcx& b, int n) {
    bigcx seed = apex_seed(eng, parent, b, n);
    bigcx root;
    bool ok = true;
    try {
        root = solve_param_root(eng, n, b, seed);
    } catch (const root_not_found_error&) {
        ok = false;
    }
    if (ok && !parent.boundary.empty()) {
        cx off = to_cx(root - parent.root);
        if (!point_in_polygon(off, [&] {
                std::vector<cx> poly;
                for (const bigcx& s : parent.boundary) poly.push_back(to_cx(s - parent.root));
                return poly;
            }()))
            ok = false;
    }
    if (ok) return root;
    return winding_fallback(eng, parent, b, n);
}

Cylinder make_level1(const pole_critical_basis<bigcx>& basis, const BuildConstants& c,
                     int nsamp) {
    Cylinder cyl;
    cyl.id = 0;
    cyl.parent = -1;
    cyl.level = 1;
    cyl.target = PoleEntry{to_cx(basis.e_star), basis.m, 0};
    const bigcx estar = basis.e_star;
    cyl.root = bigcx(bigreal(1));
    cyl.interior = (estar + bigreal(c.eps / 2)) / estar;
    cyl.boundary.reserve(nsamp);
    for (int j = 0; j < nsamp; ++j)
        cyl.boundary.push_back(loop_target(estar, c.eps, double(j) / nsamp) / estar);
    double ae = std::abs(to_cx(estar));
    cyl.deriv_min = cyl.deriv_max = ae; // |h_1'| = |e*| everywhere
    cyl.residual_max = 0.0;
    std::vector<cx> off = cyl.boundary_offsets();
    cyl.diam = polygon_diameter(off);
    cyl.area = shoelace_area(off);
    cyl.nested_ok = true;
    for (cx o : off)
        if (std::abs(o) > c.r) cyl.nested_ok = false; // containment in B(1, r)
    return cyl;
}

Cylinder build_child(const wp_engine<bigcx>& eng, const pole_critical_basis<bigcx>& basis,
                     const BuildConstants& c, const Cylinder& parent,
                     const PoleEntry& pole, int n, int nsamp) {
    Cylinder cyl;
    cyl.level = n;
    cyl.target = pole;
    cyl.parent = parent.id;
    const bigcx b = lattice_point_big(basis, pole);
    cyl.root = solve_child_root(eng, parent, b, n);

    std::vector<bigcx> h, hp;
    run_param_orbit(eng, cyl.root, n, orbit_guard(), h, hp);
    bigcx deriv_root = hp[static_cast<std::size_t>(n)];
    cyl.deriv_min = cyl.deriv_max = dbl(abs(deriv_root));

    cyl.interior = solve_param_root(eng, n, b + bigreal(c.eps / 2),
                                    cyl.root + bigreal(c.eps / 2) / deriv_root);

    cyl.boundary.assign(nsamp, bigcx(bigreal(0)));
    cyl.boundary[0] = cyl.root; // loop parameter 0 is the apex
    bigcx prev = cyl.root, prev_deriv = deriv_root, prev_z = b;
    for (int j = 1; j < nsamp; ++j) {
        bigcx z = loop_target(b, c.eps, double(j) / nsamp);
        bigcx seed = prev + (z - prev_z) / prev_deriv;
        bigcx beta = solve_param_root(eng, n, z, seed);
        if (!run_param_orbit(eng, beta, n, orbit_guard(), h, hp))
            throw root_not_found_error("singular parameter on a boundary sample");
        bigcx val = h[static_cast<std::size_t>(n)];
        bigcx der = hp[static_cast<std::size_t>(n)];
        double ad = dbl(abs(der));
        cyl.deriv_min = std::min(cyl.deriv_min, ad);
        cyl.deriv_max = std::max(cyl.deriv_max, ad);
        cyl.residual_max = std::max(cyl.residual_max, dbl(abs(val - z)) / c.eps);
        cyl.boundary[j] = beta;
        prev = beta;
        prev_z = z;
        prev_deriv = der;
    }

    std::vector<cx> off = cyl.boundary_offsets();
    cyl.diam = polygon_diameter(off);
    cyl.area = shoelace_area(off);

    std::vector<cx> ppoly;
    for (const bigcx& s : parent.boundary) ppoly.push_back(to_cx(s - parent.root));
    cyl.nested_ok = true;
    for (const bigcx& s : cyl.boundary)
        if (!point_in_polygon(to_cx(s - parent.root), ppoly)) cyl.nested_ok = false;
    return cyl;
}

void level1_density_sweep(const PoleCriticalLattice& pc, const BuildConstants& c,
                          CylinderTree& tree) {
    // full branching at level 1: solve h_2(beta) = b for every available
    // level-2 pole at double precision; child areas by the conformal estimate
    // areaU / |h_2'|^2
    wp_engine<cx> eng(pc.lattice.lambda1, pc.lattice.lambda2);
    const cx estar = c.e_star;
    auto poles = poles_in_half_annulus(pc.lattice, c.R2, c.phi, c.eps);
    const double areaU = Segment{cx(0.0, 0.0), c.eps}.area();
    const double parent_area = areaU / abs2(estar); // h_1 is linear
    long double acc = 0.0L;
    std::uint64_t fail = 0;
    for (const PoleEntry& pe : poles) {
        cx b = pe.b;
        cx beta = 1.0 + std::sqrt(1.0 / b) / estar;
        bool ok = false;
        cx d;
        for (int it = 0; it < 40; ++it) {
            cx h1 = beta * estar;
            cx p, pp;
            eng.wp_both(h1, p, pp);
            cx f = beta * p - b;
            d = p + beta * pp * estar;
            if (!(std::abs(d) > 0.0)) break;
            if (std::abs(f) < 1e-9 * std::abs(b)) {
                ok = true;
                break;
            }
            beta -= f / d;
        }
        if (!ok) {
            ++fail;
            continue;
        }
        acc += static_cast<long double>(areaU / abs2(d));
    }
    tree.sweep_delta1 = static_cast<double>(acc) / parent_area;
    tree.sweep_count = poles.size();
    tree.sweep_failures = fail;
}

} // namespace

double BuildConstants::Rn(int n) const { return std::pow(a, n - 1) * R1; }

std::vector<cx> Cylinder::boundary_offsets() const {
    std::vector<cx> out;
    out.reserve(boundary.size());
    for (const bigcx& s : boundary) out.push_back(to_cx(s - root));
    return out;
}

double log_scale_factor(const BuildConstants& c, int n) {
    return (n - 1) * (std::log(c.C2) - 1.5 * std::log(c.C1)) +
           0.75 * n * (n - 1.0) * std::log(c.a) + 0.5 * (3.0 * n - 1.0) * std::log(c.R1);
}

double deriv_lower_bound(const BuildConstants& c, int n) {
    return std::exp(log_scale_factor(c, n)) / (2.0 * (1.0 + c.r));
}

double deriv_upper_bound(const BuildConstants& c, int n) {
    return 2.5 / (1.0 - c.r) *
           std::exp(1.5 * (n - 1) * std::log(2.0) + log_scale_factor(c, n));
}

double log_diam_upper_bound(const BuildConstants& c, int n) {
    return std::log(4.0 * c.eps * (1.0 + c.r)) - log_scale_factor(c, n);
}

double diam_upper_bound(const BuildConstants& c, int n) {
    return std::exp(log_diam_upper_bound(c, n));
}

double diam_lower_bound(const BuildConstants& c, int n) {
    double hw = Segment::angular_halfwidth();
    return 2.0 * c.eps * (1.0 - std::cos(hw)) / deriv_upper_bound(c, n);
}

double distortion_bound(const BuildConstants& c, int n) {
    return 5.0 * (1.0 + c.r) / (1.0 - c.r) * std::exp(1.5 * (n - 1) * std::log(2.0));
}

double log_density_bound(const BuildConstants& c, int n) {
    double logM = 3.0 * std::log(2.0) + 6.0 * std::log(1.0 - c.r) +
                  3.0 * std::log(c.C1) - 6.0 * std::log(5.0) -
                  6.0 * std::log(1.0 + c.r) - 2.0 * std::log(c.C2);
    if (n == 1) {
        double logMp = std::log(3.0) + 2.0 * std::log(c.eps) +
                       4.0 * std::log(1.0 - c.r) + 3.0 * std::log(c.C1) -
                       7.0 * std::log(2.0) - 4.0 * std::log(5.0) -
                       2.0 * std::log(c.r) - 2.0 * std::log(1.0 + c.r) -
                       2.0 * std::log(c.C2) - 2.0 * std::log(c.R1);
        return logMp - std::log(c.R2);
    }
    // R_{n+1} = a^n R1
    return logM - 9.0 * n * std::log(2.0) - (n * std::log(c.a) + std::log(c.R1));
}

double density_bound(const BuildConstants& c, int n) {
    return std::exp(log_density_bound(c, n));
}

BuildConstants choose_constants(const EllipticEvaluator& ev, const PoleLocalData& pd,
                                double a_request) {
    BuildConstants c;
    c.alpha = std::sin(pi() / 8.0);
    c.r = pd.r;
    double rmax = 0.25 - 1.0 / (2.0 * c.alpha + 4.0);
    if (!(c.r > 0.0 && c.r < rmax))
        throw invalid_spec_error("parameter-disk radius incompatible with the distortion scheme");
    if (!(pd.arg_spread < pi() / 4.0))
        throw invalid_spec_error("pole-local data has uncontracted argument spread");
    c.eps0 = pd.eps0;
    c.K1 = pd.K1;
    c.K2 = pd.K2;
    c.C1 = pd.C1;
    c.C2 = pd.C2;
    c.M1 = pd.M1;
    c.M2 = pd.M2;

    cx c1 = ev.lattice().lambda1 * 0.5;
    c.e_star = ev.wp(c1);
    double ae = std::abs(c.e_star);

    // largest dyadic value below every cap; B(e*, eps) inside h_1(B(1,r)) is
    // exact since h_1 is linear with |h_1'| = |e*|
    double cap_closed = std::min(pd.eps0, ae / 3.0); // certified ball is closed
    double cap_open = c.r * ae;                      // image disk needs strict interior
    double eps = 1.0;
    while (eps > cap_closed || eps >= cap_open) eps /= 2.0;

    const wp_engine<cx>& eng = ev.engine();
    for (int halvings = 0;; ++halvings, eps /= 2.0) {
        if (halvings > 40)
            throw construction_infeasible_error("no admissible segment radius after 40 halvings");
        if (!injective_on_segment(eng, eps)) continue;
        Segment seg{c.e_star, eps};
        double minU = seg.min_abs(), maxU = seg.max_abs();
        if (!(maxU / 2.0 < minU)) continue; // segment must fit one annulus
        c.eps = eps;
        c.minU = minU;
        c.maxU = maxU;
        c.R1 = (maxU / 2.0 + minU) / 2.0;
        break;
    }

    double R1 = c.R1;
    double headroom = 1.0 + std::ldexp(1.0, -20);
    c.a0_terms[0] = 2.0;
    c.a0_terms[1] = c.C1 / ((1.0 - c.alpha) * c.eps * c.eps * R1) * headroom;
    c.a0_terms[2] = 1.0 / R1;
    c.a0_terms[3] = 3.0 * std::pow(c.C1, 1.5) / (c.C2 * R1);
    c.a0_terms[4] = 1296.0 * std::pow(c.C1, 6.0) / (std::pow(c.C2, 4.0) * std::pow(R1, 5.0));
    c.a0_terms[5] =
        std::pow(4.0 * c.eps * (1.0 + c.r) * std::pow(c.C1, 1.5) / (c.C2 * std::pow(R1, 2.5)),
                 2.0 / 3.0);
    c.a0_terms[6] = std::sqrt(c.C1) / (std::cbrt(c.C2) * std::sqrt(R1));
    c.a0 = *std::max_element(c.a0_terms, c.a0_terms + 7);
    c.a = std::max(2.0 * c.a0, a_request);
    c.R2 = c.a * R1;

    double phi = (c.M1 + c.M2) / 2.0 - pi() / 2.0;
    if (!verify_halfplane_coverage(eng, c.R2, phi, c.r, c.eps)) {
        bool found = false;
        for (int k = 0; k < 64 && !found; ++k) {
            double cand = -pi() + 2.0 * pi() * k / 64.0;
            if (verify_halfplane_coverage(eng, c.R2, cand, c.r, c.eps)) {
                phi = cand;
                found = true;
            }
        }
        if (!found)
            throw construction_infeasible_error(
                "no half-plane direction passed preimage verification");
    }
    c.phi = phi;
    return c;
}

bigcx solve_param_root(const wp_engine<bigcx>& eng, int n, const bigcx& target,
                       bigcx seed, double rel_tol, int max_steps) {
    using std::abs;
    if (n < 1) throw invalid_spec_error("parameter root level must be positive");
    const bigreal scale = std::max(bigreal(1), bigreal(abs(target)));
    const bigreal tol = bigreal(rel_tol) * scale;
    std::vector<bigcx> h, hp;
    bigcx beta = seed;
    bigreal best_res(-1);
    bigcx best_beta = seed;
    for (int step = 0; step < max_steps; ++step) {
        if (!run_param_orbit(eng, beta, n, orbit_guard(), h, hp)) {
            if (best_res < bigreal(0))
                beta += bigreal(1e-20) * (abs(beta) + bigreal(1));
            else
                beta = (beta + best_beta) / bigreal(2);
            continue;
        }
        bigcx f = h[static_cast<std::size_t>(n)] - target;
        bigreal res = abs(f);
        if (best_res < bigreal(0) || res < best_res) {
            best_res = res;
            best_beta = beta;
        }
        if (res <= tol) return beta;
        bigcx d = hp[static_cast<std::size_t>(n)];
        if (!(abs(d) > bigreal(0)))
            throw root_not_found_error("vanishing derivative in the parameter Newton");
        bigcx delta = f / d;
        bigcx cand = beta - delta;
        for (int halving = 0; halving < 12; ++halving) {
            std::vector<bigcx> h2, hp2;
            if (run_param_orbit(eng, cand, n, orbit_guard(), h2, hp2)) {
                if (abs(h2[static_cast<std::size_t>(n)] - target) < res) break;
            }
            delta /= bigreal(2);
            cand = beta - delta;
        }
        beta = cand;
    }
    if (best_res >= bigreal(0) && best_res <= bigreal(1e-9) * scale) return best_beta;
    throw root_not_found_error("parameter Newton did not converge");
}

cx solve_prepole_param(const PoleCriticalLattice& pc, const BuildConstants& c,
                       const Cylinder& parent, const PoleEntry& target, int n) {
    if (n < 2) throw invalid_spec_error("cylinder levels start at 2");
    if (parent.level != n - 1)
        throw invalid_spec_error("parent must sit one level above the target");
    Segment u{target.b, c.eps};
    double Rn = c.Rn(n);
    if (!(u.min_abs() > Rn && u.max_abs() < 2.0 * Rn && u.halfplane_margin(c.phi) > 0.0))
        throw invalid_spec_error("target segment is not inside the level annulus");
    auto basis = make_pole_critical_basis<bigcx>(pc.m);
    wp_engine<bigcx> eng(basis.gamma1, basis.gamma2);
    return to_cx(solve_child_root(eng, parent, lattice_point_big(basis, target), n));
}

CylinderTree build_family(const PoleCriticalLattice& pc, const BuildConstants& c,
                          int depth, int branching, bool full_sweep) {
    if (depth < 2) throw invalid_spec_error("family depth starts at 2");
    if (depth > 6) throw invalid_spec_error("family depth capped at 6");
    if (branching < 1) throw invalid_spec_error("branching must be positive");

    CylinderTree tree;
    tree.consts = c;
    tree.m = pc.m;
    tree.depth = depth;
    tree.branching = branching;

    auto basis = make_pole_critical_basis<bigcx>(pc.m);
    wp_engine<bigcx> eng(basis.gamma1, basis.gamma2);

    tree.nodes.push_back(make_level1(basis, c, 64));
    std::vector<int> frontier = {0};

    for (int n = 2; n <= depth; ++n) {
        auto poles = first_poles_in_half_annulus(pc.lattice, c.Rn(n), c.phi, c.eps,
                                                 static_cast<std::size_t>(branching));
        if (poles.empty())
            throw construction_infeasible_error("no admissible pole at a build level");
        std::vector<int> next;
        for (int pid : frontier) {
            for (const PoleEntry& pe : poles) {
                Cylinder child = build_child(eng, basis, c, tree.nodes[pid], pe, n, 64);
                child.id = static_cast<int>(tree.nodes.size());
                tree.nodes[pid].children.push_back(child.id);
                next.push_back(child.id);
                tree.nodes.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }

    if (full_sweep) level1_density_sweep(pc, c, tree);
    return tree;
}

std::vector<LevelStats> family_stats(const CylinderTree& tree) {
    const BuildConstants& c = tree.consts;
    auto pc = make_pole_critical_lattice(tree.m);
    std::vector<LevelStats> out(static_cast<std::size_t>(tree.depth));
    for (int n = 1; n <= tree.depth; ++n) {
        LevelStats& s = out[static_cast<std::size_t>(n) - 1];
        s.level = n;
        s.n_available =
            n == 1 ? 1 : count_poles_in_half_annulus(pc.lattice, c.Rn(n), c.phi, c.eps);
        s.diam_bound_upper = diam_upper_bound(c, n);
        s.diam_bound_lower = diam_lower_bound(c, n);
        s.distortion_bound = distortion_bound(c, n);
        s.delta_bound = density_bound(c, n);
    }
    for (const Cylinder& cyl : tree.nodes) {
        LevelStats& s = out[static_cast<std::size_t>(cyl.level) - 1];
        ++s.count;
        s.diam_max = std::max(s.diam_max, cyl.diam);
        if (cyl.deriv_min > 0.0)
            s.distortion_max = std::max(s.distortion_max, cyl.deriv_max / cyl.deriv_min);
        s.residual_max = std::max(s.residual_max, cyl.residual_max);
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> built(static_cast<std::size_t>(tree.depth) + 1, inf);
    std::vector<double> full(static_cast<std::size_t>(tree.depth) + 1, inf);
    for (const Cylinder& par : tree.nodes) {
        if (par.children.empty() || !(par.area > 0.0)) continue;
        double sum = 0.0, minarea = inf;
        for (int id : par.children) {
            sum += tree.nodes[static_cast<std::size_t>(id)].area;
            minarea = std::min(minarea, tree.nodes[static_cast<std::size_t>(id)].area);
        }
        std::size_t n = static_cast<std::size_t>(par.level);
        built[n] = std::min(built[n], sum / par.area);
        double navail = static_cast<double>(out[n].n_available); // level n+1 row
        full[n] = std::min(full[n], navail * minarea / par.area);
    }
    for (int n = 1; n <= tree.depth; ++n) {
        LevelStats& s = out[static_cast<std::size_t>(n) - 1];
        std::size_t i = static_cast<std::size_t>(n);
        s.delta_built = built[i] == inf ? 0.0 : built[i];
        s.delta_full_est = full[i] == inf ? 0.0 : full[i];
    }
    if (tree.sweep_count > 0 && !out.empty()) out[0].delta_full_est = tree.sweep_delta1;
    return out;
}

bigcx escaping_parameter(const PoleCriticalLattice& pc, const BuildConstants& c,
                         const std::vector<std::size_t>& pole_choices, int depth) {
    if (depth < 3) throw invalid_spec_error("escaping chain needs depth >= 3");
    auto basis = make_pole_critical_basis<bigcx>(pc.m);
    wp_engine<bigcx> eng(basis.gamma1, basis.gamma2);
    Cylinder cur = make_level1(basis, c, 32);
    for (int n = 2; n <= depth; ++n) {
        std::size_t want =
            static_cast<std::size_t>(n - 2) < pole_choices.size() ? pole_choices[n - 2] : 0;
        auto poles =
            first_poles_in_half_annulus(pc.lattice, c.Rn(n), c.phi, c.eps, want + 1);
        if (poles.size() <= want)
            throw construction_infeasible_error("not enough admissible poles at a level");
        Cylinder child = build_child(eng, basis, c, cur, poles[want], n, 32);
        child.id = cur.id + 1;
        cur = std::move(child);
    }
    return cur.interior;
}

} // namespace weierdyn
