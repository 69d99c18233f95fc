#include "weierdyn/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>

#include "weierdyn/weierstrass.hpp"

namespace weierdyn {

namespace {

using std::atan2;
using std::ceil;
using std::cos;
using std::fabs;
using std::floor;
using std::sin;
using std::sqrt;

double pi() { return const_pi<double>(); }

// min |x*l1 + y*l2| over the boundary max(|x|,|y|) = 1 of the centered cell
double min_boundary_dist(cx l1, cx l2) {
    auto edge_min = [](cx fixed, cx moving) {
        // min over t in [-1,1] of |fixed + t*moving|
        double a = abs2(moving);
        if (a == 0.0) return std::abs(fixed);
        double t = -(fixed.real() * moving.real() + fixed.imag() * moving.imag()) / a;
        if (t < -1.0) t = -1.0;
        if (t > 1.0) t = 1.0;
        return std::abs(fixed + t * moving);
    };
    return std::min(edge_min(l1, l2), edge_min(l2, l1));
}

void lattice_coords(const Lattice& lat, cx z, double& t1, double& t2) {
    double det = lat.lambda1.real() * lat.lambda2.imag() -
                 lat.lambda1.imag() * lat.lambda2.real();
    t1 = (z.real() * lat.lambda2.imag() - z.imag() * lat.lambda2.real()) / det;
    t2 = (z.imag() * lat.lambda1.real() - z.real() * lat.lambda1.imag()) / det;
}

// half-open integer interval [lo, hi] with clamped set operations
struct IRange {
    long long lo = 1, hi = 0;
    bool empty() const { return lo > hi; }
    std::uint64_t len() const { return empty() ? 0 : static_cast<std::uint64_t>(hi - lo + 1); }
    IRange clip(const IRange& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
};

struct HalfAnnulusQuery {
    const Lattice& lat;
    double R, phi, eps;
    double smin_off; // eps * min(0, min sin(theta - phi)) precomputed
    double cphi, sphi;
    double coef; // d/dl of the half-plane margin along a row

    HalfAnnulusQuery(const Lattice& l, double R_, double phi_, double eps_)
        : lat(l), R(R_), phi(phi_), eps(eps_) {
        double hw = Segment::angular_halfwidth();
        double A = -hw - phi, B = hw - phi;
        double smin = std::min(sin(A), sin(B));
        for (int k = -2; k <= 2; ++k) {
            double t = -pi() / 2 + 2 * pi() * k;
            if (A <= t && t <= B) smin = -1.0;
        }
        smin_off = eps * std::min(0.0, smin);
        cphi = cos(phi);
        sphi = sin(phi);
        coef = l.lambda1.imag() * cphi - l.lambda1.real() * sphi;
    }

    bool valid(cx b) const {
        Segment u{b, eps};
        return u.min_abs() > R && u.max_abs() < 2 * R && u.halfplane_margin(phi) > 0.0;
    }

    double halfplane_base(cx b) const {
        return b.imag() * cphi - b.real() * sphi + smin_off;
    }
};

// quadratic row window: integer l with |l*l1 + c| <= rad; false if none
bool row_window(cx l1, cx c, double rad, long long& lo, long long& hi) {
    double a = abs2(l1);
    double b = 2.0 * (l1.real() * c.real() + l1.imag() * c.imag());
    double c0 = abs2(c) - rad * rad;
    double disc = b * b - 4.0 * a * c0;
    if (disc <= 0.0) return false;
    double sd = sqrt(disc);
    double x1 = (-b - sd) / (2.0 * a);
    double x2 = (-b + sd) / (2.0 * a);
    lo = static_cast<long long>(ceil(x1));
    hi = static_cast<long long>(floor(x2));
    return lo <= hi;
}

// remove cut from each interval of the disjoint list, in place
int subtract_range(IRange* list, int n, IRange cut, int cap) {
    if (cut.empty()) return n;
    IRange out[16];
    int k = 0;
    for (int i = 0; i < n; ++i) {
        IRange v = list[i];
        if (v.empty()) continue;
        IRange mid = v.clip(cut);
        if (mid.empty()) {
            out[k++] = v;
            continue;
        }
        IRange left{v.lo, mid.lo - 1};
        IRange right{mid.hi + 1, v.hi};
        if (!left.empty()) out[k++] = left;
        if (!right.empty()) out[k++] = right;
    }
    if (k > cap) k = cap; // unreachable: one cut adds at most one interval
    for (int i = 0; i < k; ++i) list[i] = out[i];
    return k;
}

// Exact per-row count. Candidates and the per-entry predicate are bitwise
// identical to the enumeration loop; zone membership by |b| alone certifies
// the segment tests because the sector lies inside the eps-disk of its apex
// and the window-root slop is ~1e-13 R in radius, far under the slack s.
std::uint64_t count_row(const HalfAnnulusQuery& q, long long m) {
    const cx l1 = q.lat.lambda1;
    const cx c = static_cast<double>(m) * q.lat.lambda2;
    long long rlo, rhi;
    if (!row_window(l1, c, 2.0 * q.R, rlo, rhi)) return 0;
    const IRange cand{rlo, rhi};

    auto point = [&](long long l) { return static_cast<double>(l) * l1 + c; };

    const double s = 1e-10 * q.R;
    auto zone = [&](double rad) {
        IRange z;
        long long a, b;
        if (rad > 0.0 && row_window(l1, c, rad, a, b)) z = IRange{a, b}.clip(cand);
        return z;
    };
    const IRange sure = zone(2.0 * q.R - q.eps - s); // max_abs < 2R throughout
    const IRange hole = zone(q.R + q.eps + s);       // outside it min_abs > R holds
    const IRange dead = zone(q.R - s);               // inside it min_abs > R fails

    // Half-plane margin along the row is affine: base0 + l*coef. Entries more
    // than the rounding fuzz F away from the zero crossing are decided by
    // sign; the rest land in a short band that is tested like the enumeration.
    const double base0 = q.halfplane_base(c);
    const double lmax = std::max(fabs(static_cast<double>(cand.lo)),
                                 fabs(static_cast<double>(cand.hi)));
    const double F = 1e-12 * (q.R + fabs(base0) + fabs(q.coef) * lmax);

    IRange mg_sure, mg_band;
    bool settled = false;
    if (q.coef != 0.0) {
        double thr = -base0 / q.coef;
        double w = F / fabs(q.coef) + 2.0;
        if (std::isfinite(thr) && std::isfinite(w)) {
            double blo = floor(thr) - w, bhi = ceil(thr) + w;
            auto clampi = [&](double x) {
                if (x < static_cast<double>(cand.lo)) x = static_cast<double>(cand.lo);
                if (x > static_cast<double>(cand.hi)) x = static_cast<double>(cand.hi);
                return static_cast<long long>(x);
            };
            if (bhi < static_cast<double>(cand.lo)) {
                if (q.coef > 0.0) mg_sure = cand;
            } else if (blo > static_cast<double>(cand.hi)) {
                if (q.coef < 0.0) mg_sure = cand;
            } else {
                mg_band = IRange{clampi(floor(blo)), clampi(ceil(bhi))};
                if (q.coef > 0.0 && mg_band.hi < cand.hi)
                    mg_sure = IRange{mg_band.hi + 1, cand.hi};
                if (q.coef < 0.0 && mg_band.lo > cand.lo)
                    mg_sure = IRange{cand.lo, mg_band.lo - 1};
            }
            settled = true;
        }
    }
    if (!settled) {
        // margin nearly constant along the row; decide by its value when the
        // swing cannot reach zero, otherwise test everything
        if (fabs(base0) - fabs(q.coef) * lmax > F) {
            if (base0 > 0.0) mg_sure = cand;
        } else {
            mg_band = cand;
        }
    }
    if (mg_sure.empty() && mg_band.empty()) return 0;

    // certified-valid core: inside sure, outside hole, margin-sure
    IRange core_a, core_b;
    if (!sure.empty()) {
        if (hole.empty()) {
            core_a = sure;
        } else {
            core_a = IRange{sure.lo, std::min(sure.hi, hole.lo - 1)};
            core_b = IRange{std::max(sure.lo, hole.hi + 1), sure.hi};
        }
    }
    core_a = core_a.clip(mg_sure);
    core_b = core_b.clip(mg_sure);
    std::uint64_t total = core_a.len() + core_b.len();

    // margin-certain-invalid pieces: cand minus mg_sure minus mg_band
    IRange mg_bad[4];
    int nbad = 1;
    mg_bad[0] = cand;
    nbad = subtract_range(mg_bad, nbad, mg_sure, 4);
    nbad = subtract_range(mg_bad, nbad, mg_band, 4);

    // everything not certified is tested with the enumeration's predicate
    IRange work[16];
    int nw = 1;
    work[0] = cand;
    nw = subtract_range(work, nw, core_a, 16);
    nw = subtract_range(work, nw, core_b, 16);
    nw = subtract_range(work, nw, dead, 16);
    for (int i = 0; i < nbad; ++i) nw = subtract_range(work, nw, mg_bad[i], 16);

    for (int i = 0; i < nw; ++i)
        for (long long l = work[i].lo; l <= work[i].hi; ++l)
            if (q.valid(point(l))) ++total;
    return total;
}

void sort_entries(std::vector<PoleEntry>& out) {
    std::sort(out.begin(), out.end(), [](const PoleEntry& x, const PoleEntry& y) {
        double nx = abs2(x.b), ny = abs2(y.b);
        if (nx != ny) return nx < ny;
        double ax = atan2(x.b.imag(), x.b.real());
        double ay = atan2(y.b.imag(), y.b.real());
        if (ax != ay) return ax < ay;
        if (x.l != y.l) return x.l < y.l;
        return x.m < y.m;
    });
}

long long row_span(const Lattice& lat, double rad) {
    double h = lat.cell_area / std::abs(lat.lambda1); // spacing between rows
    return static_cast<long long>(floor(rad / h)) + 1;
}

void validate_annulus_args(const Lattice& lat, double R, double eps) {
    if (!(R > 0.0)) throw invalid_spec_error("half-annulus radius must be positive");
    if (!(eps > 0.0 && eps < std::abs(lat.lambda1) / 3.0))
        throw invalid_spec_error("segment radius must lie in (0, |lambda1|/3)");
}

} // namespace

bool Lattice::is_triangular(double tol) const {
    cx rho(-0.5, sqrt(3.0) / 2.0);
    return std::abs(lambda2 - rho * lambda1) < tol * std::abs(lambda1);
}

bool Lattice::is_square(double tol) const {
    cx i01(0.0, 1.0);
    double a = std::abs(lambda2 - i01 * lambda1);
    double b = std::abs(lambda2 + i01 * lambda1);
    return std::min(a, b) < tol * std::abs(lambda1);
}

Lattice make_lattice(cx lambda1, cx lambda2) {
    double a1 = std::abs(lambda1), a2 = std::abs(lambda2);
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw invalid_lattice_error("zero lattice generator");
    cx ratio = lambda2 / lambda1;
    if (!(fabs(ratio.imag()) > 1e-12 * std::abs(ratio)))
        throw invalid_lattice_error("collinear lattice generators");
    Lattice lat;
    lat.lambda1 = lambda1;
    lat.lambda2 = lambda2;
    lat.orientation = ratio.imag() > 0.0 ? 1 : -1;
    lat.cell_area = fabs(lambda1.real() * lambda2.imag() - lambda1.imag() * lambda2.real());
    lat.cell_diameter = std::max(std::abs(lambda1 + lambda2), std::abs(lambda1 - lambda2));
    lat.min_cell_dist = min_boundary_dist(lambda1, lambda2);
    return lat;
}

LatticeInvariants invariants(const Lattice& lat, int truncation_radius) {
    if (truncation_radius < 10)
        throw invalid_spec_error("truncation radius must be at least 10");
    double minlam = std::min(std::abs(lat.lambda1), std::abs(lat.lambda2));
    double Rd = truncation_radius * minlam;
    double d = lat.cell_diameter;
    if (!(Rd > 2.0 * d))
        throw invalid_spec_error("truncation radius too small for the tail bound");

    std::complex<long double> s4(0.0L), s6(0.0L);
    long long mspan = row_span(lat, Rd + d);
    for (long long m = -mspan; m <= mspan; ++m) {
        cx c = static_cast<double>(m) * lat.lambda2;
        long long lo, hi;
        if (!row_window(lat.lambda1, c, Rd, lo, hi)) continue;
        for (long long l = lo; l <= hi; ++l) {
            if (l == 0 && m == 0) continue;
            cx w = static_cast<double>(l) * lat.lambda1 + c;
            std::complex<long double> wl(w.real(), w.imag());
            std::complex<long double> inv2 = 1.0L / (wl * wl);
            std::complex<long double> inv4 = inv2 * inv2;
            s4 += inv4;
            s6 += inv4 * inv2;
        }
    }

    // integral comparison: cells of diameter d around each |w| > Rd
    double common = 2.0 * pi() / lat.cell_area;
    double t = Rd - d;
    double tail4 = common * (1.0 / (2.0 * t * t) + d / (6.0 * t * t * t));
    double tail6 = common * (1.0 / (4.0 * t * t * t * t) + d / (10.0 * t * t * t * t * t));

    LatticeInvariants out;
    out.g2 = cx(static_cast<double>(60.0L * s4.real()), static_cast<double>(60.0L * s4.imag()));
    out.g3 = cx(static_cast<double>(140.0L * s6.real()), static_cast<double>(140.0L * s6.imag()));
    out.truncation_radius = truncation_radius;
    out.tail_g2 = 60.0 * tail4;
    out.tail_g3 = 140.0 * tail6;
    return out;
}

Reduction reduce_to_fundamental(const Lattice& lat, cx z) {
    double t1, t2;
    lattice_coords(lat, z, t1, t2);
    auto split = [](double t, double& frac) {
        double f = floor(t);
        frac = t - f;
        // fp-boundary snap: points an ulp below a lattice line belong above it
        double snap = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, fabs(t));
        if (1.0 - frac <= snap) {
            f += 1.0;
            frac = t - f;
        }
        return static_cast<long long>(f);
    };
    double f1, f2;
    Reduction red;
    red.l = split(t1, f1);
    red.m = split(t2, f2);
    red.z_red = f1 * lat.lambda1 + f2 * lat.lambda2;
    return red;
}

double dist_to_lattice(const Lattice& lat, cx z, cx* nearest) {
    double t1, t2;
    lattice_coords(lat, z, t1, t2);
    double n1 = std::round(t1), n2 = std::round(t2);
    double f1 = t1 - n1, f2 = t2 - n2;
    double best = -1.0;
    int bi = 0, bj = 0;
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            cx cand = (f1 - i) * lat.lambda1 + (f2 - j) * lat.lambda2;
            double dcur = std::abs(cand);
            if (best < 0.0 || dcur < best) {
                best = dcur;
                bi = i;
                bj = j;
            }
        }
    }
    if (nearest) *nearest = (n1 + bi) * lat.lambda1 + (n2 + bj) * lat.lambda2;
    return best;
}

Lattice equianharmonic_lattice(double g3_target) {
    if (!(g3_target > 0.0)) throw invalid_spec_error("g3 target must be positive");
    cx rho(-0.5, sqrt(3.0) / 2.0);
    wp_engine<cx> unit(cx(1.0, 0.0), rho);
    double g3u = unit.g3().real();
    double alpha = std::pow(g3u / g3_target, 1.0 / 6.0);
    return make_lattice(cx(alpha, 0.0), alpha * rho);
}

PoleCriticalLattice make_pole_critical_lattice(long m) {
    auto basis = make_pole_critical_basis<cx>(m);
    PoleCriticalLattice out;
    out.lattice = make_lattice(basis.gamma1, basis.gamma2);
    out.m = m;
    out.gamma1 = basis.gamma1;
    out.gamma2 = basis.gamma2;
    out.e_star = basis.e_star;
    return out;
}

void segment_boundary_param(double t, double& rho_unit, double& theta) {
    double hw = Segment::angular_halfwidth();
    t -= floor(t);
    if (t < 0.25) {
        rho_unit = 4.0 * t;
        theta = -hw;
    } else if (t < 0.75) {
        rho_unit = 1.0;
        theta = -hw + (t - 0.25) * 4.0 * hw;
    } else {
        rho_unit = 1.0 - 4.0 * (t - 0.75);
        theta = hw;
    }
}

bool Segment::contains(cx z, double len_slack, double ang_slack) const {
    cx w = z - apex;
    double rho = std::abs(w);
    if (rho <= len_slack) return true;
    if (rho > eps + len_slack) return false;
    double th = atan2(w.imag(), w.real());
    return fabs(th) <= angular_halfwidth() + ang_slack;
}

double Segment::min_abs() const {
    double az = std::abs(apex);
    if (az == 0.0) return 0.0;
    if (contains(cx(0.0, 0.0))) return 0.0;
    double hw = angular_halfwidth();
    double best = az;
    for (double th : {-hw, hw}) {
        double c = cos(th), s = sin(th);
        double rstar = -(apex.real() * c + apex.imag() * s);
        if (rstar < 0.0) rstar = 0.0;
        if (rstar > eps) rstar = eps;
        best = std::min(best, std::abs(apex + rstar * cx(c, s)));
    }
    double phi0 = atan2(apex.imag(), apex.real());
    double thopp = wrap_angle(phi0 + pi());
    if (fabs(thopp) <= hw) best = std::min(best, fabs(az - eps));
    return best;
}

double Segment::max_abs() const {
    double az = std::abs(apex);
    double hw = angular_halfwidth();
    double cmax;
    if (az == 0.0) {
        cmax = 1.0;
    } else {
        double phi0 = atan2(apex.imag(), apex.real());
        if (fabs(phi0) <= hw)
            cmax = 1.0;
        else
            cmax = std::max(cos(-hw - phi0), cos(hw - phi0));
    }
    double v = sqrt(az * az + eps * eps + 2.0 * eps * az * cmax);
    return std::max(az, v);
}

double Segment::halfplane_margin(double phi) const {
    double base = apex.imag() * cos(phi) - apex.real() * sin(phi);
    double hw = angular_halfwidth();
    double A = -hw - phi, B = hw - phi;
    double smin = std::min(sin(A), sin(B));
    for (int k = -2; k <= 2; ++k) {
        double t = -pi() / 2 + 2.0 * pi() * k;
        if (A <= t && t <= B) smin = -1.0;
    }
    return base + eps * std::min(0.0, smin);
}

cx Segment::boundary_point(double t) const {
    double rho, th;
    segment_boundary_param(t, rho, th);
    return apex + eps * rho * cx(cos(th), sin(th));
}

double Segment::area() const { return 3.0 * pi() * eps * eps / 8.0; }

std::vector<PoleEntry> poles_in_half_annulus(const Lattice& lat, double R, double phi,
                                             double eps) {
    validate_annulus_args(lat, R, eps);
    HalfAnnulusQuery q(lat, R, phi, eps);
    std::vector<PoleEntry> out;
    long long mspan = row_span(lat, 2.0 * R);
    for (long long m = -mspan; m <= mspan; ++m) {
        cx c = static_cast<double>(m) * lat.lambda2;
        long long lo, hi;
        if (!row_window(lat.lambda1, c, 2.0 * R, lo, hi)) continue;
        for (long long l = lo; l <= hi; ++l) {
            cx b = static_cast<double>(l) * lat.lambda1 + c;
            if (q.valid(b)) out.push_back(PoleEntry{b, l, m});
        }
    }
    sort_entries(out);
    return out;
}

std::uint64_t count_poles_in_half_annulus(const Lattice& lat, double R, double phi,
                                          double eps) {
    validate_annulus_args(lat, R, eps);
    if (eps >= R / 2.0) return poles_in_half_annulus(lat, R, phi, eps).size();
    HalfAnnulusQuery q(lat, R, phi, eps);
    std::uint64_t total = 0;
    long long mspan = row_span(lat, 2.0 * R);
    for (long long m = -mspan; m <= mspan; ++m) total += count_row(q, m);
    return total;
}

std::vector<PoleEntry> first_poles_in_half_annulus(const Lattice& lat, double R,
                                                   double phi, double eps,
                                                   std::size_t k) {
    validate_annulus_args(lat, R, eps);
    if (k == 0) return {};
    HalfAnnulusQuery q(lat, R, phi, eps);
    // every valid b has |b| > R (the apex lies in the segment), so growing a
    // thin shell from the inner edge finds the globally smallest entries; a
    // bounded max-heap keeps memory at O(k) however wide the shell gets
    double delta = 0.5 * eps +
                   2.0 * static_cast<double>(k + 64) * lat.cell_area / (pi() * R);
    auto entry_after = [](const PoleEntry& x, const PoleEntry& y) {
        double ax = abs2(x.b), ay = abs2(y.b);
        if (ax != ay) return ax < ay;
        double tx = std::atan2(x.b.imag(), x.b.real());
        double ty = std::atan2(y.b.imag(), y.b.real());
        if (tx != ty) return tx < ty;
        if (x.l != y.l) return x.l < y.l;
        return x.m < y.m;
    };
    std::vector<PoleEntry> heap; // max-heap under entry_after
    for (;;) {
        heap.clear();
        double outer = std::min(R + delta, 2.0 * R);
        long long mspan = row_span(lat, outer);
        for (long long m = -mspan; m <= mspan; ++m) {
            cx c = static_cast<double>(m) * lat.lambda2;
            long long lo, hi;
            if (!row_window(lat.lambda1, c, outer, lo, hi)) continue;
            long long hole_lo = 0, hole_hi = -1;
            bool has_hole = row_window(lat.lambda1, c, R, hole_lo, hole_hi);
            auto scan = [&](long long a, long long b_end) {
                for (long long l = a; l <= b_end; ++l) {
                    cx b = static_cast<double>(l) * lat.lambda1 + c;
                    if (!q.valid(b)) continue;
                    PoleEntry e{b, l, m};
                    if (heap.size() < k) {
                        heap.push_back(e);
                        std::push_heap(heap.begin(), heap.end(), entry_after);
                    } else if (entry_after(e, heap.front())) {
                        std::pop_heap(heap.begin(), heap.end(), entry_after);
                        heap.back() = e;
                        std::push_heap(heap.begin(), heap.end(), entry_after);
                    }
                }
            };
            if (has_hole && hole_lo <= hole_hi) {
                scan(lo, hole_lo - 1);
                scan(hole_hi + 1, hi);
            } else {
                scan(lo, hi);
            }
        }
        if (heap.size() >= k || outer >= 2.0 * R) break;
        delta *= 2.0;
    }
    std::sort(heap.begin(), heap.end(), entry_after);
    return heap;
}

} // namespace weierdyn
