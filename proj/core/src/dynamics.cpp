#include "weierdyn/dynamics.hpp"

#include <cmath>

namespace weierdyn {

const char* to_string(OrbitStatus s) {
    switch (s) {
        case OrbitStatus::Bounded: return "bounded";
        case OrbitStatus::Escaping: return "escaping";
        case OrbitStatus::Prepole: return "prepole";
        case OrbitStatus::NearPoleUnresolved: return "near-pole-unresolved";
    }
    return "unknown";
}

cx g_beta(const EllipticEvaluator& ev, cx beta, cx z) { return beta * ev.wp(z); }

OrbitTrace orbit(const EllipticEvaluator& ev, cx beta, cx z0, int max_n, double R_base,
                 double prepole_tol) {
    if (max_n < 1) throw invalid_spec_error("orbit needs max_n >= 1");
    if (!(R_base > 0.0)) throw invalid_spec_error("orbit needs a positive escape base");
    double tol = prepole_tol > 0.0 ? prepole_tol
                                   : 1e-8 * std::abs(ev.lattice().lambda1);
    double excl = std::max(ev.pole_exclusion_radius(), tol);
    // beyond this magnitude the reduction of z loses the phase that the pole
    // distance check depends on (ulp(|z|) of the order of tol)
    double phase_cut = tol * 5.6e14;

    OrbitTrace tr;
    tr.beta = beta;
    tr.start = z0;
    tr.points.reserve(static_cast<std::size_t>(max_n) + 1);
    tr.points.push_back(z0);
    tr.min_pole_dist = -1.0;

    const auto& eng = ev.engine();
    bool growth_ok = true;
    int growth_n = 0;
    for (int k = 1; k <= max_n; ++k) {
        cx z = tr.points.back();
        cx b;
        double d = eng.dist_to_lattice(z, &b);
        if (tr.min_pole_dist < 0.0 || d < tr.min_pole_dist) tr.min_pole_dist = d;
        if (d < tol) {
            tr.status = OrbitStatus::Prepole;
            tr.n = k - 1;
            tr.pole = b;
            return tr;
        }
        if (d < excl || std::abs(z) > phase_cut) {
            tr.status = growth_ok && growth_n == k - 1 && growth_n > 0
                            ? OrbitStatus::Escaping
                            : OrbitStatus::NearPoleUnresolved;
            tr.n = k - 1;
            return tr;
        }
        cx p = eng.wp(z);
        cx znext = beta * p;
        tr.points.push_back(znext);
        double thresh = std::ldexp(R_base, k); // 2^k * R_base
        tr.radii_checked.push_back(thresh);
        if (growth_ok && std::abs(znext) >= thresh)
            growth_n = k;
        else
            growth_ok = false;
    }
    if (growth_ok && growth_n == max_n) {
        tr.status = OrbitStatus::Escaping;
        tr.n = max_n;
    } else {
        tr.status = OrbitStatus::Bounded;
        tr.n = max_n;
    }
    return tr;
}

ParamMapValue h_n(const EllipticEvaluator& ev, cx beta, int n) {
    if (n < 1) throw invalid_spec_error("h_n needs n >= 1");
    double tol = 1e-8 * std::abs(ev.lattice().lambda1);
    std::vector<cx> h, hp;
    int hit = -1;
    bool ok = run_param_orbit(ev.engine(), beta, n, tol, h, hp, &hit);
    ParamMapValue out;
    out.n = n;
    out.beta = beta;
    if (ok) {
        out.value = h[static_cast<std::size_t>(n)];
        out.derivative = hp[static_cast<std::size_t>(n)];
    } else {
        out.singular = true;
        out.singular_index = hit;
        out.value = h.back();
        out.derivative = hp.back();
        out.n = static_cast<int>(h.size()) - 1;
    }
    return out;
}

cx h_n_prime(const EllipticEvaluator& ev, cx beta, int n) {
    if (n < 1) throw invalid_spec_error("h_n_prime needs n >= 1");
    double tol = 1e-8 * std::abs(ev.lattice().lambda1);
    std::vector<cx> h, hp;
    int hit = -1;
    if (!run_param_orbit(ev.engine(), beta, n, tol, h, hp, &hit))
        throw singular_orbit_error("critical orbit hits a pole before the requested level",
                                   hit, h.back());
    if (n == 1) return h[1] / beta; // h_1 = beta*wp(c1), derivative wp(c1)

    // running product P_k = Prod_{i=1}^k g'(h_i) and the bracket sum
    cx prod(1.0, 0.0);
    cx bracket = h[1];
    const auto& eng = ev.engine();
    for (int k = 2; k <= n; ++k) {
        cx gp = beta * eng.wp_prime(h[static_cast<std::size_t>(k) - 1]);
        if (!(std::abs(gp) > 0.0))
            throw ill_conditioned_error("derivative factor vanished in the product formula",
                                        k - 1);
        prod *= gp;
        bracket += h[static_cast<std::size_t>(k)] / prod;
    }
    return prod * bracket / beta;
}

OrbitTrace classify_beta(const EllipticEvaluator& ev, cx beta, int depth, double R_base) {
    cx c1 = ev.lattice().lambda1 / 2.0;
    return orbit(ev, beta, c1, depth, R_base);
}

} // namespace weierdyn
