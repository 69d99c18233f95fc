#include "weierdyn/dimension.hpp"

#include <cmath>
#include <unordered_set>

#include "weierdyn/errors.hpp"

namespace weierdyn {

DimensionBound mcmullen_bound(const NestedFamilySpec& spec, int n_max) {
    if (!spec.log_delta || !spec.log_diam)
        throw invalid_spec_error("family spec lacks level callbacks");
    if (n_max < 2) throw invalid_spec_error("need at least two levels");
    DimensionBound out;
    out.partials.reserve(static_cast<std::size_t>(n_max));
    double sum = 0.0, comp = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        double ld = spec.log_delta(n);
        if (!(ld <= 0.0)) throw invalid_spec_error("covered density above one");
        double lg = spec.log_diam(n);
        if (!(lg < 0.0)) throw invalid_spec_error("level diameters must shrink below one");
        double y = -ld - comp; // Kahan
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.partials.push_back(spec.ambient_dim - sum / (-lg));
    }
    int lo = std::max(1, n_max - n_max / 3 + 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double liminf = out.partials.back();
    int cnt = 0;
    for (int n = lo; n <= n_max; ++n) {
        double x = 1.0 / n, y = out.partials[static_cast<std::size_t>(n) - 1];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        liminf = std::min(liminf, y);
        ++cnt;
    }
    out.liminf_window = liminf;
    double det = cnt * sxx - sx * sx;
    if (cnt >= 2 && det > 0.0) {
        out.fit_slope = (cnt * sxy - sx * sy) / det;
        out.extrapolated = (sy * sxx - sx * sxy) / det;
    } else {
        out.fit_slope = 0.0;
        out.extrapolated = out.partials.back();
    }
    if (!std::isnan(spec.limit)) {
        out.has_formula = true;
        out.formula_value = spec.limit;
    }
    return out;
}

NestedFamilySpec ternary_cantor_spec() {
    NestedFamilySpec s;
    s.ambient_dim = 1.0;
    s.log_delta = [](int) { return std::log(2.0 / 3.0); };
    s.log_diam = [](int n) { return -n * std::log(3.0); };
    s.description = "middle-thirds interval family";
    s.limit = std::log(2.0) / std::log(3.0);
    return s;
}

NestedFamilySpec planar_dust_spec() {
    NestedFamilySpec s;
    s.ambient_dim = 2.0;
    s.log_delta = [](int) { return std::log(4.0 / 9.0); };
    s.log_diam = [](int n) { return 0.5 * std::log(2.0) - n * std::log(3.0); };
    s.description = "four-corner square dust";
    s.limit = std::log(4.0) / std::log(3.0);
    return s;
}

NestedFamilySpec closed_form_family_spec(const BuildConstants& consts) {
    if (!(consts.a > consts.a0))
        throw invalid_spec_error("nesting ratio below the admissible threshold");
    NestedFamilySpec s;
    s.ambient_dim = 2.0;
    BuildConstants c = consts;
    s.log_delta = [c](int n) { return log_density_bound(c, n); };
    s.log_diam = [c](int n) { return log_diam_upper_bound(c, n); };
    s.description = "certified cylinder family bounds";
    s.limit = analytic_bound(consts.a);
    return s;
}

double analytic_bound(double a) {
    if (!(a > 1.0)) throw invalid_spec_error("nesting ratio must exceed one");
    return 4.0 / 3.0 - 6.0 * std::log(2.0) / std::log(a);
}

ConsistencyReport consistency_check(const BuildConstants& consts, int n_max) {
    ConsistencyReport rep;
    rep.a = consts.a;
    rep.n_max = n_max;
    DimensionBound b = mcmullen_bound(closed_form_family_spec(consts), n_max);
    rep.extrapolated = b.extrapolated;
    rep.analytic = analytic_bound(consts.a);
    rep.gap = std::fabs(rep.extrapolated - rep.analytic);
    rep.tolerance = std::max(10.0 * std::fabs(b.fit_slope) / n_max, 1e-12);
    rep.pass = rep.gap <= rep.tolerance;
    return rep;
}

double box_count_dimension(const std::vector<cx>& points, const ScaleRange& scales) {
    if (points.size() < 2) throw invalid_spec_error("need at least two points");
    if (scales.num_scales < 2) throw invalid_spec_error("need at least two scales");
    if (!(scales.delta_min > 0.0 && scales.delta_min < scales.delta_max))
        throw invalid_spec_error("scale range must satisfy 0 < min < max");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < scales.num_scales; ++k) {
        double f = static_cast<double>(k) / (scales.num_scales - 1);
        double delta = scales.delta_max * std::pow(scales.delta_min / scales.delta_max, f);
        std::unordered_set<std::uint64_t> boxes;
        boxes.reserve(points.size());
        for (cx p : points) {
            double fx = std::floor(p.real() / delta);
            double fy = std::floor(p.imag() / delta);
            if (std::fabs(fx) >= 2147483647.0 || std::fabs(fy) >= 2147483647.0)
                throw invalid_spec_error("scale range too fine for the point spread");
            auto ix = static_cast<std::uint64_t>(static_cast<std::uint32_t>(
                static_cast<std::int32_t>(fx)));
            auto iy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(
                static_cast<std::int32_t>(fy)));
            boxes.insert((ix << 32) | iy);
        }
        double x = std::log(1.0 / delta);
        double y = std::log(static_cast<double>(boxes.size()));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = scales.num_scales;
    double det = n * sxx - sx * sx;
    if (!(det > 0.0)) throw invalid_spec_error("degenerate scale ladder");
    return (n * sxy - sx * sy) / det;
}

} // namespace weierdyn
