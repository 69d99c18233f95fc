#include "weierdyn/serialization.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace weierdyn {

namespace {

using nlohmann::json;

json jc(cx z) { return json::array({z.real(), z.imag()}); }

cx jx(const json& j) { return cx(j.at(0).get<double>(), j.at(1).get<double>()); }

std::string big_str(const bigcx& z) {
    return z.real().str(50) + " " + z.imag().str(50);
}

} // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_json(const RunConfig& cfg) {
    json j;
    j["m"] = cfg.m;
    j["explicit_lattice"] = cfg.explicit_lattice;
    j["lambda1"] = jc(cfg.lambda1);
    j["lambda2"] = jc(cfg.lambda2);
    j["require_pole_critical"] = cfg.require_pole_critical;
    j["r"] = cfg.r;
    j["eps0"] = cfg.eps0;
    j["a"] = cfg.a;
    j["depth"] = cfg.depth;
    j["branching"] = cfg.branching;
    j["full_sweep"] = cfg.full_sweep;
    j["center_re"] = cfg.center_re;
    j["center_im"] = cfg.center_im;
    j["radius"] = cfg.radius;
    j["resolution"] = cfg.resolution;
    j["max_n"] = cfg.max_n;
    j["n_max"] = cfg.n_max;
    j["family"] = cfg.family;
    j["trunc"] = cfg.trunc;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output;
    return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    if (j.contains("m")) cfg.m = j["m"].get<long>();
    if (j.contains("explicit_lattice")) cfg.explicit_lattice = j["explicit_lattice"].get<bool>();
    if (j.contains("lambda1")) cfg.lambda1 = jx(j["lambda1"]);
    if (j.contains("lambda2")) cfg.lambda2 = jx(j["lambda2"]);
    if (j.contains("require_pole_critical"))
        cfg.require_pole_critical = j["require_pole_critical"].get<bool>();
    if (j.contains("r")) cfg.r = j["r"].get<double>();
    if (j.contains("eps0")) cfg.eps0 = j["eps0"].get<double>();
    if (j.contains("a")) cfg.a = j["a"].get<double>();
    if (j.contains("depth")) cfg.depth = j["depth"].get<int>();
    if (j.contains("branching")) cfg.branching = j["branching"].get<int>();
    if (j.contains("full_sweep")) cfg.full_sweep = j["full_sweep"].get<bool>();
    if (j.contains("center_re")) cfg.center_re = j["center_re"].get<double>();
    if (j.contains("center_im")) cfg.center_im = j["center_im"].get<double>();
    if (j.contains("radius")) cfg.radius = j["radius"].get<double>();
    if (j.contains("resolution")) cfg.resolution = j["resolution"].get<int>();
    if (j.contains("max_n")) cfg.max_n = j["max_n"].get<int>();
    if (j.contains("n_max")) cfg.n_max = j["n_max"].get<int>();
    if (j.contains("family")) cfg.family = j["family"].get<std::string>();
    if (j.contains("trunc")) cfg.trunc = j["trunc"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
    return cfg;
}

std::string to_json(const Lattice& lat) {
    json j;
    j["lambda1"] = jc(lat.lambda1);
    j["lambda2"] = jc(lat.lambda2);
    j["orientation"] = lat.orientation;
    j["cell_area"] = lat.cell_area;
    j["cell_diameter"] = lat.cell_diameter;
    j["min_cell_dist"] = lat.min_cell_dist;
    j["triangular"] = lat.is_triangular();
    j["square"] = lat.is_square();
    return j.dump(2);
}

namespace {

json constants_json(const BuildConstants& c) {
    json j;
    j["eps0"] = c.eps0;
    j["eps"] = c.eps;
    j["r"] = c.r;
    j["R1"] = c.R1;
    j["R2"] = c.R2;
    j["a0"] = c.a0;
    j["a"] = c.a;
    j["phi"] = c.phi;
    j["alpha"] = c.alpha;
    j["C1"] = c.C1;
    j["C2"] = c.C2;
    j["M1"] = c.M1;
    j["M2"] = c.M2;
    j["K1"] = c.K1;
    j["K2"] = c.K2;
    j["e_star"] = jc(c.e_star);
    j["minU"] = c.minU;
    j["maxU"] = c.maxU;
    j["a0_terms"] = json::array();
    for (double t : c.a0_terms) j["a0_terms"].push_back(t);
    return j;
}

} // namespace

std::string to_json(const BuildConstants& c) { return constants_json(c).dump(2); }

std::string to_json(const CylinderTree& tree) {
    json j;
    j["m"] = tree.m;
    j["depth"] = tree.depth;
    j["branching"] = tree.branching;
    j["constants"] = constants_json(tree.consts);
    j["sweep"] = {{"delta1", tree.sweep_delta1},
                  {"count", tree.sweep_count},
                  {"failures", tree.sweep_failures}};
    json nodes = json::array();
    for (const Cylinder& cyl : tree.nodes) {
        json n;
        n["id"] = cyl.id;
        n["parent"] = cyl.parent;
        n["level"] = cyl.level;
        n["pole"] = jc(cyl.target.b);
        n["pole_index"] = json::array({cyl.target.l, cyl.target.m});
        n["root"] = jc(cyl.root_d());
        n["root_str"] = big_str(cyl.root);
        n["interior"] = jc(cyl.interior_d());
        n["interior_str"] = big_str(cyl.interior);
        json boundary = json::array();
        for (cx off : cyl.boundary_offsets()) boundary.push_back(jc(off));
        n["boundary_offsets"] = boundary;
        n["diam"] = cyl.diam;
        n["area"] = cyl.area;
        n["deriv_min"] = cyl.deriv_min;
        n["deriv_max"] = cyl.deriv_max;
        n["residual_max"] = cyl.residual_max;
        n["nested_ok"] = cyl.nested_ok;
        n["children"] = cyl.children;
        nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
    return j.dump(2);
}

std::string to_json(const OrbitTrace& orbit) {
    json j;
    j["beta"] = jc(orbit.beta);
    j["start"] = jc(orbit.start);
    j["status"] = to_string(orbit.status);
    j["n"] = orbit.n;
    j["min_pole_dist"] = orbit.min_pole_dist;
    if (orbit.status == OrbitStatus::Prepole) j["pole"] = jc(orbit.pole);
    json pts = json::array();
    for (cx z : orbit.points) pts.push_back(jc(z));
    j["points"] = std::move(pts);
    j["radii_checked"] = orbit.radii_checked;
    return j.dump(2);
}

std::string to_json(const ConsistencyReport& rep, const DimensionBound& bound) {
    json j;
    j["a"] = rep.a;
    j["n_max"] = rep.n_max;
    j["extrapolated"] = rep.extrapolated;
    j["analytic"] = rep.analytic;
    j["gap"] = rep.gap;
    j["tolerance"] = rep.tolerance;
    j["pass"] = rep.pass;
    j["liminf_window"] = bound.liminf_window;
    j["fit_slope"] = bound.fit_slope;
    if (bound.has_formula) j["formula_value"] = bound.formula_value;
    json tail = json::array();
    std::size_t from = bound.partials.size() > 16 ? bound.partials.size() - 16 : 0;
    for (std::size_t i = from; i < bound.partials.size(); ++i)
        tail.push_back(bound.partials[i]);
    j["partials_tail"] = std::move(tail);
    return j.dump(2);
}

void write_orbit_csv(std::ostream& os, const OrbitTrace& orbit) {
    os << "k,re,im,abs\n";
    for (std::size_t k = 0; k < orbit.points.size(); ++k) {
        cx z = orbit.points[k];
        os << k << ',' << format_double(z.real()) << ',' << format_double(z.imag()) << ','
           << format_double(std::abs(z)) << '\n';
    }
}

void write_stats_csv(std::ostream& os, const std::vector<LevelStats>& stats) {
    os << "level,count,n_available,diam_max,diam_bound_upper,diam_bound_lower,"
          "distortion_max,distortion_bound,delta_built,delta_full_est,delta_bound,"
          "residual_max\n";
    for (const LevelStats& s : stats) {
        os << s.level << ',' << s.count << ',' << s.n_available << ','
           << format_double(s.diam_max) << ',' << format_double(s.diam_bound_upper) << ','
           << format_double(s.diam_bound_lower) << ',' << format_double(s.distortion_max)
           << ',' << format_double(s.distortion_bound) << ','
           << format_double(s.delta_built) << ',' << format_double(s.delta_full_est) << ','
           << format_double(s.delta_bound) << ',' << format_double(s.residual_max) << '\n';
    }
}

} // namespace weierdyn
