// Command line front end. Verbs: lattice info, escape-map, cantor build,
// dim bound, orbit, verify all. One flat config (flags or --config file.json)
// drives every verb; outputs are deterministic for a fixed (config, seed)
// regardless of WEIER_THREADS.
//
// Exit codes: 0 ok, 1 unexpected error, 2 invalid config, 3 verification
// failure, 4 evaluator failure, 5 root not found, 6 consistency failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weierdyn/cantor.hpp"
#include "weierdyn/dimension.hpp"
#include "weierdyn/dynamics.hpp"
#include "weierdyn/lattice.hpp"
#include "weierdyn/parallel.hpp"
#include "weierdyn/serialization.hpp"
#include "weierdyn/weierstrass.hpp"

using nlohmann::json;
using namespace weierdyn;

namespace {

enum ExitCode {
    exit_ok = 0,
    exit_error = 1,
    exit_bad_config = 2,
    exit_verify = 3,
    exit_evaluator = 4,
    exit_no_root = 5,
    exit_consistency = 6,
};

json jc(cx z) { return json::array({z.real(), z.imag()}); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_spec_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open output file: " + path);
    out << content;
    if (!out) throw error("write failed: " + path);
}

// Per-subcommand staging for the shared config flags. Values land in a
// RunConfig only when the flag was actually given, so --config files keep
// their settings unless overridden.
struct ConfigFlags {
    std::string config_path;
    bool dump_config = false;
    long m = -11;
    std::vector<double> lattice; // re1,im1,re2,im2
    bool require_pole_critical = false;
    double r = 0.03125;
    double eps0 = 0.25;
    std::string a; // number or "auto"
    int depth = 3;
    int branching = 2;
    bool full_sweep = true;
    std::vector<double> center;
    double radius = 0.05;
    int resolution = 256;
    int max_n = 12;
    int n_max = 2000;
    std::string family = "built";
    int trunc = 200;
    unsigned seed = 1u;
    std::string output;

    CLI::Option *o_m = nullptr, *o_lattice = nullptr, *o_require = nullptr, *o_r = nullptr,
                *o_eps0 = nullptr, *o_a = nullptr, *o_depth = nullptr, *o_branching = nullptr,
                *o_full = nullptr, *o_center = nullptr, *o_radius = nullptr,
                *o_resolution = nullptr, *o_max_n = nullptr, *o_n_max = nullptr,
                *o_family = nullptr, *o_trunc = nullptr, *o_seed = nullptr, *o_output = nullptr;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
    cmd->add_flag("--dump-config", f.dump_config, "print the effective config as JSON and exit");
    f.o_m = cmd->add_option("--m", f.m, "pole-critical lattice parameter (odd, negative)");
    f.o_lattice = cmd->add_option("--lattice", f.lattice,
                                  "explicit generators re1,im1,re2,im2 instead of --m")
                      ->delimiter(',')
                      ->expected(4);
    f.o_require = cmd->add_flag("--require-pole-critical", f.require_pole_critical,
                                "fail (exit 3) unless the lattice is pole-critical");
    f.o_r = cmd->add_option("--r", f.r, "parameter-disk radius of B(1, r)");
    f.o_eps0 = cmd->add_option("--eps0", f.eps0, "requested pole-local ball radius");
    f.o_a = cmd->add_option("--a", f.a, "annulus growth ratio, or 'auto' for 2*a0");
    f.o_depth = cmd->add_option("--depth", f.depth, "cylinder family depth (2..6)");
    f.o_branching = cmd->add_option("--branching", f.branching, "children per cylinder (>= 1)");
    f.o_full = cmd->add_flag("--full-sweep,!--no-full-sweep", f.full_sweep,
                             "measure the full-branching level-1 density");
    f.o_center = cmd->add_option("--center", f.center, "raster window center re,im")
                     ->delimiter(',')
                     ->expected(2);
    f.o_radius = cmd->add_option("--radius", f.radius, "raster window half-width");
    f.o_resolution = cmd->add_option("--resolution", f.resolution, "raster pixels per side");
    f.o_max_n = cmd->add_option("--max-n", f.max_n, "orbit iteration cap");
    f.o_n_max = cmd->add_option("--n-max", f.n_max, "dimension partial-sum depth");
    f.o_family = cmd->add_option("--family", f.family, "dim family: built, ternary, or dust");
    f.o_trunc = cmd->add_option("--trunc", f.trunc, "invariant truncation radius");
    f.o_seed = cmd->add_option("--seed", f.seed, "seed for sampled diagnostics");
    f.o_output = cmd->add_option("--output,-o", f.output, "output base path (no extension)");
}

RunConfig build_config(const ConfigFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg = run_config_from_json(slurp(f.config_path));
    if (f.o_m->count()) cfg.m = f.m;
    if (f.o_lattice->count()) {
        cfg.explicit_lattice = true;
        cfg.lambda1 = cx(f.lattice[0], f.lattice[1]);
        cfg.lambda2 = cx(f.lattice[2], f.lattice[3]);
    }
    if (f.o_require->count()) cfg.require_pole_critical = f.require_pole_critical;
    if (f.o_r->count()) cfg.r = f.r;
    if (f.o_eps0->count()) cfg.eps0 = f.eps0;
    if (f.o_a->count()) {
        if (f.a == "auto") {
            cfg.a = 0.0;
        } else {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(f.a, &pos);
            } catch (const std::exception&) {
                throw invalid_spec_error("--a expects a number or 'auto'");
            }
            if (pos != f.a.size()) throw invalid_spec_error("--a expects a number or 'auto'");
            cfg.a = v;
        }
    }
    if (f.o_depth->count()) cfg.depth = f.depth;
    if (f.o_branching->count()) cfg.branching = f.branching;
    if (f.o_full->count()) cfg.full_sweep = f.full_sweep;
    if (f.o_center->count()) {
        cfg.center_re = f.center[0];
        cfg.center_im = f.center[1];
    }
    if (f.o_radius->count()) cfg.radius = f.radius;
    if (f.o_resolution->count()) cfg.resolution = f.resolution;
    if (f.o_max_n->count()) cfg.max_n = f.max_n;
    if (f.o_n_max->count()) cfg.n_max = f.n_max;
    if (f.o_family->count()) cfg.family = f.family;
    if (f.o_trunc->count()) cfg.trunc = f.trunc;
    if (f.o_seed->count()) cfg.seed = f.seed;
    if (f.o_output->count()) cfg.output = f.output;
    return cfg;
}

// numeric sanity shared by every verb; verb-specific checks live in the verbs
void validate_config(const RunConfig& cfg) {
    if (!cfg.explicit_lattice) {
        if (!(cfg.m < 0) || (cfg.m % 2) == 0)
            throw invalid_spec_error("m must be negative and odd");
    }
    if (!(cfg.r > 0.0 && cfg.r <= 0.5))
        throw invalid_spec_error("r must lie in (0, 1/2]");
    if (!(cfg.eps0 > 0.0)) throw invalid_spec_error("eps0 must be positive");
    if (!(cfg.a >= 0.0)) throw invalid_spec_error("a must be positive (or 0 for auto)");
    if (cfg.trunc < 10) throw invalid_spec_error("trunc must be at least 10");
    if (!(cfg.radius > 0.0)) throw invalid_spec_error("radius must be positive");
    if (cfg.resolution < 1 || cfg.resolution > (1 << 14))
        throw invalid_spec_error("resolution must lie in [1, 16384]");
    if (cfg.max_n < 1 || cfg.max_n > 64)
        throw invalid_spec_error("max-n must lie in [1, 64]");
    if (cfg.n_max < 2 || cfg.n_max > 10000000)
        throw invalid_spec_error("n-max must lie in [2, 1e7]");
    if (cfg.branching < 1) throw invalid_spec_error("branching must be at least 1");
    if (cfg.family != "built" && cfg.family != "ternary" && cfg.family != "dust")
        throw invalid_spec_error("family must be built, ternary, or dust");
}

struct Resolved {
    Lattice lat;
    std::optional<PoleCriticalLattice> pc;
    std::optional<EllipticEvaluator> ev;
    double pole_residual_rel = 0.0; // dist(wp(c1), lattice) / |lambda1|
    bool pole_critical = false;
};

Resolved resolve_lattice(const RunConfig& cfg) {
    Resolved rs;
    if (cfg.explicit_lattice) {
        rs.lat = make_lattice(cfg.lambda1, cfg.lambda2);
    } else {
        rs.pc = make_pole_critical_lattice(cfg.m);
        rs.lat = rs.pc->lattice;
    }
    rs.ev.emplace(rs.lat, cfg.trunc);
    cx c1 = rs.lat.lambda1 * 0.5;
    cx e1 = rs.ev->wp(c1);
    rs.pole_residual_rel = dist_to_lattice(rs.lat, e1) / std::abs(rs.lat.lambda1);
    rs.pole_critical = rs.lat.is_triangular() && rs.pole_residual_rel < 1e-8;
    // explicit generators that pass the check recover the integer m
    if (cfg.explicit_lattice && rs.pole_critical) {
        cx ratio = e1 / rs.lat.lambda1;
        long m_found = std::lround(ratio.real());
        PoleCriticalLattice pc;
        pc.lattice = rs.lat;
        pc.m = m_found;
        pc.gamma1 = rs.lat.lambda1;
        pc.gamma2 = rs.lat.lambda2;
        cx nearest;
        dist_to_lattice(rs.lat, e1, &nearest);
        pc.e_star = nearest;
        rs.pc = pc;
    }
    if (cfg.require_pole_critical && !rs.pole_critical)
        throw construction_infeasible_error("lattice is not pole-critical (residual " +
                                            format_double(rs.pole_residual_rel) + " rel)");
    return rs;
}

BuildConstants make_constants(const Resolved& rs, const RunConfig& cfg) {
    if (!rs.pc || !rs.pole_critical)
        throw construction_infeasible_error(
            "this command needs a pole-critical lattice (use --m, or generators that pass "
            "the pole-critical check)");
    PoleLocalData pd = estimate_pole_constants(*rs.ev, cfg.eps0, cfg.r);
    return choose_constants(*rs.ev, pd, cfg.a);
}

double default_escape_radius(const Resolved& rs) {
    cx e1, e2, e3;
    rs.ev->critical_values(e1, e2, e3);
    return std::max({std::abs(e1), std::abs(e2), std::abs(e3)}) / 2.0;
}

void emit_report(const json& j, const RunConfig& cfg) {
    std::string text = j.dump(2);
    std::cout << text << "\n";
    if (!cfg.output.empty()) write_file(cfg.output + ".json", text + "\n");
}

// ---------------------------------------------------------------- lattice info

int cmd_lattice_info(const RunConfig& cfg) {
    Resolved rs = resolve_lattice(cfg);
    const Lattice& lat = rs.lat;
    const LatticeInvariants& inv = rs.ev->invariants();
    cx c1, c2, c3, e1, e2, e3;
    rs.ev->critical_points(c1, c2, c3);
    rs.ev->critical_values(e1, e2, e3);

    json j;
    j["lattice"] = {{"lambda1", jc(lat.lambda1)},
                    {"lambda2", jc(lat.lambda2)},
                    {"orientation", lat.orientation},
                    {"cell_area", lat.cell_area},
                    {"cell_diameter", lat.cell_diameter},
                    {"is_triangular", lat.is_triangular()},
                    {"is_square", lat.is_square()}};
    j["invariants"] = {{"g2", jc(inv.g2)},
                       {"g3", jc(inv.g3)},
                       {"truncation_radius", inv.truncation_radius},
                       {"tail_g2", inv.tail_g2},
                       {"tail_g3", inv.tail_g3}};
    j["critical_points"] = json::array({jc(c1), jc(c2), jc(c3)});
    j["critical_values"] = json::array({jc(e1), jc(e2), jc(e3)});
    json pcj;
    pcj["residual_rel"] = rs.pole_residual_rel;
    pcj["is_pole_critical"] = rs.pole_critical;
    if (rs.pc) {
        pcj["m"] = rs.pc->m;
        pcj["gamma1"] = jc(rs.pc->gamma1);
        pcj["e_star"] = jc(rs.pc->e_star);
    }
    j["pole_critical"] = pcj;
    emit_report(j, cfg);
    return exit_ok;
}

// ----------------------------------------------------------------- escape-map

int pixel_code(const OrbitTrace& t) {
    switch (t.status) {
        case OrbitStatus::Bounded: return 10;
        case OrbitStatus::NearPoleUnresolved: return 40;
        case OrbitStatus::Prepole: return 70 + 6 * std::min(t.n, 8);
        case OrbitStatus::Escaping: return 200;
    }
    return 0;
}

int cmd_escape_map(const RunConfig& cfg, double r_base_flag) {
    Resolved rs = resolve_lattice(cfg);
    const EllipticEvaluator& ev = *rs.ev;
    const int W = cfg.resolution, H = cfg.resolution;
    const double R_base = r_base_flag > 0.0 ? r_base_flag : default_escape_radius(rs);

    auto beta_at = [&](int px, int py) {
        double re = cfg.center_re + cfg.radius * (2.0 * (px + 0.5) / W - 1.0);
        double im = cfg.center_im + cfg.radius * (1.0 - 2.0 * (py + 0.5) / H);
        return cx(re, im);
    };

    std::vector<std::uint8_t> codes(static_cast<std::size_t>(W) * H, 0);
    std::vector<std::uint32_t> row_failures(H, 0);
    parallel_for(static_cast<std::size_t>(H), [&](std::size_t py) {
        for (int px = 0; px < W; ++px) {
            int code = 0;
            try {
                OrbitTrace t = classify_beta(ev, beta_at(px, static_cast<int>(py)), cfg.max_n,
                                             R_base);
                code = pixel_code(t);
            } catch (const std::exception&) {
                row_failures[py] += 1;
            }
            codes[py * static_cast<std::size_t>(W) + px] = static_cast<std::uint8_t>(code);
        }
    });

    std::uint64_t counts[5] = {0, 0, 0, 0, 0}; // failed, bounded, npu, prepole, escaping
    for (std::uint8_t code : codes) {
        if (code == 0) ++counts[0];
        else if (code == 10) ++counts[1];
        else if (code == 40) ++counts[2];
        else if (code == 200) ++counts[4];
        else ++counts[3];
    }

    // symmetry diagnostic: the three critical orbits differ by the cube root
    // of unity, so classification from c2 must match the raster's c1 result
    cx c1, c2, c3;
    ev.critical_points(c1, c2, c3);
    std::mt19937 rng(cfg.seed);
    std::uniform_int_distribution<int> ux(0, W - 1), uy(0, H - 1);
    const int sym_samples = 1000;
    int sym_equal = 0;
    for (int k = 0; k < sym_samples; ++k) {
        int px = ux(rng), py = uy(rng);
        int code_c1 = codes[static_cast<std::size_t>(py) * W + px];
        int code_c2 = 0;
        try {
            code_c2 = pixel_code(orbit(ev, beta_at(px, py), c2, cfg.max_n, R_base));
        } catch (const std::exception&) {
        }
        if (code_c1 == code_c2) ++sym_equal;
    }

    std::string base = cfg.output.empty() ? "escape_map" : cfg.output;
    std::string raster;
    raster.reserve(codes.size() * 4 + 256);
    raster += "P2\n";
    raster += "# escape-time classes: 0 failed, 10 bounded, 40 near-pole-unresolved, ";
    raster += "70+6*min(n,8) prepole(n), 200 escaping\n";
    raster += "# window center " + format_double(cfg.center_re) + " " +
              format_double(cfg.center_im) + " radius " + format_double(cfg.radius) +
              " max-n " + std::to_string(cfg.max_n) + " r-base " + format_double(R_base) + "\n";
    raster += std::to_string(W) + " " + std::to_string(H) + "\n255\n";
    for (int py = 0; py < H; ++py) {
        for (int px = 0; px < W; ++px) {
            raster += std::to_string(static_cast<int>(codes[static_cast<std::size_t>(py) * W + px]));
            raster += (px + 1 == W) ? '\n' : ' ';
        }
    }
    write_file(base + ".pgm", raster);

    std::ostringstream csv;
    csv << "class,count\n";
    csv << "bounded," << counts[1] << "\n";
    csv << "escaping," << counts[4] << "\n";
    csv << "prepole," << counts[3] << "\n";
    csv << "near_pole_unresolved," << counts[2] << "\n";
    csv << "failed," << counts[0] << "\n";
    csv << "symmetry_checked," << sym_samples << "\n";
    csv << "symmetry_equal," << sym_equal << "\n";
    write_file(base + ".csv", csv.str());

    std::uint64_t failed = counts[0];
    std::cerr << "escape-map: " << W << "x" << H << " raster -> " << base << ".pgm, counts -> "
              << base << ".csv (failed " << failed << ")\n";
    if (failed * 100 > codes.size()) return exit_evaluator;
    return exit_ok;
}

// ---------------------------------------------------------------- cantor build

int cmd_cantor_build(const RunConfig& cfg) {
    if (cfg.depth < 2 || cfg.depth > 6)
        throw invalid_spec_error("depth must lie in [2, 6]");
    Resolved rs = resolve_lattice(cfg);
    BuildConstants consts = make_constants(rs, cfg);
    CylinderTree tree = build_family(*rs.pc, consts, cfg.depth, cfg.branching, cfg.full_sweep);
    std::vector<LevelStats> stats = family_stats(tree);

    std::string base = cfg.output.empty() ? "cylinders" : cfg.output;
    write_file(base + ".json", to_json(tree));
    std::ostringstream csv;
    write_stats_csv(csv, stats);
    write_file(base + ".csv", csv.str());

    json j;
    j["m"] = tree.m;
    j["depth"] = tree.depth;
    j["branching"] = tree.branching;
    j["nodes"] = tree.nodes.size();
    j["sweep"] = {{"delta1", tree.sweep_delta1},
                  {"count", tree.sweep_count},
                  {"failures", tree.sweep_failures}};
    j["constants"] = json::parse(to_json(consts));
    j["files"] = {{"tree", base + ".json"}, {"stats", base + ".csv"}};
    std::cout << j.dump(2) << "\n";
    return exit_ok;
}

// ------------------------------------------------------------------ dim bound

int cmd_dim_bound(const RunConfig& cfg) {
    if (cfg.family == "ternary" || cfg.family == "dust") {
        NestedFamilySpec spec =
            cfg.family == "ternary" ? ternary_cantor_spec() : planar_dust_spec();
        DimensionBound bound = mcmullen_bound(spec, cfg.n_max);
        double tol = cfg.family == "ternary" ? 1e-6 : 1e-4;
        double gap = std::fabs(bound.extrapolated - spec.limit);
        json j;
        j["family"] = cfg.family;
        j["n_max"] = cfg.n_max;
        j["extrapolated"] = bound.extrapolated;
        j["limit"] = spec.limit;
        j["gap"] = gap;
        j["tolerance"] = tol;
        j["pass"] = gap <= tol;
        emit_report(j, cfg);
        return gap <= tol ? exit_ok : exit_consistency;
    }

    Resolved rs = resolve_lattice(cfg);
    BuildConstants consts = make_constants(rs, cfg);
    if (cfg.a > 0.0 && cfg.a <= consts.a0)
        throw invalid_spec_error("a must exceed a0 = " + format_double(consts.a0) +
                                 " (or use --a auto)");
    ConsistencyReport rep = consistency_check(consts, cfg.n_max);
    DimensionBound bound = mcmullen_bound(closed_form_family_spec(consts), cfg.n_max);
    json j = json::parse(to_json(rep, bound));
    j["family"] = "built";
    j["a_used"] = consts.a;
    j["a0"] = consts.a0;
    j["analytic_bound"] = analytic_bound(consts.a);
    emit_report(j, cfg);
    return rep.pass ? exit_ok : exit_consistency;
}

// ---------------------------------------------------------------------- orbit

int cmd_orbit(const RunConfig& cfg, cx beta, std::optional<cx> z0, double r_base_flag) {
    Resolved rs = resolve_lattice(cfg);
    double R_base = r_base_flag;
    if (!(R_base > 0.0)) {
        if (rs.pole_critical) {
            BuildConstants consts = make_constants(rs, cfg);
            R_base = consts.R1 / 2.0;
        } else {
            R_base = default_escape_radius(rs);
        }
    }
    cx start = z0 ? *z0 : rs.lat.lambda1 * 0.5;
    OrbitTrace t = orbit(*rs.ev, beta, start, cfg.max_n, R_base);
    std::string text = to_json(t);
    std::cout << text << "\n";
    if (!cfg.output.empty()) {
        write_file(cfg.output + ".json", text + "\n");
        std::ostringstream csv;
        write_orbit_csv(csv, t);
        write_file(cfg.output + ".csv", csv.str());
    }
    return exit_ok;
}

// ----------------------------------------------------------------- verify all

int cmd_verify_all(const RunConfig& cfg) {
    json checks = json::array();
    bool all_pass = true;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
        if (!pass) all_pass = false;
        std::cerr << (pass ? "ok   " : "FAIL ") << name << ": " << detail << "\n";
    };
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    Resolved rs = resolve_lattice(cfg);
    const EllipticEvaluator& ev = *rs.ev;
    const Lattice& lat = rs.lat;

    { // reduction round-trip
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            cx z(6.0 * u(rng), 6.0 * u(rng));
            Reduction red = reduce_to_fundamental(lat, z);
            cx back = red.z_red + static_cast<double>(red.l) * lat.lambda1 +
                      static_cast<double>(red.m) * lat.lambda2;
            worst = std::max(worst, std::abs(back - z) / (1.0 + std::abs(z)));
        }
        check("lattice.reduce_roundtrip", worst < 1e-12,
              "max rel gap " + format_double(worst));
    }

    { // pole enumeration vs exact count, and the k-prefix shortcut
        bool agree = true;
        std::string detail;
        for (double R : {17.3, 53.9}) {
            auto full = poles_in_half_annulus(lat, R, 0.7, 0.21);
            auto cnt = count_poles_in_half_annulus(lat, R, 0.7, 0.21);
            if (full.size() != cnt) {
                agree = false;
                detail = "R=" + format_double(R) + " enum " + std::to_string(full.size()) +
                         " vs count " + std::to_string(cnt);
            }
            auto head = first_poles_in_half_annulus(lat, R, 0.7, 0.21, 64);
            std::size_t upto = std::min<std::size_t>(64, full.size());
            for (std::size_t i = 0; i < upto; ++i)
                if (head[i].l != full[i].l || head[i].m != full[i].m) agree = false;
        }
        check("lattice.pole_count_exact", agree, agree ? "enum == count == prefix" : detail);
    }

    { // segment extrema against dense boundary sampling
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            Segment seg{cx(3.0 * u(rng), 3.0 * u(rng)), 0.05 + 0.2 * std::fabs(u(rng))};
            double smin = 1e300, smax = 0.0;
            for (int i = 0; i < 512; ++i) {
                double t = (i + 0.5) / 512.0;
                double v = std::abs(seg.boundary_point(t));
                smin = std::min(smin, v);
                smax = std::max(smax, v);
            }
            if (seg.contains(cx(0.0, 0.0))) smin = 0.0;
            double gap = seg.eps * 0.05; // boundary grid resolution allowance
            if (seg.min_abs() > smin + 1e-12) worst = std::max(worst, seg.min_abs() - smin);
            if (seg.min_abs() < smin - gap) worst = std::max(worst, smin - seg.min_abs());
            if (seg.max_abs() < smax - 1e-12) worst = std::max(worst, smax - seg.max_abs());
            if (seg.max_abs() > smax + gap) worst = std::max(worst, seg.max_abs() - smax);
        }
        check("lattice.segment_extrema", worst == 0.0, "worst excess " + format_double(worst));
    }

    { // differential equation of wp
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            cx z(u(rng), u(rng));
            if (dist_to_lattice(lat, z) < 1e-3) continue;
            auto [p, pp] = ev.wp_both(z);
            cx lhs = pp * pp, rhs = 4.0 * p * p * p - ev.g2() * p - ev.g3();
            double denom = 1.0 + std::pow(std::abs(p), 3.0);
            worst = std::max(worst, std::abs(lhs - rhs) / denom);
        }
        check("weierstrass.diffeq", worst < 1e-9, "max residual " + format_double(worst));
    }

    { // homogeneity under lattice scaling
        cx t(1.3, 0.4);
        wp_engine<cx> scaled(t * lat.lambda1, t * lat.lambda2);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            cx z(u(rng), u(rng));
            if (dist_to_lattice(lat, z) < 1e-2) continue;
            cx lhs = scaled.wp(t * z);
            cx rhs = ev.wp_unchecked(z) / (t * t);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        check("weierstrass.homogeneity", worst < 1e-8, "max rel " + format_double(worst));
    }

    { // row series against the certified direct sum
        double worst = 0.0;
        for (int k = 0; k < 30; ++k) {
            cx z(u(rng), u(rng));
            if (dist_to_lattice(lat, z) < 1e-2) continue;
            DirectValue d = ev.wp_direct(z, 120);
            double gap = std::abs(ev.wp_unchecked(z) - d.value);
            double allowed = d.tail + 1e-10 * (1.0 + std::abs(d.value));
            if (gap > allowed) worst = std::max(worst, gap - allowed);
        }
        check("weierstrass.direct_agreement", worst == 0.0,
              "worst excess " + format_double(worst));
    }

    { // pole-critical identity across several m
        double worst = 0.0;
        for (long m : {-1L, -3L, -5L, -11L}) {
            auto pcm = make_pole_critical_lattice(m);
            EllipticEvaluator evm(pcm.lattice);
            cx got = evm.wp(pcm.gamma1 * 0.5);
            cx want = static_cast<double>(m) * pcm.gamma1;
            worst = std::max(worst, std::abs(got - want) / std::abs(pcm.gamma1));
        }
        check("weierstrass.pole_critical_identity", worst < 1e-8,
              "max residual " + format_double(worst));
    }

    if (!rs.pole_critical) {
        check("lattice.pole_critical", false,
              "remaining checks need a pole-critical lattice; residual " +
                  format_double(rs.pole_residual_rel));
        json out;
        out["all_pass"] = false;
        out["checks"] = checks;
        emit_report(out, cfg);
        return exit_verify;
    }

    BuildConstants consts = make_constants(rs, cfg);
    const PoleCriticalLattice& pc = *rs.pc;

    { // constants invariants
        bool ok = consts.eps <= consts.eps0 && consts.eps > 0.0 &&
                  std::exp2(std::round(std::log2(consts.eps))) == consts.eps &&
                  consts.maxU < 2.0 * consts.minU && consts.R1 < consts.minU &&
                  consts.maxU < 2.0 * consts.R1 && consts.a >= 2.0 * consts.a0 &&
                  consts.M2 - consts.M1 < const_pi<double>() / 4.0 &&
                  consts.R2 == consts.a * consts.R1;
        check("cantor.constants_invariants", ok,
              "eps " + format_double(consts.eps) + ", R1 " + format_double(consts.R1) +
                  ", a " + format_double(consts.a));
    }

    { // parameter-map derivative: closed product formula vs recursion
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            cx beta(1.0 + 0.8 * consts.r * u(rng), 0.8 * consts.r * u(rng));
            for (int n = 2; n <= 4; ++n) {
                ParamMapValue v = h_n(ev, beta, n);
                if (v.singular) continue;
                cx prod = h_n_prime(ev, beta, n);
                worst = std::max(worst,
                                 std::abs(prod - v.derivative) / std::abs(v.derivative));
            }
        }
        check("dynamics.derivative_product", worst < 1e-9, "max rel " + format_double(worst));
    }

    { // level-2 prepole roots against the closed form b / e_star
        auto poles = first_poles_in_half_annulus(lat, consts.R2, consts.phi, consts.eps, 5);
        auto basis = make_pole_critical_basis<bigcx>(pc.m);
        wp_engine<bigcx> big_eng(basis.gamma1, basis.gamma2);
        double worst = 0.0;
        for (const PoleEntry& pe : poles) {
            bigcx target = to_big(pe.b);
            bigcx seed = target / to_big(pc.e_star);
            bigcx root = solve_param_root(big_eng, 1, target, seed);
            worst = std::max(worst, dbl(abs(root - seed) / abs(seed)));
        }
        check("cantor.level2_closed_form", worst < 1e-10, "max rel " + format_double(worst));
    }

    { // small cylinder family: nesting, diameters, residuals, densities
        CylinderTree tree = build_family(pc, consts, 3, 2, false);
        std::vector<LevelStats> stats = family_stats(tree);
        bool nested = true;
        double resid = 0.0;
        for (const Cylinder& cyl : tree.nodes) {
            nested = nested && cyl.nested_ok;
            resid = std::max(resid, cyl.residual_max);
        }
        bool diam_ok = true, dens_ok = true, dist_ok = true;
        for (const LevelStats& st : stats) {
            if (st.diam_max > st.diam_bound_upper) diam_ok = false;
            if (st.distortion_max > st.distortion_bound) dist_ok = false;
            // full-branching density estimate; the built one is branching-limited
            if (st.level < tree.depth && st.delta_full_est < st.delta_bound) dens_ok = false;
        }
        check("cantor.family_depth3",
              nested && resid < 1e-6 && diam_ok && dens_ok && dist_ok,
              std::string("nested ") + (nested ? "yes" : "NO") + ", max residual " +
                  format_double(resid));
        bool det = to_json(tree) == to_json(build_family(pc, consts, 3, 2, false));
        check("cantor.family_deterministic", det, "tree JSON identical across rebuilds");
    }

    { // escaping certificate at depth 3
        bigcx beta = escaping_parameter(pc, consts, {}, 3);
        auto basis = make_pole_critical_basis<bigcx>(pc.m);
        wp_engine<bigcx> big_eng(basis.gamma1, basis.gamma2);
        std::vector<bigcx> h, hp;
        bool full = run_param_orbit(big_eng, beta, 3, bigreal(0), h, hp);
        bool ok = full && dbl(abs(h[1])) > consts.R1;
        if (full)
            for (int n = 2; n <= 3; ++n) ok = ok && dbl(abs(h[n])) > std::ldexp(consts.R1, n);
        check("cantor.escaping_certificate", ok,
              full ? "|h_3| = " + format_double(dbl(abs(h[3]))) + " vs " +
                         format_double(std::ldexp(consts.R1, 3))
                   : "orbit hit a pole guard");
    }

    { // dimension estimator oracles and the closed-form family
        DimensionBound tern = mcmullen_bound(ternary_cantor_spec(), 400);
        DimensionBound dust = mcmullen_bound(planar_dust_spec(), 2000);
        double tgap = std::fabs(tern.extrapolated - std::log(2.0) / std::log(3.0));
        double dgap = std::fabs(dust.extrapolated - std::log(4.0) / std::log(3.0));
        check("dimension.oracles", tgap < 1e-6 && dgap < 1e-4,
              "ternary gap " + format_double(tgap) + ", dust gap " + format_double(dgap));
        ConsistencyReport rep = consistency_check(consts, cfg.n_max);
        check("dimension.consistency", rep.pass,
              "gap " + format_double(rep.gap) + " at a " + format_double(consts.a));
        double prev = -1.0;
        bool mono = true;
        for (double aa : {1e3, 1e6, 1e12}) {
            BuildConstants ca = consts;
            ca.a = aa;
            ca.R2 = aa * ca.R1;
            DimensionBound b = mcmullen_bound(closed_form_family_spec(ca), 400);
            if (b.extrapolated <= prev) mono = false;
            prev = b.extrapolated;
        }
        check("dimension.monotone_in_a", mono, "extrapolated value increases with a");
    }

    json out;
    out["all_pass"] = all_pass;
    out["checks"] = checks;
    out["constants"] = json::parse(to_json(consts));
    emit_report(out, cfg);
    return all_pass ? exit_ok : exit_verify;
}

int dispatch(const std::function<int()>& body) {
    try {
        return body();
    } catch (const invalid_spec_error& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return exit_bad_config;
    } catch (const invalid_lattice_error& e) {
        std::cerr << "invalid lattice: " << e.what() << "\n";
        return exit_bad_config;
    } catch (const constants_not_found_error& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return exit_bad_config;
    } catch (const construction_infeasible_error& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return exit_verify;
    } catch (const root_not_found_error& e) {
        std::cerr << "root not found: " << e.what() << "\n";
        return exit_no_root;
    } catch (const near_pole_error& e) {
        std::cerr << "evaluator failure: " << e.what() << "\n";
        return exit_evaluator;
    } catch (const wrong_regime_error& e) {
        std::cerr << "evaluator failure: " << e.what() << "\n";
        return exit_evaluator;
    } catch (const ill_conditioned_error& e) {
        std::cerr << "evaluator failure: " << e.what() << "\n";
        return exit_evaluator;
    } catch (const singular_orbit_error& e) {
        std::cerr << "evaluator failure: " << e.what() << "\n";
        return exit_evaluator;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weierdyn: iteration of beta*wp on pole-critical triangular lattices,\n"
                 "nested cylinder families, and Hausdorff-dimension lower bounds"};
    app.require_subcommand(1);

    CLI::App* lattice = app.add_subcommand("lattice", "lattice reports");
    lattice->require_subcommand(1);
    CLI::App* lattice_info = lattice->add_subcommand("info", "generators, invariants, "
                                                             "critical values, pole check");
    ConfigFlags f_info;
    add_config_flags(lattice_info, f_info);

    CLI::App* escape = app.add_subcommand("escape-map", "classify a raster of parameters "
                                                        "into a P2 graymap + counts CSV");
    ConfigFlags f_escape;
    add_config_flags(escape, f_escape);
    double escape_r_base = 0.0;
    escape->add_option("--r-base", escape_r_base,
                       "escape certificate base radius (default max|e_i|/2)");

    CLI::App* cantor = app.add_subcommand("cantor", "nested cylinder families");
    cantor->require_subcommand(1);
    CLI::App* cantor_build = cantor->add_subcommand("build", "build the family and emit "
                                                             "tree JSON + stats CSV");
    ConfigFlags f_build;
    add_config_flags(cantor_build, f_build);

    CLI::App* dim = app.add_subcommand("dim", "dimension bounds");
    dim->require_subcommand(1);
    CLI::App* dim_bound = dim->add_subcommand("bound", "McMullen estimator vs the closed "
                                                       "form 4/3 - 6 log2/log a");
    ConfigFlags f_dim;
    add_config_flags(dim_bound, f_dim);

    CLI::App* orbit_cmd = app.add_subcommand("orbit", "iterate one parameter and classify");
    ConfigFlags f_orbit;
    add_config_flags(orbit_cmd, f_orbit);
    std::vector<double> beta_flag, z0_flag;
    double orbit_r_base = 0.0;
    orbit_cmd->add_option("--beta", beta_flag, "parameter re,im")
        ->delimiter(',')
        ->expected(2)
        ->required();
    orbit_cmd->add_option("--z0", z0_flag, "start point re,im (default c1 = lambda1/2)")
        ->delimiter(',')
        ->expected(2);
    orbit_cmd->add_option("--r-base", orbit_r_base,
                          "escape certificate base radius (default R1/2)");

    CLI::App* verify = app.add_subcommand("verify", "invariant suites");
    verify->require_subcommand(1);
    CLI::App* verify_all = verify->add_subcommand("all", "run every module's invariant "
                                                         "suite; nonzero exit on failure");
    ConfigFlags f_verify;
    add_config_flags(verify_all, f_verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_bad_config;
    }

    auto run_verb = [&](ConfigFlags& flags, const std::function<int(const RunConfig&)>& body) {
        return dispatch([&] {
            RunConfig cfg = build_config(flags);
            validate_config(cfg);
            if (flags.dump_config) {
                std::cout << to_json(cfg) << "\n";
                return static_cast<int>(exit_ok);
            }
            return body(cfg);
        });
    };

    if (lattice_info->parsed())
        return run_verb(f_info, [](const RunConfig& cfg) { return cmd_lattice_info(cfg); });
    if (escape->parsed())
        return run_verb(f_escape, [&](const RunConfig& cfg) {
            return cmd_escape_map(cfg, escape_r_base);
        });
    if (cantor_build->parsed())
        return run_verb(f_build, [](const RunConfig& cfg) { return cmd_cantor_build(cfg); });
    if (dim_bound->parsed())
        return run_verb(f_dim, [](const RunConfig& cfg) { return cmd_dim_bound(cfg); });
    if (orbit_cmd->parsed())
        return run_verb(f_orbit, [&](const RunConfig& cfg) {
            cx beta(beta_flag[0], beta_flag[1]);
            std::optional<cx> z0;
            if (z0_flag.size() == 2) z0 = cx(z0_flag[0], z0_flag[1]);
            return cmd_orbit(cfg, beta, z0, orbit_r_base);
        });
    if (verify_all->parsed())
        return run_verb(f_verify, [](const RunConfig& cfg) { return cmd_verify_all(cfg); });
    return exit_bad_config;
}
