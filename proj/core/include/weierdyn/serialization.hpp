#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "weierdyn/cantor.hpp"
#include "weierdyn/dimension.hpp"
#include "weierdyn/dynamics.hpp"

namespace weierdyn {

// one flat config drives every command; unset lattice generators fall back
// to the pole-critical construction for m
struct RunConfig {
    long m = -11;
    bool explicit_lattice = false;
    cx lambda1{1.0, 0.0};
    cx lambda2{-0.5, 0.8660254037844386};
    bool require_pole_critical = false;

    double r = 0.03125;
    double eps0 = 0.25;
    double a = 0.0; // 0 requests the smallest admissible ratio

    int depth = 3;
    int branching = 2;
    bool full_sweep = true;

    double center_re = 1.0;
    double center_im = 0.0;
    double radius = 0.05;
    int resolution = 256;
    int max_n = 12;

    int n_max = 2000;
    std::string family = "built";

    int trunc = 200;
    unsigned seed = 1u;
    std::string output = "";
};

std::string to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

std::string to_json(const Lattice& lat);
std::string to_json(const BuildConstants& c);
std::string to_json(const CylinderTree& tree);
std::string to_json(const OrbitTrace& orbit);
std::string to_json(const ConsistencyReport& rep, const DimensionBound& bound);

void write_orbit_csv(std::ostream& os, const OrbitTrace& orbit);
void write_stats_csv(std::ostream& os, const std::vector<LevelStats>& stats);

// 17 significant digits, round-trip exact
std::string format_double(double x);

} // namespace weierdyn
