#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "weierdyn/cantor.hpp"

namespace weierdyn {

// Nested family in R^d described through per-level logs. log_delta(n) is the
// log of the fraction of a level-n piece covered by its children, log_diam(n)
// the log of the largest level-n diameter. Everything downstream only ever
// reads the logs, so families with astronomically small pieces stay finite.
struct NestedFamilySpec {
    double ambient_dim = 2.0;
    std::function<double(int)> log_delta;
    std::function<double(int)> log_diam;
    std::string description;
    double limit = std::numeric_limits<double>::quiet_NaN(); // known asymptote, if any

    double delta(int n) const { return std::exp(log_delta(n)); }
    double diam(int n) const { return std::exp(log_diam(n)); }
};

// partials[k] = d - sum_{j<=k+1} |log delta_j| / |log diam_{k+1}|, each a
// valid Hausdorff-dimension lower bound for the intersection set
struct DimensionBound {
    std::vector<double> partials;
    double extrapolated = 0.0;  // affine-in-1/n fit over the tail window
    double liminf_window = 0.0; // worst partial inside the fit window
    double fit_slope = 0.0;
    bool has_formula = false;
    double formula_value = 0.0;
};

DimensionBound mcmullen_bound(const NestedFamilySpec& spec, int n_max);

// classical references with known dimensions
NestedFamilySpec ternary_cantor_spec();
NestedFamilySpec planar_dust_spec();

// family taken from the certified cylinder bounds: density_bound and
// diam_upper_bound at every level
NestedFamilySpec closed_form_family_spec(const BuildConstants& consts);

// limit of the closed-form family partials, 4/3 - 6 log 2 / log a
double analytic_bound(double a);

struct ConsistencyReport {
    double a = 0.0;
    int n_max = 0;
    double extrapolated = 0.0;
    double analytic = 0.0;
    double gap = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

ConsistencyReport consistency_check(const BuildConstants& consts, int n_max);

struct ScaleRange {
    double delta_min = 0.0;
    double delta_max = 0.0;
    int num_scales = 8;
};

// least-squares slope of log N(delta) against log(1/delta) over a geometric
// scale ladder; N counts occupied delta-boxes
double box_count_dimension(const std::vector<cx>& points, const ScaleRange& scales);

} // namespace weierdyn
