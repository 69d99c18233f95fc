#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace weierdyn {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_lattice_error : error {
    using error::error;
};

// wp/wp_prime called inside pole_exclusion_radius
struct near_pole_error : error {
    std::complex<double> pole;
    near_pole_error(const std::string& msg, std::complex<double> b) : error(msg), pole(b) {}
};

// laurent_factors called outside every eps0-ball
struct wrong_regime_error : error {
    using error::error;
};

struct constants_not_found_error : error {
    using error::error;
};

struct construction_infeasible_error : error {
    using error::error;
};

struct root_not_found_error : error {
    using error::error;
};

// orbit hits a pole before the requested level
struct singular_orbit_error : error {
    int hit_index;
    std::complex<double> pole;
    singular_orbit_error(const std::string& msg, int k, std::complex<double> b)
        : error(msg), hit_index(k), pole(b) {}
};

// derivative factor vanished in the product formula
struct ill_conditioned_error : error {
    int index;
    ill_conditioned_error(const std::string& msg, int k) : error(msg), index(k) {}
};

struct invalid_spec_error : error {
    using error::error;
};

} // namespace weierdyn
