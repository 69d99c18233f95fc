#pragma once

#include <cmath>
#include <complex>
#include <limits>

// Small helpers shared by the double and multiprecision complex paths.
// Both std::complex<double> and the boost cpp_complex types expose value_type,
// member real()/imag(), and the usual math functions via ADL, so generic code
// here only needs `using std::...` fallbacks.

namespace weierdyn {

using cx = std::complex<double>;

template <class C>
using real_t = typename C::value_type;

template <class R>
R const_pi() {
    using std::atan;
    static const R value = 4 * atan(R(1));
    return value;
}

template <class C>
real_t<C> abs2(const C& z) {
    return z.real() * z.real() + z.imag() * z.imag();
}

// unit complex from angle, callable as cis<C>(t)
template <class C>
C cis(const real_t<C>& t) {
    using std::cos;
    using std::sin;
    return C(cos(t), sin(t));
}

inline double dbl(double x) { return x; }

template <class R>
double dbl(const R& x) {
    return x.template convert_to<double>();
}

inline cx to_cx(const cx& z) { return z; }

template <class C>
cx to_cx(const C& z) {
    return cx(dbl(z.real()), dbl(z.imag()));
}

// wrap angle into (-pi, pi]
template <class R>
R wrap_angle(R t) {
    using std::fmod;
    const R pi = const_pi<R>();
    t = fmod(t, 2 * pi);
    if (t <= -pi) t += 2 * pi;
    if (t > pi) t -= 2 * pi;
    return t;
}

} // namespace weierdyn
