#pragma once

#include <boost/multiprecision/cpp_complex.hpp>

#include "weierdyn/complexops.hpp"

// 50-digit complex arithmetic for the deep levels of the cylinder tree.
// Level-4 cylinders have diameters near 1e-16 (below double ULP at beta ~ 1)
// and level-5 near 1e-25, so the parameter-space machinery runs at this
// precision; rasters and shallow sweeps stay in double.

namespace weierdyn {

using bigcx = boost::multiprecision::cpp_complex_50;
using bigreal = bigcx::value_type;

inline bigcx to_big(const cx& z) { return bigcx(z.real(), z.imag()); }

} // namespace weierdyn
