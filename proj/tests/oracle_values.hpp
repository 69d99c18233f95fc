#pragma once

// Reference values computed independently at 40-digit precision through the
// theta-series representation of wp (periods reduced to (1, tau), q-series
// nome summation, derivatives by high-precision differentiation). The
// generator was anchored against two closed forms before freezing:
//   unit triangular lattice [1, e^{2 pi i/3}]:  g3 = Gamma(1/3)^18 / (2 pi)^6
//   square lattice [1, i]:                      g2 = Gamma(1/4)^8 / (16 pi^2)
// both reproduced to 25 significant digits.

#include <complex>

namespace oracle {

using cx = std::complex<double>;

// unit triangular lattice [1, e^{2 pi i/3}]
inline constexpr double utri_g2 = 0.0;
inline constexpr double utri_g3 = 820.82443707955622;
inline constexpr double utri_e1 = 5.8983439694847699; // wp(1/2), real

inline const cx utri_z0{0.31, 0.17};
inline const cx utri_wp_z0{4.1081179563945544, -6.3322476291882982};
inline const cx utri_wpp_z0{-2.6533714868900429, 50.271624560633801};
inline const cx utri_z1{-0.22, 0.41};
inline const cx utri_wp_z1{-3.0943989852760042, 5.1460504841540286};
inline const cx utri_wpp_z1{-7.3415187561354801, -3.1459831616601554};

// square lattice [1, i]
inline constexpr double sq_g2 = 189.07272012923385;
inline constexpr double sq_g3 = 0.0;
inline const cx sq_zs{0.31, 0.21};
inline const cx sq_wp_zs{3.0646846971448551, -5.4280458567816251};
inline const cx sq_wpp_zs{12.745811463477565, 41.356124839147485};

// generic oblique lattice [1.1 + 0.2i, -0.4 + 0.9i]
inline const cx gen_l1{1.1, 0.2};
inline const cx gen_l2{-0.4, 0.9};
inline const cx gen_g2{18.262207265902336, -136.67132956543576};
inline const cx gen_g3{359.26112769100089, 75.297620910162698};
inline const cx gen_zg{0.37, 0.29};
inline const cx gen_wp_zg{2.0216923948326934, -4.2704117410023453};
inline const cx gen_wpp_zg{10.465474968862757, 18.205316062992570};

// pole-critical lattice for m = -11 and the second iterate of the critical
// orbit at beta0 = 1.01 + 0.005i (the first iterate is beta0 * m * gamma1)
inline const cx pc11_gamma1{0.40620862553247601, 0.70357397789496875};
inline const cx pc11_beta0{1.01, 0.005};
inline const cx pc11_h1_beta0{-4.4742812608815852, -7.8390483688173890};
inline const cx pc11_h2_beta0{-100.37743383000716, -12.601571010016410};

} // namespace oracle
