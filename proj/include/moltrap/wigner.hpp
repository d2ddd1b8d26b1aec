#pragma once

#include "moltrap/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

namespace moltrap {

namespace detail {

// n! in extended precision; 0 <= n <= 200 covers every 3-j argument with
// j <= 60, far beyond the rotational and nuclear spins used here.
inline const std::array<long double, 201> &factorial_table() {
  static const std::array<long double, 201> table = [] {
    std::array<long double, 201> t{};
    t[0] = 1.0L;
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] * static_cast<long double>(i);
    return t;
  }();
  return table;
}

inline long double fact(int n) {
  if (n < 0 || n > 200)
    throw InvalidArgument("factorial argument out of range: " + std::to_string(n));
  return factorial_table()[static_cast<std::size_t>(n)];
}

inline int twice_of(double x) {
  const double t = 2.0 * x;
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9)
    throw InvalidArgument("angular momentum argument is not a half-integer: " +
                          std::to_string(x));
  return static_cast<int>(r);
}

} // namespace detail

// Wigner 3-j symbol with every argument given as twice its value, so
// half-integers stay exact. Racah's single-sum formula.
inline double wigner3j_2(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tj1 < 0 || tj2 < 0 || tj3 < 0)
    throw InvalidArgument("3-j symbol with negative j");
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3)
    throw InvalidArgument("3-j symbol with |m| > j");
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0)
    throw InvalidArgument("3-j symbol with j and m of mixed integrality");

  if (tm1 + tm2 + tm3 != 0)
    return 0.0;
  if (tj3 > tj1 + tj2 || tj3 < std::abs(tj1 - tj2))
    return 0.0;
  if ((tj1 + tj2 + tj3) % 2 != 0)
    return 0.0;

  // All integers from here on (already divided by two).
  const int a = (tj1 + tj2 - tj3) / 2;
  const int b = (tj1 - tj2 + tj3) / 2;
  const int c = (-tj1 + tj2 + tj3) / 2;
  const int big = (tj1 + tj2 + tj3) / 2 + 1;

  const int j1pm1 = (tj1 + tm1) / 2, j1mm1 = (tj1 - tm1) / 2;
  const int j2pm2 = (tj2 + tm2) / 2, j2mm2 = (tj2 - tm2) / 2;
  const int j3pm3 = (tj3 + tm3) / 2, j3mm3 = (tj3 - tm3) / 2;

  using detail::fact;
  const long double triangle = fact(a) * fact(b) * fact(c) / fact(big);
  const long double norm = std::sqrt(triangle * fact(j1pm1) * fact(j1mm1) *
                                     fact(j2pm2) * fact(j2mm2) * fact(j3pm3) *
                                     fact(j3mm3));

  // k runs over values keeping every factorial argument non-negative.
  const int t1 = (tj3 - tj2 + tm1) / 2; // j3 - j2 + m1
  const int t2 = (tj3 - tj1 - tm2) / 2; // j3 - j1 - m2
  const int kmin = std::max({0, -t1, -t2});
  const int kmax = std::min({a, j1mm1, j2pm2});

  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double term = fact(k) * fact(a - k) * fact(j1mm1 - k) *
                             fact(j2pm2 - k) * fact(t1 + k) * fact(t2 + k);
    sum += (k % 2 == 0 ? 1.0L : -1.0L) / term;
  }

  // Overall phase (-1)^(j1 - j2 - m3).
  const int phase = (tj1 - tj2 - tm3) / 2;
  const long double sign = (std::abs(phase) % 2 == 0) ? 1.0L : -1.0L;
  return static_cast<double>(sign * norm * sum);
}

inline double wigner3j(double j1, double j2, double j3, double m1, double m2,
                       double m3) {
  using detail::twice_of;
  return wigner3j_2(twice_of(j1), twice_of(j2), twice_of(j3), twice_of(m1),
                    twice_of(m2), twice_of(m3));
}

// <j1 m1 j2 m2 | J M>, arguments doubled.
inline double clebsch_gordan_2(int tj1, int tm1, int tj2, int tm2, int tJ,
                               int tM) {
  const int phase = (tj1 - tj2 + tM) / 2;
  const double sign = (std::abs(phase) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(tJ + 1.0) * wigner3j_2(tj1, tj2, tJ, tm1, tm2, -tM);
}

// <J' M' | C_{k q} | J M> for integer rotational quantum numbers, with C the
// Racah-normalised spherical harmonic of the molecular axis.
inline double rot_tensor_element(int jp, int mp, int k, int q, int j, int m) {
  if (j < 0 || jp < 0 || k < 0)
    throw InvalidArgument("rot_tensor_element: negative angular momentum");
  if (std::abs(m) > j || std::abs(mp) > jp || std::abs(q) > k)
    throw InvalidArgument("rot_tensor_element: projection exceeds its j");
  if (mp != m + q)
    return 0.0;
  if (jp < std::abs(j - k) || jp > j + k || (j + k + jp) % 2 != 0)
    return 0.0;
  const double sign = (std::abs(mp) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt((2.0 * jp + 1.0) * (2.0 * j + 1.0)) *
         wigner3j_2(2 * jp, 2 * k, 2 * j, -2 * mp, 2 * q, 2 * m) *
         wigner3j_2(2 * jp, 2 * k, 2 * j, 0, 0, 0);
}

} // namespace moltrap
