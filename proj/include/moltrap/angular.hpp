#pragma once

#include "moltrap/errors.hpp"
#include "moltrap/wigner.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace moltrap {

// Rotational line-strength weights of the two branches reaching J' = J - 1
// (a) and J' = J + 1 (b) from |J M> for light linearly polarised at angle
// theta_p to the quantisation axis.
struct AngularFactors {
  double a = 0.0;
  double b = 0.0;
  int j = 0;
  int m = 0;
  double theta_p = 0.0;
};

inline AngularFactors angular_factors(int j, int m, double theta_p) {
  if (j < 0 || std::abs(m) > j)
    throw InvalidArgument("angular_factors: need |M| <= J, got J=" +
                          std::to_string(j) + " M=" + std::to_string(m));
  const double jj = j;
  const double mm = static_cast<double>(m) * m;
  const double c2 = std::cos(theta_p) * std::cos(theta_p);
  const double s2 = std::sin(theta_p) * std::sin(theta_p);

  AngularFactors f{0.0, 0.0, j, m, theta_p};
  if (j > 0) {
    const double den = 2.0 * (2 * jj + 1) * (2 * jj - 1);
    if (std::abs(m) < j) {
      f.a = (jj * (jj + 1) - 3 * mm) / den * c2 + ((jj - 1) * jj + mm) / den;
    } else {
      const double am = std::abs(m);
      f.a = (jj + am) * (jj + am - 1) / (2.0 * den) * s2;
    }
  }
  const double den_b = 2.0 * (2 * jj + 1) * (2 * jj + 3);
  f.b = (jj * (jj + 1) - 3 * mm) / den_b * c2 + ((jj + 1) * (jj + 2) + mm) / den_b;
  return f;
}

// Detuning offsets of the P-like (J -> J-1) and R-like (J -> J+1) lines
// relative to the J = 0 -> J' = 1 reference transition; poles of the
// resonant polarizability sit at detuning -l and -r. Units follow the inputs.
struct ResonanceOffsets {
  double l = 0.0;
  double r = 0.0;
  double b_v = 0.0;
  double b_vprime = 0.0;
};

inline ResonanceOffsets resonance_offsets(int j, double b_v, double b_vprime) {
  if (j < 0)
    throw InvalidArgument("resonance_offsets: negative J");
  if (!(b_v > 0.0) || !(b_vprime > 0.0))
    throw InvalidArgument("resonance_offsets: rotational constants must be positive");
  const double jj = j;
  ResonanceOffsets o;
  o.b_v = b_v;
  o.b_vprime = b_vprime;
  o.l = jj * (jj + 1) * b_v - (jj * (jj - 1) - 2) * b_vprime;
  o.r = jj * (jj + 1) * b_v - ((jj + 1) * (jj + 2) - 2) * b_vprime;
  return o;
}

// sum_M' |<J' M'| eps . C_1 |J M>|^2 for a real polarisation vector in the
// xz-plane at angle theta_p from z. Built from 3-j symbols, independently of
// the closed-form factors above (which it reproduces for J' = J -+ 1).
inline double line_strength(int jp, int j, int m, double theta_p) {
  if (j < 0 || jp < 0 || std::abs(m) > j)
    throw InvalidArgument("line_strength: invalid quantum numbers");
  // Spherical components eps_q of (sin t, 0, cos t).
  const double s = std::sin(theta_p) / std::sqrt(2.0);
  const double eps[3] = {s, std::cos(theta_p), -s}; // q = -1, 0, +1
  double total = 0.0;
  for (int mp = -jp; mp <= jp; ++mp) {
    const int q = mp - m;
    if (std::abs(q) > 1)
      continue;
    // eps . C = sum_q (-1)^q eps_{-q} C_q
    const double sign = (q % 2 == 0) ? 1.0 : -1.0;
    const double amp = sign * eps[1 - q] * rot_tensor_element(jp, mp, 1, q, j, m);
    total += amp * amp;
  }
  return total;
}

} // namespace moltrap
