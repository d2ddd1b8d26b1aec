#pragma once

#include "moltrap/angular.hpp"
#include "moltrap/errors.hpp"
#include "moltrap/potentials.hpp"
#include "moltrap/radial.hpp"
#include "moltrap/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

// Polarizabilities are in atomic units throughout this header. The light
// shift of a state is dE = -alpha * (2 pi / c) * I in atomic units, which is
// how the "energy per intensity" prefactor 3 pi c^2 / (2 omega^3) hbar Gamma
// becomes 3 c^3 Gamma / (4 omega^3) below.

namespace moltrap {

struct ResonantLine {
  int vprime = 0;
  double hbar_omega = 0.0; // E(Ab, v', J'=1) - E(X, 0, 0), hartree
  double gamma = 0.0;      // partial linewidth to v = 0, atomic angular frequency
  double b_vprime = 0.0;   // hartree
};

struct Background {
  double parallel = 0.0;
  double perpendicular = 0.0;

  double anisotropy() const { return parallel - perpendicular; }
};

struct PolarizabilitySpec {
  std::vector<ResonantLine> lines;
  double b_v = 0.0;
  Background background;

  // Detunings are measured from the first line.
  double reference() const { return lines.at(0).hbar_omega; }

  void validate() const {
    if (lines.empty())
      throw ConfigError("polarizability spec has no resonant line");
    if (!(b_v > 0.0))
      throw ConfigError("polarizability spec needs b_v > 0");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto &l = lines[i];
      if (!(l.gamma > 0.0))
        throw ConfigError("line v'=" + std::to_string(l.vprime) + " needs gamma > 0");
      if (!(l.hbar_omega > 0.0) || !(l.b_vprime > 0.0))
        throw ConfigError("line v'=" + std::to_string(l.vprime) +
                          " needs positive transition energy and rotational constant");
      for (std::size_t k = 0; k < i; ++k)
        if (lines[k].vprime == l.vprime)
          throw ConfigError("two lines share v'=" + std::to_string(l.vprime));
    }
  }
};

struct PolarizabilityValue {
  double real_part = 0.0;
  double imag_part = 0.0;
  int j = 0;
  int m = 0;
  double detuning = 0.0; // hartree, from the reference line of the PolarizabilitySpec
  double theta_p = 0.0;
  // Set when the detuning leaves the window where the closed form holds.
  bool outside_validity = false;
};

// Pole guard as a fraction of the local line spacing.
inline constexpr double pole_guard_fraction = 1e-6;

namespace detail {

// 3 c^3 Gamma / (4 omega^3): the squared vibrational transition dipole the
// line carries.
inline double line_weight(const ResonantLine &l) {
  const double c = constants::speed_of_light_au;
  return 3.0 * c * c * c * l.gamma / (4.0 * l.hbar_omega * l.hbar_omega * l.hbar_omega);
}

inline double gamma_for_weight(double weight, double hbar_omega) {
  const double c = constants::speed_of_light_au;
  return weight * 4.0 * hbar_omega * hbar_omega * hbar_omega / (3.0 * c * c * c);
}

inline std::string pole_message(int j, int jp, int vprime, double distance) {
  return "detuning within the pole guard of the J=" + std::to_string(j) + " -> J'=" +
         std::to_string(jp) + " (v'=" + std::to_string(vprime) +
         ") transition; distance " + std::to_string(distance) + " Eh";
}

inline bool outside_window(const PolarizabilitySpec &spec, const ResonantLine &l,
                           double delta) {
  const double a = std::abs(delta);
  if (a < 10.0 * l.gamma)
    return true;
  for (const auto &o : spec.lines)
    if (o.vprime != l.vprime && a > 0.5 * std::abs(o.hbar_omega - l.hbar_omega))
      return true;
  return false;
}

} // namespace detail

// Closed-form near-resonant polarizability of |X, v=0, J M>: a P-like and an
// R-like pole per retained vibrational line plus the anisotropic background.
inline PolarizabilityValue alpha_analytic(const PolarizabilitySpec &spec, double detuning,
                                          int j, int m, double theta_p) {
  spec.validate();
  const auto f = angular_factors(j, m, theta_p);
  PolarizabilityValue out{0.0, 0.0, j, m, detuning, theta_p, false};
  double resonant = 0.0;
  for (const auto &l : spec.lines) {
    const double delta = detuning + (spec.reference() - l.hbar_omega);
    const auto off = resonance_offsets(j, spec.b_v, l.b_vprime);
    const double guard =
        pole_guard_fraction * (j == 0 ? 2.0 * l.b_vprime : std::abs(off.l - off.r));
    const double w = detail::line_weight(l);
    if (f.a != 0.0) {
      const double d = delta + off.l;
      if (std::abs(d) < guard)
        throw PoleError(detail::pole_message(j, j - 1, l.vprime, d));
      resonant -= w * f.a / d;
    }
    if (f.b != 0.0) {
      const double d = delta + off.r;
      if (std::abs(d) < guard)
        throw PoleError(detail::pole_message(j, j + 1, l.vprime, d));
      resonant -= w * f.b / d;
    }
    out.outside_validity = out.outside_validity || detail::outside_window(spec, l, delta);
  }
  out.real_part = resonant + (f.a + f.b) * spec.background.anisotropy() +
                  spec.background.perpendicular;
  return out;
}

// Leading order of alpha_analytic for |detuning| much larger than the
// rotational offsets: every J, M shares the same resonant shape.
inline PolarizabilityValue alpha_fardetuned(const PolarizabilitySpec &spec, double detuning,
                                            int j, int m, double theta_p) {
  spec.validate();
  const auto f = angular_factors(j, m, theta_p);
  double bracket = spec.background.anisotropy();
  for (const auto &l : spec.lines) {
    const double delta = detuning + (spec.reference() - l.hbar_omega);
    if (delta == 0.0)
      throw PoleError("alpha_fardetuned evaluated at zero detuning of v'=" +
                      std::to_string(l.vprime));
    bracket -= detail::line_weight(l) / delta;
  }
  PolarizabilityValue out{0.0, 0.0, j, m, detuning, theta_p, false};
  out.real_part = (f.a + f.b) * bracket + spec.background.perpendicular;
  return out;
}

// ---------------------------------------------------------------------------
// Sum over states.

// One X(v, J) -> upper(v', J') transition with its vibrationally averaged
// electronic transition dipole.
struct ResonantTransition {
  int jp = 0;
  int vprime = 0;
  double energy = 0.0; // E_f - E_i, hartree
  double dipole = 0.0; // atomic units
  double gamma = 0.0;  // natural linewidth of the upper level (imaginary part only)
};

using LevelsByJ = std::map<int, std::vector<RovibLevel>>;

// Transitions from `initial` to the lowest `retain` levels of each
// J' = J -+ 1 in `upper`. The dipole connects channel `lower_channel` of the
// initial level to channel `upper_channel` of the upper ones.
inline std::vector<ResonantTransition>
resonant_transitions(const RovibLevel &initial, const LevelsByJ &upper,
                     const DipoleFunction &dipole, int retain,
                     std::size_t upper_channel = CoupledModel::channel_a,
                     std::size_t lower_channel = 0) {
  std::vector<ResonantTransition> out;
  auto d = [&](double r) { return dipole(r); };
  for (int jp : {initial.j - 1, initial.j + 1}) {
    if (jp < 0)
      continue;
    const auto it = upper.find(jp);
    if (it == upper.end())
      throw ConfigError("no upper levels computed for J'=" + std::to_string(jp));
    const auto &levels = it->second;
    const int count = std::min<int>(retain, static_cast<int>(levels.size()));
    for (int k = 0; k < count; ++k) {
      const auto &f = levels[static_cast<std::size_t>(k)];
      ResonantTransition t;
      t.jp = jp;
      t.vprime = f.v;
      t.energy = f.energy - initial.energy;
      t.dipole = radial_matrix_element(initial, lower_channel, d, f, upper_channel);
      out.push_back(t);
    }
  }
  return out;
}

namespace detail {

inline double local_spacing(std::span<const ResonantTransition> ts) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < ts.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) {
      const double d = std::abs(ts[a].energy - ts[b].energy);
      if (d > 0.0)
        gap = std::min(gap, d);
    }
  if (!std::isfinite(gap))
    gap = ts.empty() ? 1.0 : std::abs(ts.front().energy);
  return gap;
}

} // namespace detail

// Second-order sum over the given transitions, rotating and counter-rotating
// denominators, plus the background weighted by the total line strength.
// The photon energy is `reference + detuning`; passing the two pieces keeps
// the resonant denominators free of cancellation.
inline PolarizabilityValue alpha_sum_over_states(std::span<const ResonantTransition> transitions,
                                                 const Background &background, int j, int m,
                                                 double theta_p, double reference,
                                                 double detuning) {
  if (j < 0 || std::abs(m) > j)
    throw InvalidArgument("alpha_sum_over_states: need |M| <= J");
  const double guard = pole_guard_fraction * detail::local_spacing(transitions);
  const double photon = reference + detuning;
  const double s_lower = j > 0 ? line_strength(j - 1, j, m, theta_p) : 0.0;
  const double s_upper = line_strength(j + 1, j, m, theta_p);
  double resonant = 0.0;
  for (const auto &t : transitions) {
    if (t.jp != j - 1 && t.jp != j + 1)
      throw InvalidArgument("transition to J'=" + std::to_string(t.jp) +
                            " is not dipole-allowed from J=" + std::to_string(j));
    const double s = t.jp == j - 1 ? s_lower : s_upper;
    const double rotating = (t.energy - reference) - detuning;
    if (std::abs(rotating) < guard)
      throw PoleError(detail::pole_message(j, t.jp, t.vprime, rotating));
    resonant += s * t.dipole * t.dipole * (1.0 / rotating + 1.0 / (t.energy + photon));
  }
  PolarizabilityValue out{0.0, 0.0, j, m, detuning, theta_p, false};
  out.real_part = resonant + (s_lower + s_upper) * background.anisotropy() +
                  background.perpendicular;
  return out;
}

// Builds the closed-form spec from solved levels: transition energies and
// widths from the J=0 -> J'=1 line of each retained v', rotational constants
// from the lowest spacings. The counter-rotating part of each retained line is
// off-resonant and parallel (Omega = 0 -> 0), so with `fold_counter_rotating`
// it is carried in the parallel background at the reference frequency.
inline PolarizabilitySpec spec_from_levels(const LevelsByJ &x_levels, const LevelsByJ &ab_levels,
                                           const DipoleFunction &dipole,
                                           const Background &background,
                                           std::span<const int> vprimes,
                                           bool fold_counter_rotating = true,
                                           std::size_t upper_channel = CoupledModel::channel_a) {
  const auto &x0 = x_levels.at(0).at(0);
  const auto &x1 = x_levels.at(1).at(0);
  PolarizabilitySpec spec;
  spec.b_v = 0.5 * (x1.energy - x0.energy);
  spec.background = background;
  auto d = [&](double r) { return dipole(r); };
  for (int vp : vprimes) {
    const auto &f1 = ab_levels.at(1).at(static_cast<std::size_t>(vp));
    const auto &f0 = ab_levels.at(0).at(static_cast<std::size_t>(vp));
    const double mu = radial_matrix_element(x0, 0, d, f1, upper_channel);
    ResonantLine l;
    l.vprime = vp;
    l.hbar_omega = f1.energy - x0.energy;
    l.b_vprime = 0.5 * (f1.energy - f0.energy);
    l.gamma = detail::gamma_for_weight(mu * mu, l.hbar_omega);
    spec.lines.push_back(l);
  }
  if (fold_counter_rotating)
    for (const auto &l : spec.lines)
      spec.background.parallel += detail::line_weight(l) / (l.hbar_omega + spec.reference());
  return spec;
}

// ---------------------------------------------------------------------------
// Imaginary part.

// Transitions from `initial` to every level of J' = J -+ 1 in `upper`, each
// paired with its natural linewidth from `widths` (same shape as `upper`).
inline std::vector<ResonantTransition>
decaying_transitions(const RovibLevel &initial, const LevelsByJ &upper,
                     const std::map<int, std::vector<double>> &widths,
                     const DipoleFunction &dipole,
                     std::size_t upper_channel = CoupledModel::channel_a,
                     std::size_t lower_channel = 0) {
  int retain = 0;
  for (const auto &[jp, lv] : upper)
    retain = std::max(retain, static_cast<int>(lv.size()));
  auto ts = resonant_transitions(initial, upper, dipole, retain, upper_channel, lower_channel);
  std::map<int, int> seen;
  for (auto &t : ts) {
    const auto &w = widths.at(t.jp);
    t.gamma = w.at(static_cast<std::size_t>(seen[t.jp]++));
  }
  return ts;
}

// Im alpha = -(1/(eps0 c)) sum_f (hbar gamma_f / 2) |<f|d R.eps|i>|^2 /
// ((E_f - E_i)^2 - (h nu)^2), expressed in atomic units of polarizability
// (the 1/(eps0 c) and 1/2 combine with the 2 pi / c intensity factor).
inline PolarizabilityValue alpha_imag(std::span<const ResonantTransition> transitions, int j,
                                      int m, double theta_p, double photon_energy) {
  if (j < 0 || std::abs(m) > j)
    throw InvalidArgument("alpha_imag: need |M| <= J");
  const double guard = pole_guard_fraction * detail::local_spacing(transitions);
  const double s_lower = j > 0 ? line_strength(j - 1, j, m, theta_p) : 0.0;
  const double s_upper = line_strength(j + 1, j, m, theta_p);
  double sum = 0.0;
  for (const auto &t : transitions) {
    const double s = t.jp == j - 1 ? s_lower : s_upper;
    const double gap = t.energy - photon_energy;
    if (std::abs(gap) < guard)
      throw PoleError(detail::pole_message(j, t.jp, t.vprime, gap));
    const double den = gap * (t.energy + photon_energy);
    sum += t.gamma * s * t.dipole * t.dipole / den;
  }
  PolarizabilityValue out;
  out.imag_part = -sum;
  out.j = j;
  out.m = m;
  out.theta_p = theta_p;
  out.detuning = photon_energy;
  return out;
}

} // namespace moltrap
