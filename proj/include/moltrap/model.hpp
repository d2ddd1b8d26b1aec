#pragma once

#include "moltrap/errors.hpp"
#include "moltrap/polarizability.hpp"
#include "moltrap/potentials.hpp"
#include "moltrap/radial.hpp"
#include "moltrap/units.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Desk-scale NaRb surrogate: Morse curves for X, b and A, a constant
// spin-orbit coupling between A and b, and a constant X-A transition dipole.
// Nothing here is ab initio; the curves are pinned to the spectroscopic
// quantities that matter for the light shift (B_0, the reference transition
// energy and b-dominated lowest upper levels).

namespace moltrap::model {

struct SurrogateParameters {
  double reduced_mass_amu = 18.180537777; // 23Na 87Rb

  double x_b_e_cm = 0.06970;
  double x_omega_e_cm = 106.9;
  std::optional<double> x_depth_cm; // default: 50 quanta

  double b_r_e_bohr = 6.88;
  double b_omega_e_cm = 100.0;
  double b_depth_cm = 5000.0;

  double a_r_e_bohr = 8.0;
  double a_omega_e_cm = 70.0;
  double a_depth_cm = 4000.0;
  double crossing_bohr = 7.5; // where the diabatic A and b curves meet

  double xi_cm = 40.0;           // A-b coupling
  double transition_cm = 11306.4; // E(Ab, v'=0, J'=1) - E(X, 0, 0)
  double dipole_au = 3.0;        // X-A electronic transition dipole

  // One grid for every curve so that matrix elements need no interpolation.
  RadialGrid grid{5.0, 11.0, 400};
};

struct Surrogate {
  SurrogateParameters params;
  double mu = 0.0; // electron masses
  PotentialCurve x;
  CoupledModel ab;
  DipoleFunction dipole;
};

inline Surrogate build_surrogate(const SurrogateParameters &p) {
  Surrogate s;
  s.params = p;
  s.mu = p.reduced_mass_amu * constants::amu_electron_masses;
  s.x = calibrate_morse(p.x_b_e_cm, p.x_omega_e_cm, p.reduced_mass_amu, 0.0, p.x_depth_cm, "X");

  MorseParameters bp;
  const double h = constants::hartree_inverse_cm;
  bp.r_e = p.b_r_e_bohr;
  bp.depth = p.b_depth_cm / h;
  bp.range = (p.b_omega_e_cm / h) * std::sqrt(s.mu / (2.0 * bp.depth));
  bp.asymptote = bp.depth;
  const auto b = PotentialCurve::morse(bp, "b");
  const auto a = morse_through_crossing(b, p.crossing_bohr, p.a_r_e_bohr, p.a_omega_e_cm,
                                        p.a_depth_cm, p.reduced_mass_amu, "A");
  s.ab = CoupledModel{a, b, RadialFunction::constant(p.xi_cm / h), 0.0};
  s.dipole = DipoleFunction{RadialFunction::constant(p.dipole_au), "X-A"};

  // Align the reference line.
  const auto x0 = solve_single(s.x, p.grid, s.mu, 0, SolveOptions{1});
  const auto f1 = solve_coupled(s.ab, p.grid, s.mu, 1, SolveOptions{1});
  if (x0.empty() || f1.empty())
    throw CalibrationError("surrogate: no bound level to align");
  s.ab.shift = p.transition_cm / h - (f1[0].energy - x0[0].energy);
  return s;
}

// Lowest `count` levels of X for each J.
inline LevelsByJ x_levels(const Surrogate &s, std::span<const int> js, int count) {
  LevelsByJ out;
  for (int j : js)
    out[j] = solve_single(s.x, s.params.grid, s.mu, j, SolveOptions{count});
  return out;
}

inline LevelsByJ ab_levels(const Surrogate &s, std::span<const int> jps, int count) {
  LevelsByJ out;
  for (int jp : jps)
    out[jp] = solve_coupled(s.ab, s.params.grid, s.mu, jp, SolveOptions{count});
  return out;
}

// Natural linewidths of the given upper levels: A-channel decay to X.
inline std::map<int, std::vector<double>> linewidths(const Surrogate &s, const LevelsByJ &upper,
                                                     double *max_clamped = nullptr) {
  const CoupledModel ab = s.ab;
  DecayTarget t{CoupledModel::channel_a,
                [ab](double r) { return ab.channel_potential(CoupledModel::channel_a, r); }, s.x,
                s.dipole};
  std::map<int, std::vector<double>> out;
  double worst = 0.0;
  for (const auto &[jp, levels] : upper)
    for (const auto &l : levels) {
      const auto w = linewidth(l, std::span<const DecayTarget>(&t, 1));
      out[jp].push_back(w.gamma);
      worst = std::max(worst, w.clamped_weight);
    }
  if (max_clamped)
    *max_clamped = worst;
  return out;
}

} // namespace moltrap::model
