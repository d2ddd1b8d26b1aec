#pragma once

#include "moltrap/angular.hpp"
#include "moltrap/errors.hpp"
#include "moltrap/hyperfine.hpp"
#include "moltrap/polarizability.hpp"
#include "moltrap/roots.hpp"
#include "moltrap/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace moltrap::magic {

enum class MagicKind { detuning, angle };

struct MagicSolution {
  MagicKind kind = MagicKind::detuning;
  double location = 0.0; // GHz or degrees
  std::string state_a;
  std::string state_b;
  double residual = 0.0; // alpha_a - alpha_b at the location
  std::pair<double, double> bracket;
  int iterations = 0;
};

inline constexpr double detuning_residual_tolerance = 1e-10; // a.u.
inline constexpr double detuning_xtol_ghz = 1e-9;
inline constexpr double angle_xtol_deg = 1e-7;

namespace detail {

inline double ghz_to_hartree(double ghz) { return convert(ghz, Unit::ghz, Unit::hartree); }
inline double hartree_to_ghz(double eh) { return convert(eh, Unit::hartree, Unit::ghz); }

inline int checked_m(int j, int m) {
  if (std::abs(m) > j)
    throw InvalidArgument("M=" + std::to_string(m) + " is not allowed for J=" + std::to_string(j));
  return m;
}

inline std::string rot_label(int j, int m) {
  return "J=" + std::to_string(j) + ",M=" + std::to_string(m);
}

inline std::string hf_label(const hyperfine::StateRef &s) {
  return "J=" + std::to_string(s.j) + ",M=" + std::to_string(s.m) + ",#" + std::to_string(s.rank);
}

} // namespace detail

// Detunings (GHz) of the poles of alpha_analytic for |J M>.
inline std::vector<double> analytic_poles(const PolarizabilitySpec &spec, int j, int m,
                                          double theta_p) {
  const auto f = angular_factors(j, m, theta_p);
  std::vector<double> out;
  for (const auto &l : spec.lines) {
    const auto off = resonance_offsets(j, spec.b_v, l.b_vprime);
    const double shift = l.hbar_omega - spec.reference();
    if (f.a != 0.0)
      out.push_back(detail::hartree_to_ghz(shift - off.l));
    if (f.b != 0.0)
      out.push_back(detail::hartree_to_ghz(shift - off.r));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// alpha(J_a, M_a) - alpha(J_b, M_b) from the closed form, atomic units.
inline double differential_alpha(const PolarizabilitySpec &spec, int j_a, int m_a, int j_b,
                                 int m_b, double detuning_ghz, double theta_p) {
  const double d = detail::ghz_to_hartree(detuning_ghz);
  return alpha_analytic(spec, d, j_a, m_a, theta_p).real_part -
         alpha_analytic(spec, d, j_b, m_b, theta_p).real_part;
}

// Crossing of alpha(J_a, M) and alpha(J_b, M) inside [lo, hi] (GHz).
inline MagicSolution find_magic_detuning(const PolarizabilitySpec &spec, int j_a, int j_b, int m,
                                         double theta_p, double lo_ghz, double hi_ghz) {
  spec.validate();
  if (!(lo_ghz < hi_ghz))
    throw InvalidArgument("find_magic_detuning: bracket must satisfy lo < hi");
  const int m_a = detail::checked_m(j_a, m);
  const int m_b = detail::checked_m(j_b, m);
  for (int j : {j_a, j_b})
    for (double p : analytic_poles(spec, j, m, theta_p))
      if (p >= lo_ghz && p <= hi_ghz)
        throw PoleError("bracket [" + std::to_string(lo_ghz) + ", " + std::to_string(hi_ghz) +
                        "] GHz contains a pole of J=" + std::to_string(j) + " at " +
                        std::to_string(p) + " GHz");
  auto f = [&](double x) { return differential_alpha(spec, j_a, m_a, j_b, m_b, x, theta_p); };
  const auto r = roots::brent(f, lo_ghz, hi_ghz,
                              {detuning_xtol_ghz, 0.1 * detuning_residual_tolerance, 300});
  MagicSolution s;
  s.kind = MagicKind::detuning;
  s.location = r.x;
  s.state_a = detail::rot_label(j_a, m_a);
  s.state_b = detail::rot_label(j_b, m_b);
  s.residual = f(r.x);
  s.bracket = {lo_ghz, hi_ghz};
  s.iterations = r.iterations;
  return s;
}

// All crossings of alpha(J_a, M) and alpha(J_b, M) found by a coarse scan of
// [lo, hi] followed by Brent refinement, in ascending order. Brackets that
// straddle a pole are skipped.
inline std::vector<MagicSolution> scan_magic_detunings(const PolarizabilitySpec &spec, int j_a,
                                                       int j_b, int m, double theta_p,
                                                       double lo_ghz, double hi_ghz,
                                                       int points = 512) {
  const int m_a = detail::checked_m(j_a, m);
  const int m_b = detail::checked_m(j_b, m);
  auto f = [&](double x) { return differential_alpha(spec, j_a, m_a, j_b, m_b, x, theta_p); };
  std::vector<MagicSolution> out;
  for (const auto &sc : roots::scan_sign_changes(f, lo_ghz, hi_ghz, points)) {
    if (sc.pole)
      continue;
    if (sc.f_hi == 0.0) {
      out.push_back({MagicKind::detuning, sc.hi, detail::rot_label(j_a, m_a),
                     detail::rot_label(j_b, m_b), 0.0, {sc.lo, sc.hi}, 0});
      continue;
    }
    out.push_back(find_magic_detuning(spec, j_a, j_b, m, theta_p, sc.lo, sc.hi));
  }
  return out;
}

// max - min of alpha over the listed rotational levels at one detuning.
inline double alpha_spread(const PolarizabilitySpec &spec, const std::vector<int> &js, int m,
                           double detuning_ghz, double theta_p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const double d = detail::ghz_to_hartree(detuning_ghz);
  for (int j : js) {
    const double a = alpha_analytic(spec, d, j, detail::checked_m(j, m), theta_p).real_part;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return hi - lo;
}

// Gamma of the first line such that alpha(J_a, M) = alpha(J_b, M) at the
// target detuning. alpha is affine in Gamma, so the solve is a single
// division; a Brent re-solve around the target checks the round trip.
inline PolarizabilitySpec calibrate_gamma(PolarizabilitySpec spec, int j_a, int j_b, int m,
                                          double theta_p, double target_ghz) {
  spec.validate();
  if (spec.background.anisotropy() == 0.0)
    throw CalibrationError("calibrate_gamma: zero background anisotropy leaves the crossing "
                           "undetermined");
  const int m_a = detail::checked_m(j_a, m);
  const int m_b = detail::checked_m(j_b, m);
  auto diff = [&](double gamma) {
    PolarizabilitySpec s = spec;
    s.lines[0].gamma = gamma;
    return differential_alpha(s, j_a, m_a, j_b, m_b, target_ghz, theta_p);
  };
  const double g0 = spec.lines[0].gamma;
  const double f1 = diff(2.0 * g0) - diff(g0);
  const double f0 = diff(g0) - f1;
  if (f1 == 0.0)
    throw CalibrationError("calibrate_gamma: the crossing does not depend on gamma for J=" +
                           std::to_string(j_a) + " vs J=" + std::to_string(j_b));
  const double gamma = -f0 * g0 / f1;
  if (!(gamma > 0.0))
    throw CalibrationError("calibrate_gamma: no positive gamma puts the J=" +
                           std::to_string(j_a) + "/J=" + std::to_string(j_b) + " crossing at " +
                           std::to_string(target_ghz) + " GHz");
  spec.lines[0].gamma = gamma;

  // Round trip inside the largest pole-free window around the target.
  double lo = target_ghz - 0.05 * std::abs(target_ghz) - 1.0;
  double hi = target_ghz + 0.05 * std::abs(target_ghz) + 1.0;
  for (int j : {j_a, j_b})
    for (double p : analytic_poles(spec, j, m, theta_p)) {
      if (p < target_ghz)
        lo = std::max(lo, 0.5 * (p + target_ghz));
      else
        hi = std::min(hi, 0.5 * (p + target_ghz));
    }
  const auto sol = find_magic_detuning(spec, j_a, j_b, m, theta_p, lo, hi);
  if (std::abs(sol.location - target_ghz) > 1e-3)
    throw CalibrationError("calibrate_gamma: round trip landed at " +
                           std::to_string(sol.location) + " GHz instead of " +
                           std::to_string(target_ghz) + " GHz");
  return spec;
}

// ---------------------------------------------------------------------------
// Polarisation-angle searches on the hyperfine model.

struct AngleProblem {
  hyperfine::HyperfineBasis basis;
  hyperfine::HyperfineConstants constants;
  hyperfine::FieldConfiguration fields; // polarisation is overwritten
  hyperfine::TermSet terms = hyperfine::TermSet::all();
  hyperfine::PolarizabilityMode mode = hyperfine::PolarizabilityMode::hellmann_feynman;
};

inline hyperfine::EigenSolution solve_at_angle(const AngleProblem &p, double theta_deg) {
  auto f = p.fields;
  f.polarization = hyperfine::polarization_at(deg_to_rad(theta_deg));
  return hyperfine::solve(p.basis, p.constants, f, p.terms, p.mode);
}

// alpha_a - alpha_b in Hz/(W/cm^2) at polarisation angle theta (degrees).
inline double differential_alpha(const AngleProblem &p, const hyperfine::StateRef &a,
                                 const hyperfine::StateRef &b, double theta_deg) {
  const auto sol = solve_at_angle(p, theta_deg);
  return sol.polarizability[hyperfine::find_state(sol, a)] -
         sol.polarizability[hyperfine::find_state(sol, b)];
}

inline MagicSolution find_magic_angle(const AngleProblem &p, const hyperfine::StateRef &a,
                                      const hyperfine::StateRef &b, double lo_deg,
                                      double hi_deg) {
  auto f = [&](double th) { return differential_alpha(p, a, b, th); };
  const auto r = roots::brent(f, lo_deg, hi_deg, {angle_xtol_deg, 0.0, 200});
  MagicSolution s;
  s.kind = MagicKind::angle;
  s.location = r.x;
  s.state_a = detail::hf_label(a);
  s.state_b = detail::hf_label(b);
  s.residual = f(r.x);
  s.bracket = {lo_deg, hi_deg};
  s.iterations = r.iterations;
  return s;
}

// Polarizabilities of every eigenstate along a theta scan, with columns
// reordered by maximal overlap so that each column is one continuous curve.
// Column k starts as eigenstate k at the first angle.
struct TrackedScan {
  std::vector<double> theta_deg;
  std::vector<std::vector<double>> alpha;  // [angle][curve]
  std::vector<std::vector<double>> energy; // [angle][curve], MHz
  std::vector<hyperfine::StateLabel> labels; // at the first angle
  std::vector<double> min_overlap;         // per step, worst tracked overlap
};

// Links precomputed solutions (one per angle, in scan order) into curves.
inline TrackedScan track_solutions(const std::vector<double> &thetas,
                                   const std::vector<hyperfine::EigenSolution> &sols) {
  if (thetas.size() != sols.size())
    throw InvariantError("track_solutions: one solution per angle expected");
  TrackedScan out;
  std::vector<int> curve_of; // eigenstate index of each curve at the previous angle
  for (std::size_t k = 0; k < sols.size(); ++k) {
    const auto &sol = sols[k];
    const std::size_t n = sol.size();
    std::vector<int> idx(n);
    if (k == 0) {
      for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<int>(i);
      out.labels = sol.labels;
    } else {
      const auto &prev = sols[k - 1];
      const auto perm = hyperfine::track_states(prev, sol);
      double worst = 1.0;
      for (std::size_t c = 0; c < n; ++c) {
        const int was = curve_of[c];
        idx[c] = perm[static_cast<std::size_t>(was)];
        const double ov =
            std::abs((prev.vectors.col(was).adjoint() * sol.vectors.col(idx[c]))(0, 0));
        worst = std::min(worst, ov);
      }
      out.min_overlap.push_back(worst);
    }
    std::vector<double> a(n), e(n);
    for (std::size_t c = 0; c < n; ++c) {
      a[c] = sol.polarizability[static_cast<std::size_t>(idx[c])];
      e[c] = sol.values(idx[c]);
    }
    out.theta_deg.push_back(thetas[k]);
    out.alpha.push_back(std::move(a));
    out.energy.push_back(std::move(e));
    curve_of = std::move(idx);
  }
  return out;
}

inline TrackedScan tracked_angle_scan(const AngleProblem &p, const std::vector<double> &thetas) {
  std::vector<hyperfine::EigenSolution> sols;
  sols.reserve(thetas.size());
  for (double th : thetas)
    sols.push_back(solve_at_angle(p, th));
  return track_solutions(thetas, sols);
}

} // namespace moltrap::magic
