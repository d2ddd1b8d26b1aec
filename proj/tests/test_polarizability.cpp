#include "moltrap/polarizability.hpp"
#include "moltrap/roots.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace moltrap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double ghz(double v) { return convert(v, Unit::ghz, Unit::hartree); }
double cm(double v) { return convert(v, Unit::inverse_cm, Unit::hartree); }

const Background narb_bg{1235.562, 407.110};
const double weight = 0.0126; // squared vibrational transition dipole, a.u.

PolarizabilitySpec one_line(double b_v_cm = 0.06970, double b_vp_cm = 0.06988) {
  PolarizabilitySpec s;
  s.b_v = cm(b_v_cm);
  s.background = narb_bg;
  ResonantLine l;
  l.vprime = 0;
  l.hbar_omega = cm(11306.4);
  l.b_vprime = cm(b_vp_cm);
  l.gamma = detail::gamma_for_weight(weight, l.hbar_omega);
  s.lines.push_back(l);
  return s;
}

// Rigid-rotor transitions J -> J' = J -+ 1 carrying the line weight of `s`.
std::vector<ResonantTransition> rigid_rotor(const PolarizabilitySpec &s, int j) {
  std::vector<ResonantTransition> out;
  for (const auto &l : s.lines) {
    const double origin = l.hbar_omega - 2 * l.b_vprime; // J=0 -> J'=0 band origin
    for (int jp : {j - 1, j + 1}) {
      if (jp < 0)
        continue;
      const double e = origin + l.b_vprime * jp * (jp + 1) - s.b_v * j * (j + 1);
      out.push_back({jp, l.vprime, e, std::sqrt(detail::line_weight(l)), 0.0});
    }
  }
  return out;
}

} // namespace

TEST_CASE("line weight and linewidth are inverse maps") {
  const double w = 0.37, e = cm(11000.0);
  ResonantLine l{0, e, detail::gamma_for_weight(w, e), cm(0.07)};
  CHECK_THAT(detail::line_weight(l), WithinRel(w, 1e-14));
}

TEST_CASE("sum over states agrees with the closed form for a single rigid-rotor line") {
  auto spec = one_line();
  // the closed form has no counter-rotating term; carry it as a parallel
  // constant at the reference frequency, leaving only its slow drift
  const double ref = spec.reference();
  const double w = detail::line_weight(spec.lines[0]);
  PolarizabilitySpec closed = spec;
  closed.background.parallel += w / (2 * ref);

  for (int j = 0; j <= 3; ++j) {
    const auto ts = rigid_rotor(spec, j);
    double worst = 0.0, worst_drift = 0.0;
    for (double d = -300.0; d <= 300.0; d += 7.3) {
      if (std::abs(d) < 40.0)
        continue; // keep |detuning| >> rotational offsets
      for (int m = 0; m <= j; ++m) {
        const double a = alpha_analytic(closed, ghz(d), j, m, 0.3).real_part;
        const double s = alpha_sum_over_states(ts, spec.background, j, m, 0.3, ref, ghz(d)).real_part;
        double drift = 0.0;
        for (const auto &t : ts)
          drift += line_strength(t.jp, j, m, 0.3) * w * (1.0 / (t.energy + ref + ghz(d)) - 1.0 / (2 * ref));
        worst = std::max(worst, std::abs(s - a - drift) / spec.background.perpendicular);
        worst_drift = std::max(worst_drift, std::abs(drift) / spec.background.perpendicular);
      }
    }
    INFO("J = " << j);
    CHECK(worst < 1e-11);
    CHECK(worst_drift < 1e-6);
  }
}

TEST_CASE("zero dipoles give the pure background") {
  auto ts = rigid_rotor(one_line(), 2);
  for (auto &t : ts)
    t.dipole = 0.0;
  for (double theta : {0.0, 0.9}) {
    const auto f = angular_factors(2, 1, theta);
    const double bg = (f.a + f.b) * narb_bg.anisotropy() + narb_bg.perpendicular;
    CHECK_THAT(alpha_sum_over_states(ts, narb_bg, 2, 1, theta, cm(11306.4), ghz(20.0)).real_part,
               WithinRel(bg, 1e-15));
  }
}

TEST_CASE("one pole for J=0 and two for J=1 in [-50, 150] GHz") {
  const auto spec = one_line();
  const auto count_poles = [&](int j) {
    const auto changes = roots::scan_sign_changes(
        [&](double d) { return alpha_analytic(spec, ghz(d), j, 0, 0.0).real_part; }, -50.0, 150.0, 4001);
    std::vector<double> poles;
    for (const auto &c : changes)
      if (c.pole)
        poles.push_back(0.5 * (c.lo + c.hi));
    return poles;
  };
  const auto p0 = count_poles(0);
  REQUIRE(p0.size() == 1);
  CHECK(std::abs(p0[0]) < 0.05);
  const auto p1 = count_poles(1);
  REQUIRE(p1.size() == 2);
  CHECK_THAT(p1[0], WithinAbs(-8.3690, 0.05));
  CHECK_THAT(p1[1], WithinAbs(4.2007, 0.05));
}

TEST_CASE("poles sit exactly at -L and -R with a sign change across each") {
  const auto spec = one_line();
  for (int j = 1; j <= 4; ++j) {
    const auto off = resonance_offsets(j, spec.b_v, spec.lines[0].b_vprime);
    for (double pole : {-off.l, -off.r}) {
      const double eps = ghz(1e-4);
      const double below = alpha_analytic(spec, pole - eps, j, 0, 0.0).real_part;
      const double above = alpha_analytic(spec, pole + eps, j, 0, 0.0).real_part;
      CHECK((below > 0) != (above > 0));
      CHECK(std::abs(below) > 1e5);
      CHECK_THROWS_AS(alpha_analytic(spec, pole, j, 0, 0.0), PoleError);
    }
  }
  const auto ts = rigid_rotor(spec, 1);
  const double ref = spec.reference();
  CHECK_THROWS_AS(alpha_sum_over_states(ts, spec.background, 1, 0, 0.0, ref, ts[0].energy - ref),
                  PoleError);
}

TEST_CASE("far from resonance only the background remains") {
  const auto spec = one_line();
  const double big = ghz(1e9);
  for (int j = 0; j <= 4; ++j)
    for (int m = -j; m <= j; ++m) {
      const auto f = angular_factors(j, m, 0.4);
      const double limit = (f.a + f.b) * narb_bg.anisotropy() + narb_bg.perpendicular;
      CHECK_THAT(alpha_analytic(spec, big, j, m, 0.4).real_part, WithinRel(limit, 1e-6));
      const double magic_angle = std::acos(1.0 / std::sqrt(3.0));
      CHECK_THAT(alpha_analytic(spec, big, j, m, magic_angle).real_part,
                 WithinRel((narb_bg.parallel + 2 * narb_bg.perpendicular) / 3, 1e-6));
    }
}

TEST_CASE("at the far-detuned magic detuning every state sees alpha_perp") {
  const auto spec = one_line();
  const double star = weight / narb_bg.anisotropy();
  CHECK(convert(star, Unit::hartree, Unit::ghz) > 50.0);
  for (int j = 0; j <= 4; ++j)
    for (int m = 0; m <= j; ++m)
      for (double theta : {0.0, 0.5, 1.3}) {
        CHECK_THAT(alpha_fardetuned(spec, star, j, m, theta).real_part,
                   WithinRel(narb_bg.perpendicular, 1e-12));
        // rotational offsets perturb the closed form at the percent level only
        CHECK(std::abs(alpha_analytic(spec, star, j, m, theta).real_part - narb_bg.perpendicular) <
              0.02 * narb_bg.anisotropy());
      }
}

TEST_CASE("J=0 does not depend on the polarisation angle") {
  const auto spec = one_line();
  for (double d : {-40.0, 10.0, 103.0}) {
    const double ref = alpha_analytic(spec, ghz(d), 0, 0, 0.0).real_part;
    for (int k = 1; k <= 30; ++k)
      CHECK(std::abs(alpha_analytic(spec, ghz(d), 0, 0, k * 0.1).real_part - ref) <= 1e-12 * std::abs(ref));
  }
}

TEST_CASE("far-detuned expansion") {
  const auto spec = one_line();
  // J=0: the expansion is exact
  for (double d : {-30.0, 50.0, 120.0})
    CHECK_THAT(alpha_fardetuned(spec, ghz(d), 0, 0, 0.2).real_part,
               WithinRel(alpha_analytic(spec, ghz(d), 0, 0, 0.2).real_part, 1e-14));

  // J>0: the remainder is w [A L / (D (D + L)) + B R / (D (D + R))], which
  // falls off as 1/D^2 and is first order in the rotational constants
  const double w = detail::line_weight(spec.lines[0]);
  for (int j = 1; j <= 3; ++j)
    for (double d : {-200.0, 100.0, 300.0, 1000.0}) {
      const double a = alpha_analytic(spec, ghz(d), j, 0, 0.0).real_part;
      const double f = alpha_fardetuned(spec, ghz(d), j, 0, 0.0).real_part;
      const auto af = angular_factors(j, 0, 0.0);
      const auto off = resonance_offsets(j, spec.b_v, spec.lines[0].b_vprime);
      const double x = ghz(d);
      const double remainder = w * (af.a * off.l / (x * (x + off.l)) + af.b * off.r / (x * (x + off.r)));
      CHECK_THAT(a - f, WithinRel(remainder, 1e-8));
      CHECK(std::abs(a - f) <= w * (af.a * std::abs(off.l) + af.b * std::abs(off.r)) / (x * x) * 1.25);
    }
}

TEST_CASE("spec validation") {
  auto s = one_line();
  s.lines[0].gamma = 0.0;
  CHECK_THROWS_AS(alpha_analytic(s, ghz(10.0), 0, 0, 0.0), ConfigError);
  s = one_line();
  s.lines.push_back(s.lines[0]);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = one_line();
  CHECK_THROWS_AS(alpha_analytic(s, ghz(10.0), 1, 2, 0.0), InvalidArgument);
}

TEST_CASE("validity window is an annotation, not an error") {
  const auto spec = one_line();
  CHECK_FALSE(alpha_analytic(spec, ghz(100.0), 0, 0, 0.0).outside_validity);
  const double tiny = 3.0 * spec.lines[0].gamma;
  CHECK(alpha_analytic(spec, tiny, 0, 0, 0.0).outside_validity);
}

namespace {

// Three vibrational bands with distinct widths; upper J' up to 5.
std::vector<ResonantTransition> decaying(int j) {
  std::vector<ResonantTransition> out;
  const double bv = cm(0.0697), bp = cm(0.0699);
  for (int v = 0; v < 3; ++v) {
    const double origin = cm(11300.0 + 90.0 * v);
    for (int jp : {j - 1, j + 1}) {
      if (jp < 0)
        continue;
      const double e = origin + bp * jp * (jp + 1) - bv * j * (j + 1);
      out.push_back({jp, v, e, 0.1 / (v + 1), 1e-9 * (1 + v)});
    }
  }
  return out;
}

} // namespace

TEST_CASE("imaginary part: sign, static limit and zero width") {
  const auto t0 = decaying(0);
  double static_sum = 0.0;
  for (const auto &t : t0)
    static_sum += t.gamma * (1.0 / 3.0) * t.dipole * t.dipole / (t.energy * t.energy);
  CHECK_THAT(alpha_imag(t0, 0, 0, 0.0, 0.0).imag_part, WithinRel(-static_sum, 1e-14));

  for (double photon = cm(5000.0); photon < cm(11290.0); photon += cm(211.0))
    for (int j = 0; j <= 3; ++j)
      for (int m = 0; m <= j; ++m)
        CHECK(alpha_imag(decaying(j), j, m, 0.7, photon).imag_part < 0.0);

  auto none = decaying(1);
  for (auto &t : none)
    t.gamma = 0.0;
  CHECK(alpha_imag(none, 1, 0, 0.0, cm(11000.0)).imag_part == 0.0);

  CHECK_THROWS_AS(alpha_imag(t0, 0, 0, 0.0, t0[0].energy), PoleError);
}

TEST_CASE("imaginary part: J=1 / J=0 ratio is flat far from the lines") {
  const auto t0 = decaying(0);
  const auto t1 = decaying(1);
  double lo = 1e300, hi = -1e300;
  for (double p = 10500.0; p <= 10900.0; p += 5.0) {
    const double r = alpha_imag(t1, 1, 0, 0.0, cm(p)).imag_part / alpha_imag(t0, 0, 0, 0.0, cm(p)).imag_part;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK((hi - lo) / lo < 0.01);
}

TEST_CASE("transitions from solved levels carry the right quantum numbers") {
  const double mu = 18.180537778 * constants::amu_electron_masses;
  const auto x = calibrate_morse(0.06970, 106.9, 18.180537778, 0.0);
  const RadialGrid grid{5.0, 11.0, 200};
  LevelsByJ xs, ups;
  for (int j : {0, 1, 2})
    xs[j] = solve_single(x, grid, mu, j, SolveOptions{2});
  const double h = constants::hartree_inverse_cm;
  CoupledModel m{x.shifted(11000 / h), x.shifted(11050 / h), RadialFunction::constant(10 / h), 0.0};
  for (int jp : {0, 1, 2, 3})
    ups[jp] = solve_coupled(m, grid, mu, jp, SolveOptions{3});
  const DipoleFunction d{RadialFunction::constant(1.0), "X-A"};
  const auto ts = resonant_transitions(xs[1][0], ups, d, 2);
  REQUIRE(ts.size() == 4);
  for (const auto &t : ts) {
    CHECK((t.jp == 0 || t.jp == 2));
    CHECK(t.energy > 0.0);
    CHECK(std::abs(t.dipole) <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(resonant_transitions(xs[2][0], LevelsByJ{{1, ups[1]}}, d, 2), ConfigError);

  const int vps[] = {0, 1};
  const auto spec = spec_from_levels(xs, ups, d, narb_bg, vps);
  REQUIRE(spec.lines.size() == 2);
  CHECK(spec.lines[0].hbar_omega < spec.lines[1].hbar_omega);
  CHECK(spec.background.parallel > narb_bg.parallel);
  CHECK_THAT(spec.b_v * h, WithinRel(0.0697, 0.02));
}
