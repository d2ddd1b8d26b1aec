#include "moltrap/potentials.hpp"
#include "moltrap/radial.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace moltrap;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double narb_mu_amu = 18.180537778;

std::filesystem::path scratch(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / "moltrap-test-potentials";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path &p, const std::string &text) {
  std::ofstream(p, std::ios::binary) << text;
}

// A well-like table: a shifted quadratic sampled at 0.5 bohr.
std::string well_rows(double scale_r, double scale_v) {
  std::string out;
  for (int i = 0; i < 16; ++i) {
    const double r = 5.0 + 0.5 * i;
    const double v = -0.02 + 0.001 * (r - 7.0) * (r - 7.0);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", r * scale_r, v * scale_v);
    out += buf;
  }
  return out;
}

} // namespace

TEST_CASE("pointwise curves reproduce their nodes") {
  const auto path = scratch("well.txt");
  write_file(path, "# units: bohr hartree\n" + well_rows(1.0, 1.0));
  const auto curve = load_potential(path, "X");
  const auto *t = curve.table();
  REQUIRE(t != nullptr);
  REQUIRE(t->r.size() == 16);
  for (std::size_t i = 0; i < t->r.size(); ++i)
    CHECK(curve(t->r[i]) == t->value[i]);
  CHECK(curve.asymptote() == t->value.back());
  // beyond the table: held at the last value
  CHECK(curve(50.0) == t->value.back());
  // below it: a wall that keeps rising
  CHECK(curve(4.0) > curve(4.5));
  CHECK(curve(4.5) > curve(5.0));
}

TEST_CASE("pointwise reader validates its input") {
  const auto dup = scratch("dup.txt");
  write_file(dup, "6.0 -0.01\n6.5 -0.02\n7.0 -0.03\n7.0 -0.03\n8 0\n9 0\n10 0\n11 0\n");
  CHECK_THROWS_WITH(load_potential(dup, "X"), ContainsSubstring("dup.txt:4") && ContainsSubstring("duplicated"));

  const auto unsorted = scratch("unsorted.txt");
  write_file(unsorted, "6.0 -0.01\n5.0 -0.02\n7 0\n8 0\n9 0\n10 0\n11 0\n12 0\n");
  CHECK_THROWS_WITH(load_potential(unsorted, "X"), ContainsSubstring("unsorted.txt:2"));

  const auto junk = scratch("junk.txt");
  write_file(junk, "6.0 -0.01\n6.5 abc\n");
  CHECK_THROWS_AS(load_potential(junk, "X"), FormatError);

  const auto few = scratch("few.txt");
  write_file(few, "6.0 -0.01\n6.5 -0.02\n");
  CHECK_THROWS_AS(load_potential(few, "X"), FormatError);

  CHECK_THROWS_AS(load_potential(scratch("missing.txt"), "X"), IoError);
}

TEST_CASE("declared units give the same curve as pre-converted data") {
  const auto atomic = scratch("atomic.txt");
  const auto spectro = scratch("spectro.txt");
  write_file(atomic, well_rows(1.0, 1.0));
  write_file(spectro, "# units: angstrom cm-1\n" +
                          well_rows(constants::bohr_angstrom, constants::hartree_inverse_cm));
  const auto a = load_potential(atomic, "X");
  const auto s = load_potential(spectro, "X");
  for (double r = 4.0; r <= 14.0; r += 0.037)
    CHECK_THAT(s(r), WithinAbs(a(r), 1e-12));

  // an explicit override wins over the header
  const auto forced = load_potential(spectro, "X", TableUnits{Unit::angstrom, Unit::inverse_cm});
  CHECK_THAT(forced(7.3), WithinAbs(a(7.3), 1e-12));
  CHECK_THROWS_AS(load_potential(spectro, "X", TableUnits{Unit::ghz, Unit::inverse_cm}), UnitError);
}

TEST_CASE("dipole tables read in debye") {
  const auto path = scratch("dipole.txt");
  std::string rows = "# units: bohr D\n";
  for (int i = 0; i < 10; ++i)
    rows += std::to_string(5.0 + i) + " 2.0\n";
  write_file(path, rows);
  const auto d = load_dipole(path, "X-A");
  CHECK_THAT(d(7.25), WithinRel(2.0 * constants::debye_au, 1e-14));
}

TEST_CASE("Morse calibration places the minimum at the rigid-rotor R_e") {
  const double mu = narb_mu_amu * constants::amu_electron_masses;
  const double r_e = 6.885;
  const double b_e_cm = constants::hartree_inverse_cm / (2.0 * mu * r_e * r_e);
  const auto curve = calibrate_morse(b_e_cm, 106.9, narb_mu_amu, 0.0);
  const double h = 1e-6;
  CHECK(curve(r_e - h) > curve(r_e));
  CHECK(curve(r_e + h) > curve(r_e));
  CHECK_THAT(curve.morse_parameters()->r_e, WithinAbs(r_e, 1e-9));
  // curvature gives omega_e back
  const double k = (curve(r_e + 1e-3) - 2 * curve(r_e) + curve(r_e - 1e-3)) / 1e-6;
  CHECK_THAT(std::sqrt(k / mu) * constants::hartree_inverse_cm, WithinRel(106.9, 1e-6));

  const auto heavy = calibrate_morse(b_e_cm, 106.9, 2 * narb_mu_amu, 0.0);
  CHECK_THAT(heavy.morse_parameters()->r_e, WithinRel(r_e / std::sqrt(2.0), 1e-12));
}

TEST_CASE("Morse calibration rejects unphysical targets") {
  CHECK_THROWS_AS(calibrate_morse(-0.07, 106.9, narb_mu_amu, 0.0), InvalidArgument);
  CHECK_THROWS_AS(calibrate_morse(0.07, 106.9, narb_mu_amu, 0.0, -10.0), CalibrationError);
  CHECK_THROWS_AS(calibrate_morse(0.07, 106.9, narb_mu_amu, 0.0, 200.0), CalibrationError);
}

TEST_CASE("calibrated X curve has B_0 close to B_e") {
  const double mu = narb_mu_amu * constants::amu_electron_masses;
  const auto curve = calibrate_morse(0.06970, 106.9, narb_mu_amu, 0.0);
  const auto levels = solve_single(curve, RadialGrid{5.0, 11.0, 600}, mu, 0, SolveOptions{1});
  REQUIRE(levels.size() == 1);
  const double b0 = radial_matrix_element(levels[0], [mu](double r) { return 1.0 / (2 * mu * r * r); },
                                          levels[0]) *
                    constants::hartree_inverse_cm;
  CHECK_THAT(b0, WithinRel(0.06970, 0.01));
}

TEST_CASE("coupled A/b matrix") {
  MorseParameters pa{0.02, 8.0, 0.4, 0.0};
  MorseParameters pb{0.025, 6.9, 0.5, 0.0};
  CoupledModel zero{PotentialCurve::morse(pa, "A"), PotentialCurve::morse(pb, "b"),
                    RadialFunction::constant(0.0), 0.001};
  for (double r = 5.0; r < 12.0; r += 0.25) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(coupled_matrix(zero, r));
    const double lo = std::min(zero.a(r), zero.b(r)) + 0.001;
    const double hi = std::max(zero.a(r), zero.b(r)) + 0.001;
    CHECK_THAT(es.eigenvalues()(0), WithinAbs(lo, 1e-15));
    CHECK_THAT(es.eigenvalues()(1), WithinAbs(hi, 1e-15));
  }

  const double xi = 40.0 / constants::hartree_inverse_cm;
  CoupledModel coupled = zero;
  coupled.xi = RadialFunction::constant(xi);
  const double rc = diabatic_crossing(coupled, 5.0, 12.0);
  CHECK_THAT(coupled.a(rc), WithinAbs(coupled.b(rc), 1e-12));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(coupled_matrix(coupled, rc));
  CHECK_THAT(es.eigenvalues()(1) - es.eigenvalues()(0), WithinRel(2 * xi, 1e-9));

  CHECK_THROWS_AS(coupled_matrix(coupled, -1.0), RangeError);
  CHECK_THROWS_AS(coupled_matrix(coupled, std::nan("")), RangeError);
}

TEST_CASE("a Morse curve can be laid through a crossing") {
  MorseParameters pb{5000.0 / constants::hartree_inverse_cm, 6.88, 0.5, 0.0};
  const auto b = PotentialCurve::morse(pb, "b");
  const auto a = morse_through_crossing(b, 7.5, 8.0, 70.0, 4000.0, narb_mu_amu, "A");
  CHECK_THAT(a(7.5), WithinAbs(b(7.5), 1e-15));
  CoupledModel m{a, b, RadialFunction::constant(0.0), 0.0};
  CHECK_THAT(diabatic_crossing(m, 7.0, 8.0), WithinAbs(7.5, 1e-10));
}

TEST_CASE("analytic and shifted curves") {
  const auto h = PotentialCurve::analytic([](double r) { return 0.5 * (r - 7) * (r - 7); }, 1.0, "ho");
  CHECK(h(9.0) == 2.0);
  CHECK(h.asymptote() == 1.0);
  const auto up = h.shifted(0.25);
  CHECK(up(9.0) == 2.25);
  CHECK(up.asymptote() == 1.25);
  const auto m = PotentialCurve::morse(MorseParameters{0.02, 7.0, 0.5, 0.0}, "m").shifted(-0.1);
  CHECK_THAT(m(7.0), WithinAbs(-0.12, 1e-15));
}
