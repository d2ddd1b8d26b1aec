#pragma once

#include "moltrap/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace moltrap {

// CODATA 2018 values, atomic units unless the name says otherwise.
namespace constants {
inline constexpr double hartree_hz = 6.579683920502e15;
inline constexpr double hartree_inverse_cm = 219474.6313632;
inline constexpr double speed_of_light_au = 137.035999084;
inline constexpr double speed_of_light_cm_s = 2.99792458e10;
inline constexpr double bohr_angstrom = 0.529177210903;
inline constexpr double amu_electron_masses = 1822.888486209;
inline constexpr double debye_au = 0.3934302697;
inline constexpr double au_time_s = 2.4188843265857e-17;
inline constexpr double au_efield_v_per_cm = 5.14220674763e9;
// Light shift per unit intensity of one atomic unit of polarizability,
// MHz/(W/cm^2). This is the value used throughout the NaRb literature and is
// the defining factor for polarizability conversions here.
inline constexpr double au_polarizability_mhz_per_w_cm2 = 4.68645e-8;
// Nuclear magneton over h, MHz per gauss.
inline constexpr double nuclear_magneton_mhz_per_gauss = 7.622593229e-4;
// One debye in one kV/cm over h, MHz.
inline constexpr double debye_kv_per_cm_mhz = 503.41165675;
} // namespace constants

enum class Dimension {
  energy,
  polarizability,
  dipole,
  magnetic_field,
  electric_field,
  intensity,
  length,
  angle,
  mass,
};

enum class Unit {
  hartree,
  inverse_cm,
  ghz,
  mhz,
  hz,
  au_polarizability,
  hz_per_w_cm2,
  mhz_per_w_cm2,
  debye,
  au_dipole,
  gauss,
  tesla,
  kv_per_cm,
  v_per_cm,
  au_efield,
  w_per_cm2,
  kw_per_cm2,
  bohr,
  angstrom,
  nm,
  radian,
  degree,
  amu,
  electron_mass,
};

namespace detail {

struct UnitInfo {
  Unit unit;
  Dimension dimension;
  // Size of the unit expressed in the reference unit of its dimension.
  double scale;
  std::string_view name;
};

// Reference units: Hz, atomic polarizability, atomic dipole, gauss, kV/cm,
// W/cm^2, bohr, radian, atomic mass unit.
inline constexpr std::array<UnitInfo, 24> unit_table{{
    {Unit::hartree, Dimension::energy, constants::hartree_hz, "hartree"},
    {Unit::inverse_cm, Dimension::energy, constants::speed_of_light_cm_s, "cm-1"},
    {Unit::ghz, Dimension::energy, 1e9, "GHz"},
    {Unit::mhz, Dimension::energy, 1e6, "MHz"},
    {Unit::hz, Dimension::energy, 1.0, "Hz"},
    {Unit::au_polarizability, Dimension::polarizability, 1.0, "au"},
    {Unit::hz_per_w_cm2, Dimension::polarizability,
     1e-6 / constants::au_polarizability_mhz_per_w_cm2, "Hz/(W/cm2)"},
    {Unit::mhz_per_w_cm2, Dimension::polarizability,
     1.0 / constants::au_polarizability_mhz_per_w_cm2, "MHz/(W/cm2)"},
    {Unit::debye, Dimension::dipole, constants::debye_au, "debye"},
    {Unit::au_dipole, Dimension::dipole, 1.0, "ea0"},
    {Unit::gauss, Dimension::magnetic_field, 1.0, "G"},
    {Unit::tesla, Dimension::magnetic_field, 1e4, "T"},
    {Unit::kv_per_cm, Dimension::electric_field, 1.0, "kV/cm"},
    {Unit::v_per_cm, Dimension::electric_field, 1e-3, "V/cm"},
    {Unit::au_efield, Dimension::electric_field,
     constants::au_efield_v_per_cm * 1e-3, "au-field"},
    {Unit::w_per_cm2, Dimension::intensity, 1.0, "W/cm2"},
    {Unit::kw_per_cm2, Dimension::intensity, 1e3, "kW/cm2"},
    {Unit::bohr, Dimension::length, 1.0, "bohr"},
    {Unit::angstrom, Dimension::length, 1.0 / constants::bohr_angstrom,
     "angstrom"},
    {Unit::nm, Dimension::length, 10.0 / constants::bohr_angstrom, "nm"},
    {Unit::radian, Dimension::angle, 1.0, "rad"},
    {Unit::degree, Dimension::angle, std::numbers::pi / 180.0, "deg"},
    {Unit::amu, Dimension::mass, 1.0, "amu"},
    {Unit::electron_mass, Dimension::mass, 1.0 / constants::amu_electron_masses,
     "me"},
}};

constexpr const UnitInfo &info(Unit u) {
  return unit_table[static_cast<std::size_t>(u)];
}

} // namespace detail

inline Dimension dimension_of(Unit u) { return detail::info(u).dimension; }
inline std::string_view unit_name(Unit u) { return detail::info(u).name; }

// Parses the short names used in data-file headers and config suffixes.
inline Unit parse_unit(std::string_view s) {
  for (const auto &i : detail::unit_table)
    if (i.name == s)
      return i.unit;
  if (s == "a0" || s == "au-length")
    return Unit::bohr;
  if (s == "cm^-1" || s == "1/cm" || s == "cm1")
    return Unit::inverse_cm;
  if (s == "eh" || s == "Eh" || s == "au-energy")
    return Unit::hartree;
  if (s == "D")
    return Unit::debye;
  throw UnitError("unknown unit '" + std::string(s) + "'");
}

struct Quantity {
  double value = 0.0;
  Unit unit = Unit::hartree;
};

inline Quantity convert(Quantity q, Unit target) {
  const auto &from = detail::info(q.unit);
  const auto &to = detail::info(target);
  if (from.dimension != to.dimension)
    throw UnitError("cannot convert " + std::string(from.name) + " to " +
                    std::string(to.name));
  if (q.unit == target)
    return q;
  return {q.value * (from.scale / to.scale), target};
}

inline double convert(double value, Unit from, Unit to) {
  return convert(Quantity{value, from}, to).value;
}

// Vacuum wavelength of a photon with the given energy. Not a multiplicative
// conversion, so it lives beside convert().
inline Quantity photon_wavelength(Quantity energy, Unit length_unit = Unit::nm) {
  const double per_cm = convert(energy, Unit::inverse_cm).value;
  if (!(per_cm > 0.0))
    throw InvalidArgument("photon energy must be positive");
  const double bohr = (1e8 / per_cm) / constants::bohr_angstrom;
  return convert(Quantity{bohr, Unit::bohr}, length_unit);
}

inline Quantity photon_energy(Quantity wavelength, Unit energy_unit) {
  const double angstrom = convert(wavelength, Unit::angstrom).value;
  if (!(angstrom > 0.0))
    throw InvalidArgument("wavelength must be positive");
  return convert(Quantity{1e8 / angstrom, Unit::inverse_cm}, energy_unit);
}

// Shorthands for the internal atomic-unit working system.
inline double to_hartree(double v, Unit u) { return convert(v, u, Unit::hartree); }
inline double from_hartree(double v, Unit u) { return convert(v, Unit::hartree, u); }
inline double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

} // namespace moltrap
