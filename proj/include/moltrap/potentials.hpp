#pragma once

#include "moltrap/errors.hpp"
#include "moltrap/units.hpp"

#include <Eigen/Dense>
#include <cmath>
// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace moltrap {

// Sorted samples of a scalar function of R, both columns already in atomic
// units.
struct PointwiseTable {
  std::vector<double> r;
  std::vector<double> value;
};

inline constexpr std::size_t min_pointwise_samples = 8;

namespace detail {

inline void validate_table(const PointwiseTable &t) {
  if (t.r.size() != t.value.size())
    throw FormatError("pointwise table has mismatched column lengths");
  if (t.r.size() < min_pointwise_samples)
    throw FormatError("pointwise table needs at least " +
                      std::to_string(min_pointwise_samples) + " points, got " +
                      std::to_string(t.r.size()));
  for (std::size_t i = 0; i < t.r.size(); ++i) {
    if (!std::isfinite(t.r[i]) || !std::isfinite(t.value[i]))
      throw FormatError("pointwise table has a non-finite entry at row " +
                        std::to_string(i + 1));
    if (i > 0 && !(t.r[i] > t.r[i - 1]))
      throw FormatError("pointwise table is not strictly increasing in R at row " +
                        std::to_string(i + 1));
  }
}

} // namespace detail

// Scalar function of R: a constant or a monotone cubic (PCHIP) interpolant
// through tabulated samples. Outside the table it is held at the end values.
class RadialFunction {
public:
  RadialFunction() = default;

  static RadialFunction constant(double v) {
    RadialFunction f;
    f.constant_ = v;
    return f;
  }

  static RadialFunction pointwise(PointwiseTable table) {
    detail::validate_table(table);
    RadialFunction f;
    f.table_ = std::make_shared<const PointwiseTable>(table);
    auto r = table.r;
    auto v = table.value;
    f.interp_ = std::make_shared<const boost::math::interpolators::pchip<std::vector<double>>>(
        std::move(r), std::move(v));
    return f;
  }

  bool is_constant() const { return table_ == nullptr; }
  const PointwiseTable *table() const { return table_.get(); }

  double operator()(double r) const {
    if (!table_)
      return constant_;
    if (r <= table_->r.front())
      return table_->value.front();
    if (r >= table_->r.back())
      return table_->value.back();
    return (*interp_)(r);
  }

private:
  double constant_ = 0.0;
  std::shared_ptr<const PointwiseTable> table_;
  std::shared_ptr<const boost::math::interpolators::pchip<std::vector<double>>> interp_;
};

struct MorseParameters {
  double depth = 0.0;       // D_e, hartree
  double r_e = 0.0;         // bohr
  double range = 0.0;       // a, 1/bohr
  double asymptote = 0.0;   // hartree
};

// One electronic potential, hartree versus bohr.
class PotentialCurve {
public:
  enum class Kind { morse, pointwise, analytic };

  PotentialCurve() = default;

  static PotentialCurve morse(MorseParameters p, std::string label) {
    if (!(p.depth > 0.0) || !(p.range > 0.0) || !(p.r_e > 0.0))
      throw InvalidArgument("Morse curve '" + label + "' needs D_e, a, R_e > 0");
    PotentialCurve c;
    c.kind_ = Kind::morse;
    c.morse_ = p;
    c.label_ = std::move(label);
    return c;
  }

  // Inside the table: PCHIP. Below R_min: an exponential wall through the
  // first two samples, decaying toward the lowest sample. Above R_max: the
  // last sample, taken as the asymptote.
  static PotentialCurve pointwise(PointwiseTable table, std::string label) {
    PotentialCurve c;
    c.kind_ = Kind::pointwise;
    c.values_ = RadialFunction::pointwise(table);
    c.label_ = std::move(label);
    const auto &t = *c.values_.table();
    const double floor = *std::min_element(t.value.begin(), t.value.end());
    const double r1 = t.r[0], r2 = t.r[1];
    const double v1 = t.value[0] - floor, v2 = t.value[1] - floor;
    if (v1 > v2 && v2 > 0.0) {
      c.wall_ = Wall{true, floor, v1, std::log(v1 / v2) / (r2 - r1), r1, 0.0};
    } else {
      c.wall_ = Wall{false, 0.0, t.value[0], 0.0, r1, (t.value[1] - t.value[0]) / (r2 - r1)};
    }
    return c;
  }

  // Any callable V(R); the caller states where it levels off.
  static PotentialCurve analytic(std::function<double(double)> v, double asymptote,
                                 std::string label) {
    if (!v)
      throw InvalidArgument("analytic curve '" + label + "' has no function");
    PotentialCurve c;
    c.kind_ = Kind::analytic;
    c.function_ = std::move(v);
    c.analytic_asymptote_ = asymptote;
    c.label_ = std::move(label);
    return c;
  }

  Kind kind() const { return kind_; }
  const std::string &label() const { return label_; }
  const std::optional<MorseParameters> &morse_parameters() const { return morse_; }
  const PointwiseTable *table() const { return values_.table(); }

  double asymptote() const {
    if (kind_ == Kind::morse)
      return morse_->asymptote;
    if (kind_ == Kind::analytic)
      return analytic_asymptote_;
    return values_.table()->value.back();
  }

  double operator()(double r) const {
    if (kind_ == Kind::morse) {
      const auto &p = *morse_;
      const double x = 1.0 - std::exp(-p.range * (r - p.r_e));
      return p.asymptote - p.depth + p.depth * x * x;
    }
    if (kind_ == Kind::analytic)
      return function_(r);
    const auto &t = *values_.table();
    if (r < t.r.front()) {
      if (wall_.exponential)
        return wall_.floor + wall_.amplitude * std::exp(-wall_.beta * (r - wall_.r0));
      return wall_.amplitude + wall_.slope * (r - wall_.r0);
    }
    return values_(r);
  }

  // Returns a copy with every value moved by a constant.
  PotentialCurve shifted(double delta) const {
    PotentialCurve c = *this;
    if (kind_ == Kind::morse) {
      c.morse_->asymptote += delta;
      return c;
    }
    if (kind_ == Kind::analytic) {
      c.function_ = [f = function_, delta](double r) { return f(r) + delta; };
      c.analytic_asymptote_ += delta;
      return c;
    }
    PointwiseTable t = *values_.table();
    for (auto &v : t.value)
      v += delta;
    return pointwise(std::move(t), label_);
  }

private:
  struct Wall {
    bool exponential = false;
    double floor = 0.0;
    double amplitude = 0.0;
    double beta = 0.0;
    double r0 = 0.0;
    double slope = 0.0;
  };

  Kind kind_ = Kind::morse;
  std::optional<MorseParameters> morse_;
  RadialFunction values_;
  std::function<double(double)> function_;
  double analytic_asymptote_ = 0.0;
  Wall wall_;
  std::string label_;
};

// Electronic transition dipole d(R) in atomic units between the named pair.
struct DipoleFunction {
  RadialFunction d;
  std::string pair;

  double operator()(double r) const { return d(r); }
};

// ---------------------------------------------------------------------------
// Pointwise file ingestion.

enum class TableKind { potential, dipole, energy_function };

struct TableUnits {
  Unit r = Unit::bohr;
  Unit value = Unit::hartree;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok)
    out.push_back(tok);
  return out;
}

inline double parse_number(const std::string &tok, const std::string &where) {
  double v = 0.0;
  const char *first = tok.data();
  const char *last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw FormatError(where + ": non-numeric token '" + tok + "'");
  return v;
}

inline Dimension value_dimension(TableKind kind) {
  return kind == TableKind::dipole ? Dimension::dipole : Dimension::energy;
}

} // namespace detail

// Reads a two-column text table. '#' starts a comment; a header comment
// "# units: <R-unit> <value-unit>" declares units unless `units` overrides
// them. Values are converted to bohr and hartree (or e*a0 for dipoles).
inline PointwiseTable read_pointwise(const std::filesystem::path &path,
                                     TableKind kind,
                                     std::optional<TableUnits> units = std::nullopt) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open pointwise file " + path.string());

  std::optional<TableUnits> declared;
  std::vector<double> r, v;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      auto comment = detail::split_ws(line.substr(hash + 1));
      if (comment.size() == 3 && comment[0] == "units:")
        declared = TableUnits{parse_unit(comment[1]), parse_unit(comment[2])};
      line.erase(hash);
    }
    const auto tok = detail::split_ws(line);
    if (tok.empty())
      continue;
    if (tok.size() != 2)
      throw FormatError(where + ": expected two columns, found " +
                        std::to_string(tok.size()));
    const double rv = detail::parse_number(tok[0], where);
    const double vv = detail::parse_number(tok[1], where);
    if (!r.empty()) {
      if (rv == r.back())
        throw FormatError(where + ": duplicated R = " + tok[0] +
                          " (first seen at line " + std::to_string(line_of.back()) + ")");
      if (rv < r.back())
        throw FormatError(where + ": R = " + tok[0] + " is not increasing");
    }
    r.push_back(rv);
    v.push_back(vv);
    line_of.push_back(lineno);
  }

  if (r.size() < min_pointwise_samples)
    throw FormatError(path.string() + ": need at least " +
                      std::to_string(min_pointwise_samples) + " data rows, found " +
                      std::to_string(r.size()));

  TableUnits u = units.value_or(declared.value_or(
      TableUnits{Unit::bohr, kind == TableKind::dipole ? Unit::au_dipole : Unit::hartree}));
  if (dimension_of(u.r) != Dimension::length)
    throw UnitError(path.string() + ": R column unit must be a length");
  if (dimension_of(u.value) != detail::value_dimension(kind))
    throw UnitError(path.string() + ": value column has the wrong dimension");
  const Unit target = kind == TableKind::dipole ? Unit::au_dipole : Unit::hartree;

  PointwiseTable t;
  t.r.reserve(r.size());
  t.value.reserve(v.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    t.r.push_back(convert(r[i], u.r, Unit::bohr));
    t.value.push_back(convert(v[i], u.value, target));
  }
  return t;
}

inline PotentialCurve load_potential(const std::filesystem::path &path,
                                     std::string label,
                                     std::optional<TableUnits> units = std::nullopt) {
  return PotentialCurve::pointwise(read_pointwise(path, TableKind::potential, units),
                                   std::move(label));
}

inline DipoleFunction load_dipole(const std::filesystem::path &path,
                                  std::string pair,
                                  std::optional<TableUnits> units = std::nullopt) {
  return {RadialFunction::pointwise(read_pointwise(path, TableKind::dipole, units)),
          std::move(pair)};
}

// ---------------------------------------------------------------------------
// Morse surrogates.

// Levels supported by a Morse well of the given depth and harmonic
// frequency (both in the same energy unit).
inline int morse_level_count(double depth, double omega_e) {
  return static_cast<int>(std::floor(2.0 * depth / omega_e - 0.5)) + 1;
}

// Default well depth when none is given: fifty harmonic quanta, i.e. an
// anharmonicity omega_e x_e = omega_e / 200, which supports about 100 levels.
inline constexpr double default_depth_in_quanta = 50.0;

inline PotentialCurve calibrate_morse(double b_e_cm, double omega_e_cm,
                                      double reduced_mass_amu, double asymptote,
                                      std::optional<double> depth_cm = std::nullopt,
                                      std::string label = "X") {
  if (!(b_e_cm > 0.0) || !(omega_e_cm > 0.0) || !(reduced_mass_amu > 0.0))
    throw InvalidArgument("calibrate_morse: targets and mass must be positive");
  const double depth_in_cm = depth_cm.value_or(default_depth_in_quanta * omega_e_cm);
  if (!std::isfinite(depth_in_cm) || !(depth_in_cm > 0.0))
    throw CalibrationError("calibrate_morse: unphysical well depth");
  if (morse_level_count(depth_in_cm, omega_e_cm) < 20)
    throw CalibrationError("calibrate_morse: depth " + std::to_string(depth_in_cm) +
                           " cm-1 supports fewer than 20 levels for omega_e " +
                           std::to_string(omega_e_cm) + " cm-1");
  const double mu = reduced_mass_amu * constants::amu_electron_masses;
  const double b_e = b_e_cm / constants::hartree_inverse_cm;
  const double omega = omega_e_cm / constants::hartree_inverse_cm;
  const double depth = depth_in_cm / constants::hartree_inverse_cm;
  MorseParameters p;
  p.r_e = std::sqrt(1.0 / (2.0 * mu * b_e));
  p.depth = depth;
  p.range = omega * std::sqrt(mu / (2.0 * depth));
  p.asymptote = asymptote;
  return PotentialCurve::morse(p, std::move(label));
}

// Closed-form Morse level energy above the well bottom, hartree.
inline double morse_level_energy(const MorseParameters &p, double reduced_mass_au, int v) {
  const double omega = p.range * std::sqrt(2.0 * p.depth / reduced_mass_au);
  const double x = omega * (v + 0.5);
  return x - x * x / (4.0 * p.depth);
}

// ---------------------------------------------------------------------------
// Spin-orbit coupled A/b pair.

struct CoupledModel {
  PotentialCurve a;  // channel 0
  PotentialCurve b;  // channel 1
  RadialFunction xi = RadialFunction::constant(0.0);
  double shift = 0.0;

  static constexpr std::size_t channel_a = 0;
  static constexpr std::size_t channel_b = 1;

  double channel_potential(std::size_t ch, double r) const {
    return (ch == channel_a ? a(r) : b(r)) + shift;
  }
  double asymptote() const { return std::min(a.asymptote(), b.asymptote()) + shift; }
};

inline Eigen::Matrix2d coupled_matrix(const CoupledModel &model, double r) {
  if (!std::isfinite(r) || !(r > 0.0))
    throw RangeError("coupled_matrix: R = " + std::to_string(r) + " is out of range");
  Eigen::Matrix2d m;
  const double x = model.xi(r);
  m << model.a(r) + model.shift, x, x, model.b(r) + model.shift;
  return m;
}

// Radius in [lo, hi] where the two diabatic curves intersect (bisection).
inline double diabatic_crossing(const CoupledModel &model, double lo, double hi) {
  auto f = [&](double r) { return model.a(r) - model.b(r); };
  double flo = f(lo);
  if (flo * f(hi) > 0.0)
    throw NoRootError("diabatic curves do not cross in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Morse curve with the given shape whose floor is placed so that it meets
// `other` at `r_cross`.
inline PotentialCurve morse_through_crossing(const PotentialCurve &other, double r_cross,
                                             double r_e, double omega_e_cm,
                                             double depth_cm, double reduced_mass_amu,
                                             std::string label) {
  const double mu = reduced_mass_amu * constants::amu_electron_masses;
  MorseParameters p;
  p.r_e = r_e;
  p.depth = depth_cm / constants::hartree_inverse_cm;
  p.range = (omega_e_cm / constants::hartree_inverse_cm) * std::sqrt(mu / (2.0 * p.depth));
  p.asymptote = 0.0;
  const auto probe = PotentialCurve::morse(p, label);
  p.asymptote = other(r_cross) - probe(r_cross);
  return PotentialCurve::morse(p, std::move(label));
}

} // namespace moltrap
