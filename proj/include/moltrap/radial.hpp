#pragma once

#include "moltrap/errors.hpp"
#include "moltrap/linalg.hpp"
#include "moltrap/potentials.hpp"
#include "moltrap/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace moltrap {

// Uniform grid of interior points on the hard-wall interval [r_min, r_max].
struct RadialGrid {
  double r_min = 4.0;
  double r_max = 20.0;
  int n = 1200;

  double spacing() const { return (r_max - r_min) / (n + 1); }
  double point(int i) const { return r_min + (i + 1) * spacing(); }

  std::vector<double> points() const {
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      r[static_cast<std::size_t>(i)] = point(i);
    return r;
  }

  void validate() const {
    if (!(r_min > 0.0))
      throw ConfigError("radial grid needs r_min > 0");
    if (!(r_max > r_min))
      throw ConfigError("radial grid needs r_max > r_min");
    if (n < 50)
      throw ConfigError("radial grid needs at least 50 points, got " + std::to_string(n));
  }

  bool operator==(const RadialGrid &) const = default;
};

// Colbert-Miller sinc-DVR kinetic energy on a hard-wall interval, hartree,
// for reduced mass `mu` in electron masses. Its spectrum for V = 0 is the
// exact particle-in-a-box spectrum k^2 pi^2 / (2 mu L^2), k = 1..n.
inline Eigen::MatrixXd dvr_kinetic(const RadialGrid &grid, double mu) {
  grid.validate();
  if (!(mu > 0.0))
    throw InvalidArgument("dvr_kinetic: reduced mass must be positive");
  const int n = grid.n;
  const int intervals = n + 1;
  const double length = grid.r_max - grid.r_min;
  const double pi = std::numbers::pi;
  const double pref = (1.0 / (2.0 * mu)) * pi * pi / (2.0 * length * length);
  const double diag_const = (2.0 * intervals * intervals + 1.0) / 3.0;

  Eigen::MatrixXd t(n, n);
  for (int i = 1; i <= n; ++i) {
    const double si = std::sin(pi * i / intervals);
    t(i - 1, i - 1) = pref * (diag_const - 1.0 / (si * si));
    for (int j = 1; j < i; ++j) {
      const double sm = std::sin(pi * (i - j) / (2.0 * intervals));
      const double sp = std::sin(pi * (i + j) / (2.0 * intervals));
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      const double v = pref * sign * (1.0 / (sm * sm) - 1.0 / (sp * sp));
      t(i - 1, j - 1) = v;
      t(j - 1, i - 1) = v;
    }
  }
  return t;
}

// A bound rovibrational level on a radial grid. Channel amplitudes are
// normalised so that sum_ch sum_i psi^2 dr = 1.
struct RovibLevel {
  std::string label;
  int v = 0;
  int j = 0;
  double energy = 0.0; // hartree
  std::vector<Eigen::VectorXd> channels;
  std::vector<double> channel_fractions;
  RadialGrid grid;
  bool near_threshold = false;

  std::size_t channel_count() const { return channels.size(); }
  double fraction(std::size_t ch) const { return channel_fractions.at(ch); }
};

// Levels closer than this to the asymptote are not reported as bound.
inline constexpr double bound_threshold = 1e-10;

namespace detail {

inline double kinetic_cutoff(const RadialGrid &grid, double mu) {
  const double dr = grid.spacing();
  return std::numbers::pi * std::numbers::pi / (2.0 * mu * dr * dr);
}

inline void check_cutoff(const RadialGrid &grid, double mu, double depth,
                         const std::string &what) {
  const double cutoff = kinetic_cutoff(grid, mu);
  if (!(cutoff > depth))
    throw ConfigError("grid spacing too coarse for " + what + ": kinetic cutoff " +
                      std::to_string(cutoff) + " Eh does not exceed the well depth " +
                      std::to_string(depth) + " Eh");
}

// Unpacks eigenvectors of a block Hamiltonian into levels.
inline std::vector<RovibLevel> unpack_levels(const linalg::SymmetricEigen &eig,
                                             const RadialGrid &grid, std::size_t nchannels,
                                             const std::string &label, int j) {
  const Eigen::Index n = grid.n;
  const double inv_sqrt_dr = 1.0 / std::sqrt(grid.spacing());
  const Eigen::Index outer = std::max<Eigen::Index>(1, n / 20);
  std::vector<RovibLevel> out;
  out.reserve(static_cast<std::size_t>(eig.values.size()));
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    Eigen::VectorXd col = eig.vectors.col(k);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0)
      col = -col;
    RovibLevel lvl;
    lvl.label = label;
    lvl.v = static_cast<int>(k);
    lvl.j = j;
    lvl.energy = eig.values(k);
    lvl.grid = grid;
    double tail = 0.0;
    for (std::size_t ch = 0; ch < nchannels; ++ch) {
      Eigen::VectorXd c = col.segment(static_cast<Eigen::Index>(ch) * n, n);
      lvl.channel_fractions.push_back(c.squaredNorm());
      tail += c.tail(outer).squaredNorm();
      lvl.channels.push_back(c * inv_sqrt_dr);
    }
    lvl.near_threshold = tail > 1e-8;
    out.push_back(std::move(lvl));
  }
  return out;
}

inline double centrifugal(double r, double mu, int j) {
  return j * (j + 1.0) / (2.0 * mu * r * r);
}

} // namespace detail

struct SolveOptions {
  // Keep only the lowest `max_levels` levels (all bound levels when unset).
  std::optional<int> max_levels;
};

inline std::vector<RovibLevel> solve_single(const PotentialCurve &curve,
                                            const RadialGrid &grid, double mu, int j,
                                            SolveOptions opts = {}) {
  grid.validate();
  if (j < 0)
    throw InvalidArgument("solve_single: negative J");
  const auto r = grid.points();
  Eigen::MatrixXd h = dvr_kinetic(grid, mu);
  double vmin = curve(r[0]);
  for (int i = 0; i < grid.n; ++i) {
    const double v = curve(r[static_cast<std::size_t>(i)]);
    vmin = std::min(vmin, v);
    h(i, i) += v + detail::centrifugal(r[static_cast<std::size_t>(i)], mu, j);
  }
  const double asym = curve.asymptote();
  detail::check_cutoff(grid, mu, asym - vmin, "curve " + curve.label());

  auto eig = opts.max_levels ? linalg::eigen_lowest(std::move(h), *opts.max_levels)
                             : linalg::eigen_below(std::move(h), asym - bound_threshold);
  auto levels = detail::unpack_levels(eig, grid, 1, curve.label(), j);
  std::erase_if(levels, [&](const RovibLevel &l) { return !(l.energy < asym - bound_threshold); });
  return levels;
}

inline std::vector<RovibLevel> solve_coupled(const CoupledModel &model,
                                             const RadialGrid &grid, double mu, int jp,
                                             SolveOptions opts = {},
                                             const std::string &label = "Ab") {
  grid.validate();
  if (jp < 0)
    throw InvalidArgument("solve_coupled: negative J'");
  const auto r = grid.points();
  const Eigen::Index n = grid.n;
  const Eigen::MatrixXd t = dvr_kinetic(grid, mu);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = t;
  h.bottomRightCorner(n, n) = t;
  double vmin_a = model.channel_potential(0, r[0]);
  double vmin_b = model.channel_potential(1, r[0]);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ri = r[static_cast<std::size_t>(i)];
    const Eigen::Matrix2d v = coupled_matrix(model, ri);
    const double cent = detail::centrifugal(ri, mu, jp);
    h(i, i) += v(0, 0) + cent;
    h(n + i, n + i) += v(1, 1) + cent;
    h(i, n + i) = v(0, 1);
    h(n + i, i) = v(1, 0);
    vmin_a = std::min(vmin_a, v(0, 0));
    vmin_b = std::min(vmin_b, v(1, 1));
  }
  const double asym = model.asymptote();
  detail::check_cutoff(grid, mu, model.a.asymptote() + model.shift - vmin_a,
                       "channel " + model.a.label());
  detail::check_cutoff(grid, mu, model.b.asymptote() + model.shift - vmin_b,
                       "channel " + model.b.label());

  auto eig = opts.max_levels ? linalg::eigen_lowest(std::move(h), *opts.max_levels)
                             : linalg::eigen_below(std::move(h), asym - bound_threshold);
  auto levels = detail::unpack_levels(eig, grid, 2, label, jp);
  std::erase_if(levels, [&](const RovibLevel &l) { return !(l.energy < asym - bound_threshold); });
  return levels;
}

// sum_i psi_bra,c1(r_i) f(r_i) psi_ket,c2(r_i) dr. Both levels must live on
// the same grid; nothing is interpolated.
inline double radial_matrix_element(const RovibLevel &bra, std::size_t bra_channel,
                                    const std::function<double(double)> &f,
                                    const RovibLevel &ket, std::size_t ket_channel) {
  if (!(bra.grid == ket.grid))
    throw InvariantError("radial_matrix_element: levels live on different grids");
  const auto &a = bra.channels.at(bra_channel);
  const auto &b = ket.channels.at(ket_channel);
  double sum = 0.0;
  for (int i = 0; i < bra.grid.n; ++i)
    sum += a(i) * f(bra.grid.point(i)) * b(i);
  return sum * bra.grid.spacing();
}

// Channel-diagonal form: sum over channels of <bra_c| f |ket_c>.
inline double radial_matrix_element(const RovibLevel &bra,
                                    const std::function<double(double)> &f,
                                    const RovibLevel &ket) {
  if (bra.channel_count() != ket.channel_count())
    throw InvariantError("radial_matrix_element: channel counts differ");
  double sum = 0.0;
  for (std::size_t c = 0; c < bra.channel_count(); ++c)
    sum += radial_matrix_element(bra, c, f, ket, c);
  return sum;
}

// One radiative decay route of a channel of an excited level: the channel's
// own potential, the lower curve it decays to and the connecting dipole.
struct DecayTarget {
  std::size_t channel = 0;
  std::function<double(double)> upper;
  PotentialCurve lower;
  DipoleFunction dipole;
};

struct LinewidthResult {
  double gamma = 0.0;          // angular frequency, atomic units
  double clamped_weight = 0.0; // probability where delta E < 0 was set to 0

  bool clamped() const { return clamped_weight > 0.0; }
  double gamma_per_second() const { return gamma / constants::au_time_s; }
};

// Optical-potential rate Gamma(R) = 4 dE^3 d^2 / (3 c^3) in atomic units,
// i.e. dE^3 d^2 / (3 pi eps0 hbar^4 c^3).
inline double spontaneous_rate(double delta_e, double dipole) {
  const double c = constants::speed_of_light_au;
  return 4.0 * delta_e * delta_e * delta_e * dipole * dipole / (3.0 * c * c * c);
}

inline LinewidthResult linewidth(const RovibLevel &level, std::span<const DecayTarget> targets) {
  LinewidthResult res;
  const double dr = level.grid.spacing();
  for (const auto &t : targets) {
    const auto &psi = level.channels.at(t.channel);
    for (int i = 0; i < level.grid.n; ++i) {
      const double r = level.grid.point(i);
      const double w = psi(i) * psi(i) * dr;
      const double de = t.upper(r) - t.lower(r);
      if (de < 0.0) {
        res.clamped_weight += w;
        continue;
      }
      res.gamma += w * spontaneous_rate(de, t.dipole(r));
    }
  }
  return res;
}

} // namespace moltrap
