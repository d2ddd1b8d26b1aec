#pragma once

#include "moltrap/config.hpp"
#include "moltrap/csv.hpp"
#include "moltrap/errors.hpp"
#include "moltrap/hyperfine.hpp"
#include "moltrap/magic.hpp"
#include "moltrap/model.hpp"
#include "moltrap/polarizability.hpp"
#include "moltrap/units.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace moltrap::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_numerical = 3,
  exit_io = 4,
};

struct RunOptions {
  std::string subcommand;
  fs::path config;
  fs::path out = ".";
  int threads = 1;
  std::vector<std::string> overrides;
};

inline const std::vector<std::string> &subcommands() {
  static const std::vector<std::string> s = {"solve-rovib",    "alpha-scan", "imag-scan",
                                             "hyperfine-scan", "magic-find", "calibrate"};
  return s;
}

// Runs f(i) for i in [0, n) on `threads` workers. Results must be written
// into per-index slots by f; the first failure by index is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F &&f) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, n));
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto &t : pool)
    t.join();
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1)
    throw ConfigError("scan needs at least one point");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return x;
}

namespace detail {

inline hyperfine::Vec3 direction(double theta_deg, double phi_deg) {
  const double t = deg_to_rad(theta_deg), p = deg_to_rad(phi_deg);
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

struct ClosedForm {
  PolarizabilitySpec spec;
  bool calibrated = false;
  double target_ghz = 0.0;
};

inline double per_second_to_au(double g) { return g * constants::au_time_s; }
inline double au_to_per_second(double g) { return g / constants::au_time_s; }

inline PolarizabilitySpec spec_template(config::Config &c) {
  PolarizabilitySpec s;
  const double h = constants::hartree_inverse_cm;
  s.b_v = c.number("molecule.b_v_cm1") / h;
  ResonantLine l;
  l.vprime = 0;
  l.hbar_omega = c.number("molecule.transition_cm1") / h;
  l.b_vprime = c.number("molecule.b_vprime_cm1") / h;
  l.gamma = per_second_to_au(1e5); // placeholder until set or calibrated
  s.lines.push_back(l);
  s.background.parallel = c.number("background.alpha_par_au");
  s.background.perpendicular = c.number("background.alpha_perp_au");
  return s;
}

struct CalibrationTarget {
  double target_ghz;
  int j_a, j_b, m;
  double theta;
};

inline CalibrationTarget calibration_target(config::Config &c) {
  return {c.number_or("calibrate.target_ghz", 103.0), c.integer_or("calibrate.j_a", 0),
          c.integer_or("calibrate.j_b", 1), c.integer_or("calibrate.m", 0),
          deg_to_rad(c.number_or("calibrate.theta_deg", 0.0))};
}

// The closed-form spec: the linewidth comes from line.gamma_per_s when given,
// otherwise from calibration against the [calibrate] crossing.
inline ClosedForm closed_form(config::Config &c) {
  ClosedForm cf;
  cf.spec = spec_template(c);
  if (const auto g = c.optional_number("line.gamma_per_s")) {
    cf.spec.lines[0].gamma = per_second_to_au(*g);
    cf.spec.validate();
    return cf;
  }
  const auto t = calibration_target(c);
  cf.spec = magic::calibrate_gamma(cf.spec, t.j_a, t.j_b, t.m, t.theta, t.target_ghz);
  cf.calibrated = true;
  cf.target_ghz = t.target_ghz;
  return cf;
}

inline model::SurrogateParameters surrogate_parameters(config::Config &c) {
  model::SurrogateParameters p;
  p.reduced_mass_amu = c.number("molecule.reduced_mass_amu");
  p.transition_cm = c.number("molecule.transition_cm1");
  p.x_b_e_cm = c.number_or("surrogate.x_b_e_cm1", c.number("molecule.b_v_cm1"));
  p.x_omega_e_cm = c.number_or("surrogate.x_omega_e_cm1", p.x_omega_e_cm);
  p.x_depth_cm = c.number_or("surrogate.x_depth_cm1",
                             default_depth_in_quanta * p.x_omega_e_cm);
  p.b_r_e_bohr = c.number_or("surrogate.b_r_e_bohr", p.b_r_e_bohr);
  p.b_omega_e_cm = c.number_or("surrogate.b_omega_e_cm1", p.b_omega_e_cm);
  p.b_depth_cm = c.number_or("surrogate.b_depth_cm1", p.b_depth_cm);
  p.a_r_e_bohr = c.number_or("surrogate.a_r_e_bohr", p.a_r_e_bohr);
  p.a_omega_e_cm = c.number_or("surrogate.a_omega_e_cm1", p.a_omega_e_cm);
  p.a_depth_cm = c.number_or("surrogate.a_depth_cm1", p.a_depth_cm);
  p.crossing_bohr = c.number_or("surrogate.crossing_bohr", p.crossing_bohr);
  p.xi_cm = c.number_or("surrogate.xi_cm1", p.xi_cm);
  p.dipole_au = c.number_or("surrogate.dipole_au", p.dipole_au);
  p.grid.r_min = c.number_or("grid.r_min_bohr", p.grid.r_min);
  p.grid.r_max = c.number_or("grid.r_max_bohr", p.grid.r_max);
  p.grid.n = c.integer_or("grid.points", p.grid.n);
  p.grid.validate();
  return p;
}

inline hyperfine::TermSet parse_terms(const std::string &list) {
  if (list == "all")
    return hyperfine::TermSet::all();
  hyperfine::TermSet t;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item == "rotation")
      t = t.with(hyperfine::Term::rotation);
    else if (item == "quadrupole")
      t = t.with(hyperfine::Term::quadrupole);
    else if (item == "zeeman")
      t = t.with(hyperfine::Term::zeeman);
    else if (item == "stark")
      t = t.with(hyperfine::Term::stark);
    else if (item == "polarization")
      t = t.with(hyperfine::Term::polarization);
    else
      throw ConfigError("key 'hyperfine.terms': unknown term '" + item + "'");
  }
  return t;
}

inline magic::AngleProblem angle_problem(config::Config &c) {
  magic::AngleProblem p;
  p.basis = hyperfine::build_basis(c.integer_or("hyperfine.j_max", 1),
                                   c.number_or("hyperfine.i_na", 1.5),
                                   c.number_or("hyperfine.i_rb", 1.5));
  auto &k = p.constants;
  k.b_rot_mhz = c.number("hyperfine.b_rot_mhz");
  k.eqq1_mhz = c.optional_number("hyperfine.eqq_na_mhz");
  k.eqq2_mhz = c.optional_number("hyperfine.eqq_rb_mhz");
  k.g1 = c.optional_number("hyperfine.g_na");
  k.g2 = c.optional_number("hyperfine.g_rb");
  k.dipole_debye = c.optional_number("hyperfine.dipole_debye");
  k.alpha_par_hz = c.number("hyperfine.alpha_par_hz_w_cm2");
  k.alpha_perp_hz = c.number("hyperfine.alpha_perp_hz_w_cm2");
  const auto conv = c.text_or("hyperfine.quadrupole_convention", "standard");
  if (conv == "standard")
    k.convention = hyperfine::QuadrupoleConvention::standard;
  else if (conv == "literal")
    k.convention = hyperfine::QuadrupoleConvention::literal_i_i_minus_1;
  else
    throw ConfigError("key 'hyperfine.quadrupole_convention': expected 'standard' or 'literal'");
  p.terms = parse_terms(c.text_or("hyperfine.terms", "all"));
  const auto mode = c.text_or("hyperfine.mode", "hellmann_feynman");
  if (mode == "hellmann_feynman")
    p.mode = hyperfine::PolarizabilityMode::hellmann_feynman;
  else if (mode == "first_order")
    p.mode = hyperfine::PolarizabilityMode::first_order;
  else
    throw ConfigError("key 'hyperfine.mode': expected 'hellmann_feynman' or 'first_order'");

  auto &f = p.fields;
  f.b_gauss = c.number_or("fields.b_gauss", 0.0);
  f.b_dir = direction(c.number_or("fields.b_theta_deg", 0.0), c.number_or("fields.b_phi_deg", 0.0));
  f.e_kv_cm = c.number_or("fields.e_kv_cm", 0.0);
  f.e_dir = direction(c.number_or("fields.e_theta_deg", 0.0), c.number_or("fields.e_phi_deg", 0.0));
  f.intensity = c.number_or("fields.intensity_w_cm2", 2000.0);
  f.polarization = hyperfine::polarization_at(deg_to_rad(c.number_or("fields.polarization_theta_deg", 0.0)));
  f.validate();
  // Fail early on missing constants of the selected terms.
  (void)hyperfine::build_hamiltonian(p.basis, p.constants, f, p.terms);
  return p;
}

struct Context {
  config::Config &cfg;
  const RunOptions &opts;
  std::ostream &out;
  std::ostream &err;
};

inline void write_table(const Context &ctx, const csv::Table &t, const std::string &name) {
  const auto path = ctx.opts.out / name;
  csv::write(t, path);
  ctx.out << "wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
}

// ---------------------------------------------------------------------------

inline void solve_rovib(const Context &ctx) {
  auto &c = ctx.cfg;
  const auto p = surrogate_parameters(c);
  const int j_max = c.integer_or("rovib.j_max", 5);
  const int count = c.integer_or("rovib.levels", 10);
  if (j_max < 0 || count < 1)
    throw ConfigError("rovib.j_max must be >= 0 and rovib.levels >= 1");
  const auto s = model::build_surrogate(p);
  std::vector<int> js(static_cast<std::size_t>(j_max + 1));
  for (int j = 0; j <= j_max; ++j)
    js[static_cast<std::size_t>(j)] = j;

  std::vector<std::vector<RovibLevel>> xs(js.size()), us(js.size());
  parallel_for(js.size(), ctx.opts.threads, [&](std::size_t i) {
    xs[i] = solve_single(s.x, p.grid, s.mu, js[i], SolveOptions{count});
    us[i] = solve_coupled(s.ab, p.grid, s.mu, js[i], SolveOptions{count});
  });
  LevelsByJ upper;
  for (std::size_t i = 0; i < js.size(); ++i)
    upper[js[i]] = us[i];
  const auto widths = model::linewidths(s, upper);

  const double h = constants::hartree_inverse_cm;
  const double e0 = xs[0].at(0).energy;
  csv::Table t{{"state", "v", "J", "energy_cm1", "b_fraction", "gamma_per_s", "near_threshold"}, {}};
  for (std::size_t i = 0; i < js.size(); ++i)
    for (const auto &l : xs[i])
      t.add({std::string("X"), static_cast<long long>(l.v), static_cast<long long>(l.j),
             (l.energy - e0) * h, 0.0, std::numeric_limits<double>::quiet_NaN(),
             static_cast<long long>(l.near_threshold)});
  for (std::size_t i = 0; i < js.size(); ++i)
    for (std::size_t k = 0; k < us[i].size(); ++k) {
      const auto &l = us[i][k];
      t.add({std::string("Ab"), static_cast<long long>(l.v), static_cast<long long>(l.j),
             (l.energy - e0) * h, l.fraction(CoupledModel::channel_b),
             au_to_per_second(widths.at(js[i]).at(k)), static_cast<long long>(l.near_threshold)});
    }
  write_table(ctx, t, "levels.csv");
  if (j_max >= 1) {
    ctx.out << "X B_0 = " << (xs[1][0].energy - xs[0][0].energy) / 2.0 * h << " cm-1\n";
    ctx.out << "Ab v'=0 B' = " << (us[1][0].energy - us[0][0].energy) / 2.0 * h
            << " cm-1, b fraction " << us[1][0].fraction(CoupledModel::channel_b) << "\n";
  }
}

inline void alpha_scan(const Context &ctx) {
  auto &c = ctx.cfg;
  const auto cf = closed_form(c);
  const double lo = c.number_or("scan.detuning_min_ghz", -50.0);
  const double hi = c.number_or("scan.detuning_max_ghz", 150.0);
  const int n = c.integer_or("scan.detuning_points", 2001);
  const int j_min = c.integer_or("scan.j_min", 0);
  const int j_max = c.integer_or("scan.j_max", 5);
  const int m = c.integer_or("scan.m", 0);
  const double theta = deg_to_rad(c.number_or("scan.theta_deg", 0.0));
  if (j_min < 0 || j_max < j_min || std::abs(m) > j_min)
    throw ConfigError("scan.j_min/j_max/m describe no valid state");
  const auto x = linspace(lo, hi, n);
  const int nj = j_max - j_min + 1;
  std::vector<double> alpha(static_cast<std::size_t>(nj) * x.size());
  parallel_for(alpha.size(), ctx.opts.threads, [&](std::size_t i) {
    const int j = j_min + static_cast<int>(i / x.size());
    const double d = convert(x[i % x.size()], Unit::ghz, Unit::hartree);
    try {
      alpha[i] = alpha_analytic(cf.spec, d, j, m, theta).real_part;
    } catch (const PoleError &) {
      alpha[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  csv::Table t{{"detuning_GHz", "J", "M", "alpha_au"}, {}};
  for (std::size_t i = 0; i < alpha.size(); ++i)
    t.add({x[i % x.size()], static_cast<long long>(j_min + static_cast<int>(i / x.size())),
           static_cast<long long>(m), alpha[i]});
  write_table(ctx, t, "alpha_scan.csv");
  ctx.out << "gamma = " << au_to_per_second(cf.spec.lines[0].gamma) << " s^-1"
          << (cf.calibrated ? " (calibrated)" : "") << "\n";
  for (int j = j_min; j <= j_max; ++j) {
    ctx.out << "J=" << j << " poles (GHz):";
    for (double p : magic::analytic_poles(cf.spec, j, m, theta))
      if (p >= lo && p <= hi)
        ctx.out << " " << p;
    ctx.out << "\n";
  }
}

inline void imag_scan(const Context &ctx) {
  auto &c = ctx.cfg;
  const auto p = surrogate_parameters(c);
  const double lo = c.number_or("imag.photon_min_cm1", 10500.0);
  const double hi = c.number_or("imag.photon_max_cm1", 11250.0);
  const int n = c.integer_or("imag.points", 301);
  const int j_max = c.integer_or("imag.j_max", 1);
  const int m = c.integer_or("imag.m", 0);
  const double theta = deg_to_rad(c.number_or("imag.theta_deg", 0.0));
  const int upper_count = c.integer_or("imag.upper_levels", 40);
  if (j_max < std::abs(m) || upper_count < 1)
    throw ConfigError("imag.j_max/m/upper_levels describe no valid state");
  const auto s = model::build_surrogate(p);
  std::vector<int> js, jps;
  for (int j = 0; j <= j_max; ++j)
    js.push_back(j);
  for (int j = 0; j <= j_max + 1; ++j)
    jps.push_back(j);
  const auto xl = model::x_levels(s, js, 1);
  const auto ul = model::ab_levels(s, jps, upper_count);
  const auto widths = model::linewidths(s, ul);
  std::vector<std::vector<ResonantTransition>> trans;
  for (int j = 0; j <= j_max; ++j)
    trans.push_back(decaying_transitions(xl.at(j).at(0), ul, widths, s.dipole));

  const auto x = linspace(lo, hi, n);
  const int first_j = std::abs(m);
  const std::size_t nj = static_cast<std::size_t>(j_max - first_j + 1);
  std::vector<double> im(nj * x.size());
  const double h = constants::hartree_inverse_cm;
  parallel_for(im.size(), ctx.opts.threads, [&](std::size_t i) {
    const int j = first_j + static_cast<int>(i / x.size());
    try {
      im[i] = alpha_imag(trans[static_cast<std::size_t>(j)], j, m, theta, x[i % x.size()] / h)
                  .imag_part;
    } catch (const PoleError &) {
      im[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  csv::Table t{{"photon_cm1", "J", "M", "imag_alpha_au"}, {}};
  for (std::size_t i = 0; i < im.size(); ++i)
    t.add({x[i % x.size()], static_cast<long long>(first_j + static_cast<int>(i / x.size())),
           static_cast<long long>(m), im[i]});
  write_table(ctx, t, "imag_scan.csv");
}

inline void hyperfine_scan(const Context &ctx) {
  auto &c = ctx.cfg;
  const auto p = angle_problem(c);
  const auto thetas = linspace(c.number_or("hfscan.theta_min_deg", 0.0),
                               c.number_or("hfscan.theta_max_deg", 90.0),
                               c.integer_or("hfscan.theta_points", 181));
  std::vector<hyperfine::EigenSolution> sols(thetas.size());
  parallel_for(thetas.size(), ctx.opts.threads,
               [&](std::size_t i) { sols[i] = magic::solve_at_angle(p, thetas[i]); });
  const auto scan = magic::track_solutions(thetas, sols);
  csv::Table t{{"theta_deg", "curve", "J", "M", "energy_MHz", "alpha_Hz_per_W_cm2"}, {}};
  for (std::size_t k = 0; k < scan.theta_deg.size(); ++k)
    for (std::size_t cidx = 0; cidx < scan.labels.size(); ++cidx)
      t.add({scan.theta_deg[k], static_cast<long long>(cidx),
             static_cast<long long>(scan.labels[cidx].j), static_cast<long long>(scan.labels[cidx].m),
             scan.energy[k][cidx], scan.alpha[k][cidx]});
  write_table(ctx, t, "hyperfine_scan.csv");
  if (!scan.min_overlap.empty())
    ctx.out << "worst step overlap " << *std::min_element(scan.min_overlap.begin(), scan.min_overlap.end())
            << "\n";
  const auto census = hyperfine::label_census(sols.front());
  for (const auto &[jm, count] : census)
    if (count != (p.basis.two_i1 + 1) * (p.basis.two_i2 + 1))
      ctx.err << "note: " << count << " eigenstates carry the dominant label (J=" << jm.first
              << ", M=" << jm.second << ") at the first angle\n";
}

inline void magic_find(const Context &ctx) {
  auto &c = ctx.cfg;
  const auto kind = c.text_or("magic.kind", "detuning");
  if (kind == "detuning") {
    const auto cf = closed_form(c);
    const int j_ref = c.integer_or("magic.j_ref", 0);
    const int j_max = c.integer_or("magic.j_max", 5);
    const int m = c.integer_or("magic.m", 0);
    const double theta = deg_to_rad(c.number_or("magic.theta_deg", 0.0));
    const double lo = c.number_or("magic.detuning_min_ghz", 60.0);
    const double hi = c.number_or("magic.detuning_max_ghz", 150.0);
    const int points = c.integer_or("magic.scan_points", 512);
    std::vector<int> partners;
    for (int j = std::abs(m); j <= j_max; ++j)
      if (j != j_ref)
        partners.push_back(j);
    std::vector<std::vector<magic::MagicSolution>> found(partners.size());
    parallel_for(partners.size(), ctx.opts.threads, [&](std::size_t i) {
      found[i] = magic::scan_magic_detunings(cf.spec, j_ref, partners[i], m, theta, lo, hi, points);
    });
    csv::Table t{{"j_a", "j_b", "M", "detuning_GHz", "residual_au"}, {}};
    for (std::size_t i = 0; i < partners.size(); ++i)
      for (const auto &sol : found[i]) {
        t.add({static_cast<long long>(j_ref), static_cast<long long>(partners[i]),
               static_cast<long long>(m), sol.location, sol.residual});
        ctx.out << sol.state_a << " / " << sol.state_b << ": " << sol.location << " GHz\n";
      }
    write_table(ctx, t, "magic_detunings.csv");
    return;
  }
  if (kind != "angle")
    throw ConfigError("key 'magic.kind': expected 'detuning' or 'angle'");
  const auto p = angle_problem(c);
  hyperfine::StateRef a{c.integer_or("magic.state_a_j", 0), c.integer_or("magic.state_a_m", 0),
                        c.integer_or("magic.state_a_rank", 0)};
  const int bj = c.integer_or("magic.state_b_j", 1);
  const int bm = c.integer_or("magic.state_b_m", 0);
  const auto brank = c.text_or("magic.state_b_rank", "all");
  const double lo = c.number_or("magic.angle_min_deg", 45.0);
  const double hi = c.number_or("magic.angle_max_deg", 65.0);
  std::vector<hyperfine::StateRef> bs;
  if (brank == "all") {
    const auto census = hyperfine::label_census(magic::solve_at_angle(p, lo));
    const auto it = census.find({bj, bm});
    const int count = it == census.end() ? 0 : it->second;
    for (int r = 0; r < count; ++r)
      bs.push_back({bj, bm, r});
  } else {
    bs.push_back({bj, bm, c.integer("magic.state_b_rank")});
  }
  if (bs.empty())
    throw ConfigError("no eigenstate carries the label of magic.state_b_j/state_b_m");
  std::vector<magic::MagicSolution> found(bs.size());
  parallel_for(bs.size(), ctx.opts.threads,
               [&](std::size_t i) { found[i] = magic::find_magic_angle(p, a, bs[i], lo, hi); });
  csv::Table t{{"state_a", "state_b", "theta_deg", "residual_Hz_per_W_cm2"}, {}};
  for (const auto &sol : found) {
    t.add({sol.state_a, sol.state_b, sol.location, sol.residual});
    ctx.out << sol.state_a << " / " << sol.state_b << ": " << sol.location << " deg\n";
  }
  write_table(ctx, t, "magic_angles.csv");
}

inline void calibrate(const Context &ctx) {
  auto &c = ctx.cfg;
  auto spec = spec_template(c);
  const auto t = calibration_target(c);
  spec = magic::calibrate_gamma(spec, t.j_a, t.j_b, t.m, t.theta, t.target_ghz);
  const double gamma = au_to_per_second(spec.lines[0].gamma);
  csv::Table tab{{"gamma_per_s", "target_GHz", "j_a", "j_b", "M", "theta_deg"}, {}};
  tab.add({gamma, t.target_ghz, static_cast<long long>(t.j_a), static_cast<long long>(t.j_b),
           static_cast<long long>(t.m), rad_to_deg(t.theta)});
  write_table(ctx, tab, "calibration.csv");
  std::ostringstream g;
  g.precision(12);
  g << gamma;
  ctx.out << "line.gamma_per_s = " << g.str() << "\n";
}

} // namespace detail

inline int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const IoError *>(&e))
    return exit_io;
  if (dynamic_cast<const NumericalError *>(&e) || dynamic_cast<const InvariantError *>(&e))
    return exit_numerical;
  if (dynamic_cast<const Error *>(&e))
    return exit_config;
  return exit_internal;
}

// Executes one subcommand: CSV output and effective_config.ini under
// opts.out, a summary on `out`, diagnostics on `err`.
inline int run(const RunOptions &opts, std::ostream &out, std::ostream &err) {
  try {
    if (std::find(subcommands().begin(), subcommands().end(), opts.subcommand) ==
        subcommands().end())
      throw ConfigError("unknown subcommand '" + opts.subcommand + "'");
    if (opts.threads < 1)
      throw ConfigError("--threads must be at least 1");
    auto cfg = config::Config::from_file(opts.config);
    for (const auto &o : opts.overrides)
      cfg.apply_override(o);
    std::error_code ec;
    fs::create_directories(opts.out, ec);
    if (ec || !fs::is_directory(opts.out))
      throw IoError("cannot create output directory '" + opts.out.string() + "'");

    detail::Context ctx{cfg, opts, out, err};
    const auto &s = opts.subcommand;
    if (s == "solve-rovib")
      detail::solve_rovib(ctx);
    else if (s == "alpha-scan")
      detail::alpha_scan(ctx);
    else if (s == "imag-scan")
      detail::imag_scan(ctx);
    else if (s == "hyperfine-scan")
      detail::hyperfine_scan(ctx);
    else if (s == "magic-find")
      detail::magic_find(ctx);
    else
      detail::calibrate(ctx);

    const auto eff = opts.out / "effective_config.ini";
    std::ofstream os(eff, std::ios::binary | std::ios::trunc);
    os << cfg.effective_ini();
    if (!os)
      throw IoError("failed writing '" + eff.string() + "'");
    return exit_ok;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

} // namespace moltrap::cli
