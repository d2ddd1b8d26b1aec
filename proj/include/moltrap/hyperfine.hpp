#pragma once

#include "moltrap/errors.hpp"
#include "moltrap/units.hpp"
#include "moltrap/wigner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

// Rotational-hyperfine structure of v = 0 of a 1Sigma molecule with two
// quadrupolar nuclei, in the uncoupled basis |J M m_1 m_2> quantised along
// the magnetic field (z). Energies are in MHz, polarizabilities in
// Hz/(W/cm^2), fields in gauss and kV/cm, intensity in W/cm^2.

namespace moltrap::hyperfine {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

struct BasisState {
  int j = 0;
  int m = 0;
  int two_m1 = 0; // first nucleus (Na)
  int two_m2 = 0; // second nucleus (Rb)
};

struct HyperfineBasis {
  int j_max = 0;
  int two_i1 = 3;
  int two_i2 = 3;
  std::vector<BasisState> states;

  std::size_t size() const { return states.size(); }
};

inline HyperfineBasis build_basis(int j_max, double i_na, double i_rb) {
  if (j_max < 0 || j_max > 2)
    throw InvalidArgument("build_basis: j_max must be 0, 1 or 2, got " + std::to_string(j_max));
  const int t1 = detail::twice_of(i_na);
  const int t2 = detail::twice_of(i_rb);
  if (t1 <= 0 || t2 <= 0)
    throw InvalidArgument("build_basis: nuclear spins must be positive");
  HyperfineBasis b{j_max, t1, t2, {}};
  for (int j = 0; j <= j_max; ++j)
    for (int m = -j; m <= j; ++m)
      for (int m1 = -t1; m1 <= t1; m1 += 2)
        for (int m2 = -t2; m2 <= t2; m2 += 2)
          b.states.push_back({j, m, m1, m2});
  return b;
}

enum class QuadrupoleConvention {
  // eqQ C2.Q / (i (2i - 1)): first-order energies eqQ [3m^2 - i(i+1)] / (4 i (2i-1))
  // for an axial gradient.
  standard,
  // Same operator with the denominator i (i - 1).
  literal_i_i_minus_1,
};

// Molecular constants. The optional ones are only required by the terms
// that use them.
struct HyperfineConstants {
  double b_rot_mhz = 0.0;
  std::optional<double> eqq1_mhz; // Na
  std::optional<double> eqq2_mhz; // Rb
  std::optional<double> g1;       // nuclear g-factors, shielding ignored
  std::optional<double> g2;
  std::optional<double> dipole_debye;
  std::optional<double> alpha_par_hz;  // Hz/(W/cm^2)
  std::optional<double> alpha_perp_hz;
  QuadrupoleConvention convention = QuadrupoleConvention::standard;
};

struct FieldConfiguration {
  double b_gauss = 0.0;
  Vec3 b_dir = Vec3::UnitZ();
  double e_kv_cm = 0.0;
  Vec3 e_dir = Vec3::UnitZ();
  Vec3 polarization = Vec3::UnitZ();
  double intensity = 0.0; // W/cm^2

  void validate() const {
    auto unit = [](const Vec3 &v, const char *what) {
      if (std::abs(v.norm() - 1.0) > 1e-12)
        throw ConfigError(std::string(what) + " direction is not a unit vector");
    };
    unit(b_dir, "magnetic field");
    unit(e_dir, "electric field");
    unit(polarization, "polarization");
    if (b_gauss < 0.0 || e_kv_cm < 0.0)
      throw ConfigError("field magnitudes must be non-negative");
    if (intensity < 0.0)
      throw ConfigError("intensity must be non-negative");
  }
};

// Linear polarisation in the xz-plane at angle theta (radians) from z.
inline Vec3 polarization_at(double theta) { return {std::sin(theta), 0.0, std::cos(theta)}; }

enum class Term : unsigned {
  rotation = 1u,
  quadrupole = 2u,
  zeeman = 4u,
  stark = 8u,
  polarization = 16u,
};

class TermSet {
public:
  constexpr TermSet() = default;
  constexpr TermSet(std::initializer_list<Term> ts) {
    for (auto t : ts)
      bits_ |= static_cast<unsigned>(t);
  }
  static constexpr TermSet all() {
    return {Term::rotation, Term::quadrupole, Term::zeeman, Term::stark, Term::polarization};
  }
  constexpr bool has(Term t) const { return (bits_ & static_cast<unsigned>(t)) != 0; }
  constexpr TermSet with(Term t) const {
    TermSet s = *this;
    s.bits_ |= static_cast<unsigned>(t);
    return s;
  }
  constexpr TermSet without(Term t) const {
    TermSet s = *this;
    s.bits_ &= ~static_cast<unsigned>(t);
    return s;
  }

private:
  unsigned bits_ = 0;
};

namespace detail {

// Spherical components (q = -1, 0, +1) of a real vector.
inline std::array<cplx, 3> spherical(const Vec3 &v) {
  const double s = 1.0 / std::sqrt(2.0);
  return {cplx(v.x() * s, -v.y() * s), cplx(v.z(), 0.0), cplx(-v.x() * s, -v.y() * s)};
}

// Spherical spin operators I_q, q = -1, 0, +1, on |i m>, m ascending.
inline std::array<Eigen::MatrixXcd, 3> spin_components(int two_i) {
  const int dim = two_i + 1;
  const double i = two_i / 2.0;
  Eigen::MatrixXcd iz = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd ip = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = -i + k;
    iz(k, k) = m;
    if (k + 1 < dim)
      ip(k + 1, k) = std::sqrt(i * (i + 1) - m * (m + 1));
  }
  const Eigen::MatrixXcd im = ip.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  return {im * s, iz, -ip * s};
}

// Rank-2 tensor T2_q(A, A) = sum <1 q1 1 q2 | 2 q> A_q1 A_q2, q = -2..2.
inline std::array<Eigen::MatrixXcd, 5> rank2_from(const std::array<Eigen::MatrixXcd, 3> &a) {
  std::array<Eigen::MatrixXcd, 5> t;
  const auto dim = a[0].rows();
  for (int q = -2; q <= 2; ++q) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (int q1 = -1; q1 <= 1; ++q1) {
      const int q2 = q - q1;
      if (std::abs(q2) > 1)
        continue;
      acc += clebsch_gordan_2(2, 2 * q1, 2, 2 * q2, 4, 2 * q) * (a[q1 + 1] * a[q2 + 1]);
    }
    t[q + 2] = acc;
  }
  return t;
}

inline std::array<cplx, 5> rank2_from(const std::array<cplx, 3> &a) {
  std::array<cplx, 5> t{};
  for (int q = -2; q <= 2; ++q)
    for (int q1 = -1; q1 <= 1; ++q1) {
      const int q2 = q - q1;
      if (std::abs(q2) > 1)
        continue;
      t[q + 2] += clebsch_gordan_2(2, 2 * q1, 2, 2 * q2, 4, 2 * q) * a[q1 + 1] * a[q2 + 1];
    }
  return t;
}

inline int spin_index(int two_m, int two_i) { return (two_m + two_i) / 2; }

inline double parity(int q) { return (std::abs(q) % 2 == 0) ? 1.0 : -1.0; }

template <class F>
Eigen::MatrixXcd assemble(const HyperfineBasis &basis, F &&element) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      h(a, b) = element(basis.states[static_cast<std::size_t>(a)],
                        basis.states[static_cast<std::size_t>(b)]);
  return h;
}

// sum_q (-1)^q coeff[-q] <J'M'|C_{k q}|J M>, nuclear projections unchanged.
template <std::size_t N>
Eigen::MatrixXcd rotational_contraction(const HyperfineBasis &basis, int k,
                                        const std::array<cplx, N> &coeff) {
  return assemble(basis, [&](const BasisState &p, const BasisState &s) -> cplx {
    if (p.two_m1 != s.two_m1 || p.two_m2 != s.two_m2)
      return 0.0;
    const int q = p.m - s.m;
    if (std::abs(q) > k)
      return 0.0;
    return parity(q) * coeff[static_cast<std::size_t>(-q + k)] *
           rot_tensor_element(p.j, p.m, k, q, s.j, s.m);
  });
}

inline double required(const std::optional<double> &v, const char *name) {
  if (!v)
    throw ConfigError(std::string("missing constant '") + name + "' for a selected term");
  return *v;
}

} // namespace detail

inline Eigen::MatrixXcd rotation_term(const HyperfineBasis &basis, const HyperfineConstants &c) {
  return detail::assemble(basis, [&](const BasisState &p, const BasisState &s) -> cplx {
    if (p.j != s.j || p.m != s.m || p.two_m1 != s.two_m1 || p.two_m2 != s.two_m2)
      return 0.0;
    return c.b_rot_mhz * p.j * (p.j + 1.0);
  });
}

// H_Q = sum_k (eqQ)_k [C_2 . Q(i_k)] / den_k with Q_0 = (3 i_z^2 - i^2) / 4.
inline Eigen::MatrixXcd quadrupole_term(const HyperfineBasis &basis,
                                        const HyperfineConstants &c) {
  const double eqq[2] = {detail::required(c.eqq1_mhz, "eqq_na_mhz"),
                         detail::required(c.eqq2_mhz, "eqq_rb_mhz")};
  const int two_i[2] = {basis.two_i1, basis.two_i2};
  std::array<std::array<Eigen::MatrixXcd, 5>, 2> q;
  double scale[2];
  for (int k = 0; k < 2; ++k) {
    q[k] = detail::rank2_from(detail::spin_components(two_i[k]));
    for (auto &m : q[k])
      m *= std::sqrt(6.0) / 4.0;
    const double i = two_i[k] / 2.0;
    const double den = c.convention == QuadrupoleConvention::standard ? i * (2 * i - 1) : i * (i - 1);
    scale[k] = den == 0.0 ? 0.0 : eqq[k] / den;
  }
  return detail::assemble(basis, [&](const BasisState &p, const BasisState &s) -> cplx {
    const int qrot = p.m - s.m;
    if (std::abs(qrot) > 2)
      return 0.0;
    const double rot = rot_tensor_element(p.j, p.m, 2, qrot, s.j, s.m);
    if (rot == 0.0)
      return 0.0;
    cplx sum = 0.0;
    // Nucleus 1 acts, nucleus 2 spectator.
    if (p.two_m2 == s.two_m2) {
      const int a = detail::spin_index(p.two_m1, basis.two_i1);
      const int b = detail::spin_index(s.two_m1, basis.two_i1);
      sum += scale[0] * q[0][static_cast<std::size_t>(-qrot + 2)](a, b);
    }
    if (p.two_m1 == s.two_m1) {
      const int a = detail::spin_index(p.two_m2, basis.two_i2);
      const int b = detail::spin_index(s.two_m2, basis.two_i2);
      sum += scale[1] * q[1][static_cast<std::size_t>(-qrot + 2)](a, b);
    }
    return detail::parity(qrot) * rot * sum;
  });
}

// Nuclear Zeeman: -sum_k g_k mu_N B . i_k.
inline Eigen::MatrixXcd zeeman_term(const HyperfineBasis &basis, const HyperfineConstants &c,
                                    const FieldConfiguration &f) {
  const double g[2] = {detail::required(c.g1, "g_na"), detail::required(c.g2, "g_rb")};
  const auto bq = detail::spherical(f.b_gauss * f.b_dir);
  const std::array<std::array<Eigen::MatrixXcd, 3>, 2> spin = {
      detail::spin_components(basis.two_i1), detail::spin_components(basis.two_i2)};
  const double mun = constants::nuclear_magneton_mhz_per_gauss;
  return detail::assemble(basis, [&](const BasisState &p, const BasisState &s) -> cplx {
    if (p.j != s.j || p.m != s.m)
      return 0.0;
    cplx sum = 0.0;
    for (int q = -1; q <= 1; ++q) {
      const cplx bmq = bq[static_cast<std::size_t>(-q + 1)];
      if (p.two_m2 == s.two_m2)
        sum += g[0] * detail::parity(q) * bmq *
               spin[0][static_cast<std::size_t>(q + 1)](detail::spin_index(p.two_m1, basis.two_i1),
                                                        detail::spin_index(s.two_m1, basis.two_i1));
      if (p.two_m1 == s.two_m1)
        sum += g[1] * detail::parity(q) * bmq *
               spin[1][static_cast<std::size_t>(q + 1)](detail::spin_index(p.two_m2, basis.two_i2),
                                                        detail::spin_index(s.two_m2, basis.two_i2));
    }
    return -mun * sum;
  });
}

// Stark: -d0 E . n with n = C_1 of the molecular axis.
inline Eigen::MatrixXcd stark_term(const HyperfineBasis &basis, const HyperfineConstants &c,
                                   const FieldConfiguration &f) {
  const double d0 = detail::required(c.dipole_debye, "dipole_debye");
  auto eq = detail::spherical(f.e_kv_cm * f.e_dir);
  for (auto &x : eq)
    x *= -d0 * constants::debye_kv_per_cm_mhz;
  return detail::rotational_contraction(basis, 1, eq);
}

// dH_pol/dI in MHz per W/cm^2:
// -(alpha_par + 2 alpha_perp)/3 - (sqrt6/3)(alpha_par - alpha_perp) T2(eps,eps).C2.
inline Eigen::MatrixXcd polarization_per_intensity(const HyperfineBasis &basis,
                                                   const HyperfineConstants &c,
                                                   const FieldConfiguration &f) {
  const double par = detail::required(c.alpha_par_hz, "alpha_par_hz") * 1e-6;
  const double perp = detail::required(c.alpha_perp_hz, "alpha_perp_hz") * 1e-6;
  auto t2 = detail::rank2_from(detail::spherical(f.polarization));
  for (auto &x : t2)
    x *= -std::sqrt(6.0) / 3.0 * (par - perp);
  Eigen::MatrixXcd h = detail::rotational_contraction(basis, 2, t2);
  h.diagonal().array() += -(par + 2.0 * perp) / 3.0;
  return h;
}

inline Eigen::MatrixXcd build_hamiltonian(const HyperfineBasis &basis,
                                          const HyperfineConstants &c,
                                          const FieldConfiguration &f, TermSet terms) {
  f.validate();
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  if (terms.has(Term::rotation))
    h += rotation_term(basis, c);
  if (terms.has(Term::quadrupole))
    h += quadrupole_term(basis, c);
  if (terms.has(Term::zeeman))
    h += zeeman_term(basis, c, f);
  if (terms.has(Term::stark))
    h += stark_term(basis, c, f);
  if (terms.has(Term::polarization))
    h += f.intensity * polarization_per_intensity(basis, c, f);
  return h;
}

// ---------------------------------------------------------------------------

struct StateLabel {
  int j = 0;
  int m = 0;
  double weight = 0.0; // probability in the dominant (J, M) block

  bool operator==(const StateLabel &o) const { return j == o.j && m == o.m; }
};

struct EigenSolution {
  Eigen::VectorXd values;   // MHz, ascending
  Eigen::MatrixXcd vectors; // columns in the basis order
  std::vector<StateLabel> labels;
  std::vector<double> polarizability; // Hz/(W/cm^2), filled on request

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

inline StateLabel dominant_label(const HyperfineBasis &basis, const Eigen::VectorXcd &v) {
  std::map<std::pair<int, int>, double> weight;
  for (std::size_t k = 0; k < basis.size(); ++k)
    weight[{basis.states[k].j, basis.states[k].m}] += std::norm(v(static_cast<Eigen::Index>(k)));
  StateLabel best{0, 0, -1.0};
  for (const auto &[jm, w] : weight)
    if (w > best.weight + 1e-12)
      best = {jm.first, jm.second, w};
  return best;
}

namespace detail {

inline void fix_phases(Eigen::MatrixXcd &vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    Eigen::Index imax = 0;
    vecs.col(c).cwiseAbs().maxCoeff(&imax);
    const cplx z = vecs(imax, c);
    vecs.col(c) *= std::conj(z) / std::abs(z);
  }
}

inline void check_hermitian(const Eigen::MatrixXcd &h) {
  if (h.rows() != h.cols())
    throw InvariantError("matrix is not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw InvariantError("matrix is not Hermitian (max |H - H^dag| = " + std::to_string(asym) + ")");
}

} // namespace detail

inline EigenSolution diagonalize(const Eigen::MatrixXcd &h, const HyperfineBasis *basis = nullptr) {
  detail::check_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericalError("Hermitian eigensolver failed");
  EigenSolution sol;
  sol.values = es.eigenvalues();
  sol.vectors = es.eigenvectors();
  detail::fix_phases(sol.vectors);
  if (basis)
    for (Eigen::Index c = 0; c < sol.vectors.cols(); ++c)
      sol.labels.push_back(dominant_label(*basis, sol.vectors.col(c)));
  return sol;
}

enum class PolarizabilityMode {
  // Hellmann-Feynman on eigenstates of the full Hamiltonian, polarization
  // term included at the configured intensity.
  hellmann_feynman,
  // Expectation of -dH_pol/dI in eigenstates of the static-field
  // Hamiltonian; exact degeneracies are resolved along the uncoupled z basis
  // (the weak-trap limit with the quantisation axis set by the magnetic field).
  first_order,
};

// alpha_i = <psi_i| -dH_pol/dI |psi_i>, Hz/(W/cm^2).
inline std::vector<double> eigenstate_polarizability(const EigenSolution &sol,
                                                     const Eigen::MatrixXcd &dh_di) {
  std::vector<double> out(sol.size());
  for (Eigen::Index c = 0; c < sol.vectors.cols(); ++c) {
    const Eigen::VectorXcd v = sol.vectors.col(c);
    out[static_cast<std::size_t>(c)] = -(v.adjoint() * dh_di * v)(0, 0).real() * 1e6;
  }
  return out;
}

namespace detail {

// Rotates each cluster of eigenvalues closer than `tol` onto the basis
// ordering (diagonalises diag(0, 1, 2, ...) inside the cluster).
inline void resolve_degeneracies(EigenSolution &sol, double tol) {
  const Eigen::Index n = sol.values.size();
  Eigen::VectorXd order(sol.vectors.rows());
  std::iota(order.data(), order.data() + order.size(), 0.0);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && sol.values(end) - sol.values(end - 1) < tol)
      ++end;
    if (end - start > 1) {
      const Eigen::MatrixXcd p = sol.vectors.middleCols(start, end - start);
      const Eigen::MatrixXcd lam = p.adjoint() * order.asDiagonal() * p;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lam);
      sol.vectors.middleCols(start, end - start) = p * es.eigenvectors();
    }
    start = end;
  }
  fix_phases(sol.vectors);
}

} // namespace detail

// Diagonalises the Hamiltonian for one field configuration and attaches
// labels and per-state polarizabilities.
inline EigenSolution solve(const HyperfineBasis &basis, const HyperfineConstants &c,
                           const FieldConfiguration &f, TermSet terms,
                           PolarizabilityMode mode = PolarizabilityMode::hellmann_feynman) {
  const Eigen::MatrixXcd dh = polarization_per_intensity(basis, c, f);
  EigenSolution sol;
  if (mode == PolarizabilityMode::hellmann_feynman) {
    sol = diagonalize(build_hamiltonian(basis, c, f, terms), &basis);
  } else {
    const Eigen::MatrixXcd h0 = build_hamiltonian(basis, c, f, terms.without(Term::polarization));
    sol = diagonalize(h0, &basis);
    detail::resolve_degeneracies(sol, 1e-9 * std::max(1.0, sol.values.cwiseAbs().maxCoeff()));
    sol.labels.clear();
    for (Eigen::Index k = 0; k < sol.vectors.cols(); ++k)
      sol.labels.push_back(dominant_label(basis, sol.vectors.col(k)));
    if (terms.has(Term::polarization))
      for (Eigen::Index k = 0; k < sol.vectors.cols(); ++k) {
        const Eigen::VectorXcd v = sol.vectors.col(k);
        sol.values(k) += f.intensity * (v.adjoint() * dh * v)(0, 0).real();
      }
  }
  sol.polarizability = eigenstate_polarizability(sol, dh);
  return sol;
}

// Greedy maximal-overlap assignment: result[i] is the state of `b` that
// continues state i of `a`.
inline std::vector<int> track_states(const EigenSolution &a, const EigenSolution &b) {
  if (a.vectors.rows() != b.vectors.rows() || a.vectors.cols() != b.vectors.cols())
    throw InvariantError("track_states: solutions have different dimensions");
  const Eigen::MatrixXd overlap = (a.vectors.adjoint() * b.vectors).cwiseAbs();
  const Eigen::Index n = overlap.rows();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      pairs.emplace_back(i, j);
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto &x, const auto &y) {
    return overlap(x.first, x.second) > overlap(y.first, y.second);
  });
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Eigen::Index assigned = 0;
  for (const auto &[i, j] : pairs) {
    if (perm[static_cast<std::size_t>(i)] >= 0 || used[static_cast<std::size_t>(j)])
      continue;
    perm[static_cast<std::size_t>(i)] = static_cast<int>(j);
    used[static_cast<std::size_t>(j)] = true;
    if (++assigned == n)
      break;
  }
  return perm;
}

// Picks the `rank`-th lowest eigenstate whose dominant character is (J, M).
struct StateRef {
  int j = 0;
  int m = 0;
  int rank = 0;
};

inline std::size_t find_state(const EigenSolution &sol, const StateRef &ref) {
  int seen = 0;
  for (std::size_t k = 0; k < sol.labels.size(); ++k)
    if (sol.labels[k].j == ref.j && sol.labels[k].m == ref.m && seen++ == ref.rank)
      return k;
  throw InvalidArgument("no eigenstate #" + std::to_string(ref.rank) + " with dominant (J=" +
                        std::to_string(ref.j) + ", M=" + std::to_string(ref.m) + ") character");
}

// Number of eigenstates per dominant (J, M) label; compare against the
// uncoupled multiplicities to detect label collisions.
inline std::map<std::pair<int, int>, int> label_census(const EigenSolution &sol) {
  std::map<std::pair<int, int>, int> out;
  for (const auto &l : sol.labels)
    ++out[{l.j, l.m}];
  return out;
}

} // namespace moltrap::hyperfine
