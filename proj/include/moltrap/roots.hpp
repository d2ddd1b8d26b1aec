#pragma once

#include "moltrap/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace moltrap::roots {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  double lo = 0.0; // final bracket
  double hi = 0.0;
  int iterations = 0;
};

struct BrentOptions {
  double xtol = 1e-12; // absolute bracket width
  double ftol = 0.0;   // stop once |f| <= ftol
  int max_iterations = 200;
};

inline std::string describe_endpoints(double a, double fa, double b, double fb) {
  std::ostringstream os;
  os.precision(12);
  os << "f(" << a << ") = " << fa << ", f(" << b << ") = " << fb;
  return os.str();
}

// Brent's method: inverse quadratic / secant steps safeguarded by bisection.
template <class F>
RootResult brent(F &&f, double a, double b, BrentOptions opt = {}) {
  if (!(a < b))
    throw InvalidArgument("brent: bracket must satisfy lo < hi");
  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw NumericalError("brent: non-finite endpoint value, " + describe_endpoints(a, fa, b, fb));
  if (fa == 0.0)
    return {a, fa, a, a, 0};
  if (fb == 0.0)
    return {b, fb, b, b, 0};
  if ((fa > 0.0) == (fb > 0.0))
    throw NoRootError("no sign change over [" + std::to_string(a) + ", " + std::to_string(b) +
                      "]: " + describe_endpoints(a, fa, b, fb));

  double c = a, fc = fa, d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * eps * std::abs(b) + 0.5 * opt.xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0 || std::abs(fb) <= opt.ftol)
      return {b, fb, std::min(b, c), std::max(b, c), it};
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0)
        q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw NumericalError("brent: no convergence within " + std::to_string(opt.max_iterations) +
                       " iterations");
}

// A sign change of f between two scan points: either a root or a pole.
struct SignChange {
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  bool pole = false;
};

// Evaluates f on `points` equally spaced abscissae and classifies every sign
// change by bisection: |f| shrinking towards the crossing marks a root,
// |f| growing (or a PoleError from f) marks a pole.
template <class F>
std::vector<SignChange> scan_sign_changes(F &&f, double lo, double hi, int points = 512) {
  if (!(lo < hi) || points < 2)
    throw InvalidArgument("scan_sign_changes: need lo < hi and at least two points");
  std::vector<double> x(static_cast<std::size_t>(points));
  std::vector<double> y(x.size(), std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < points; ++i) {
    x[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    try {
      y[static_cast<std::size_t>(i)] = f(x[static_cast<std::size_t>(i)]);
    } catch (const PoleError &) {
    }
  }
  std::vector<SignChange> out;
  std::size_t prev = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(y[i])) {
      // A point inside a pole guard is itself a pole witness.
      if (prev < x.size()) {
        out.push_back({x[prev], x[i], y[prev], y[i], true});
        prev = x.size();
      }
      continue;
    }
    if (prev < x.size() && ((y[prev] > 0.0) != (y[i] > 0.0) || y[i] == 0.0)) {
      SignChange sc{x[prev], x[i], y[prev], y[i], false};
      double a = sc.lo, b = sc.hi, fa = sc.f_lo;
      const double start = std::min(std::abs(sc.f_lo), std::abs(sc.f_hi));
      double last = start;
      bool pole = false;
      for (int k = 0; k < 60 && b - a > 0.0; ++k) {
        const double mid = 0.5 * (a + b);
        double fm;
        try {
          fm = f(mid);
        } catch (const PoleError &) {
          pole = true;
          break;
        }
        if (fm == 0.0) {
          last = 0.0;
          break;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
        last = std::abs(fm);
      }
      sc.pole = pole || last > start;
      out.push_back(sc);
    }
    prev = i;
  }
  return out;
}

} // namespace moltrap::roots
