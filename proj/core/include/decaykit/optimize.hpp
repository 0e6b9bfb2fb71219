#pragma once

#include <cmath>
#include <utility>

#include "decaykit/error.hpp"

namespace decaykit {

// Brent's method for a 1-D maximum on [lo, hi] (localmin on -f: golden
// section with parabolic acceleration). Returns (argmax, f(argmax)).
// xtol is an absolute tolerance on the argument.
template <typename F>
std::pair<double, double> brent_maximize(F&& f, double lo, double hi, double xtol = 1e-7,
                                         int max_iter = 200) {
  require(lo < hi, "brent_maximize: empty interval");
  require(xtol > 0.0, "brent_maximize: tolerance must be positive");
  constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
  const double eps_sqrt = std::sqrt(2.220446049250313e-16);

  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = -f(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = eps_sqrt * std::fabs(x) + xtol;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - mid) <= tol2 - 0.5 * (b - a)) break;

    bool use_golden = true;
    if (std::fabs(e) > tol1) {
      // parabola through x, v, w
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double e_prev = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u_try = x + d;
        if (u_try - a < tol2 || b - u_try < tol2) d = (mid > x) ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x >= mid) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = -f(u);
    if (fu <= fx) {
      if (u >= x) {
        a = x;
      } else {
        b = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, -fx};
}

}  // namespace decaykit
