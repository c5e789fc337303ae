#pragma once

// Modified Bessel functions K0, K1 of the second kind for x > 0.
// x <= 2: Temme's series at order 0; x > 2: Steed's continued fraction.

#include <cmath>
#include <limits>
#include <numbers>

#include "eba/error.hpp"

namespace eba {

struct BesselK01 {
  double k0;
  double k1;
};

inline BesselK01 bessel_k01(double x) {
  if (!(x > 0.0)) throw ParameterError("bessel_k01 requires x > 0");
  constexpr double eps = 1e-17;
  constexpr int max_iter = 100000;
  if (x <= 2.0) {
    const double x2 = 0.5 * x;
    const double d = -std::log(x2);
    double ff = d - std::numbers::egamma;
    double sum = ff;
    double p = 0.5, q = 0.5, c = 1.0;
    const double dd = x2 * x2;
    double sum1 = p;
    for (int i = 1; i < max_iter; ++i) {
      ff = (i * ff + p + q) / (static_cast<double>(i) * i);
      c *= dd / i;
      p /= i;
      q /= i;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * eps) return {sum, sum1 * 2.0 / x};
    }
    throw NumericalError("bessel_k01: series did not converge");
  }
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < max_iter; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) {
      h *= a1;
      const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
      return {k0, k0 * (x + 0.5 - h) / x};
    }
  }
  throw NumericalError("bessel_k01: continued fraction did not converge");
}

inline double bessel_k1(double x) { return bessel_k01(x).k1; }
inline double bessel_k0(double x) { return bessel_k01(x).k0; }

}  // namespace eba
