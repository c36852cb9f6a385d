#pragma once

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace nozzle_lf {

/// Fixed-order Gauss-Legendre rule on [a, b] for any result type with + and scalar *.
template <unsigned N, class F, class T>
T gauss_legendre(const F& f, double a, double b, T zero) {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  T acc = zero;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0) {
      acc = acc + ws[i] * f(mid);
    } else {
      acc = acc + ws[i] * f(mid - half * xs[i]);
      acc = acc + ws[i] * f(mid + half * xs[i]);
    }
  }
  return half * acc;
}

/// Pair of accumulated moments (e.g. mass and momentum).
struct Moments {
  double first = 0.0;
  double second = 0.0;
};

inline Moments operator+(const Moments& a, const Moments& b) { return {a.first + b.first, a.second + b.second}; }
inline Moments operator*(double s, const Moments& a) { return {s * a.first, s * a.second}; }

}  // namespace nozzle_lf
