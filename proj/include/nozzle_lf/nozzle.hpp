#pragma once

// Nozzle geometry, the bound function b(x) with its cumulative integral, the
// admissibility constants and the invariant envelope, plus the in-cell steady
// profiles and their first-order time correction.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators::detail {
using std::isnan;
}
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "gas.hpp"

namespace nozzle_lf {

// ---------------------------------------------------------------------------
// Geometry

/// Cross-section A(x) > 0 together with a(x) = -A'(x)/A(x). A is constant for |x| > X.
class NozzleGeometry {
public:
  using Fn = std::function<double(double)>;

  NozzleGeometry(std::string family, Fn area, Fn coefficient, double cutoff)
      : family_(std::move(family)), area_(std::move(area)), coefficient_(std::move(coefficient)), cutoff_(cutoff) {
    if (!(cutoff_ >= 0.0)) throw DomainError("geometry cutoff radius must be nonnegative");
  }

  double area(double x) const { return area_(x); }
  double a(double x) const { return std::abs(x) >= cutoff_ ? 0.0 : coefficient_(x); }
  double cutoff() const { return cutoff_; }
  const std::string& family() const { return family_; }
  bool straight() const { return family_ == "constant"; }

private:
  std::string family_;
  Fn area_;
  Fn coefficient_;
  double cutoff_;
};

namespace detail {

/// C-infinity bump with s(0) = 1 and support (-X, X).
inline double bump(double x, double X) {
  const double r = x / X;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

inline double bump_derivative(double x, double X) {
  const double r = x / X;
  if (std::abs(r) >= 1.0) return 0.0;
  const double d = 1.0 - r * r;
  return -bump(x, X) * 2.0 * x / (X * X * d * d);
}

}  // namespace detail

inline NozzleGeometry constant_geometry(double area = 1.0, double cutoff = 1.0) {
  if (!(area > 0.0)) throw DomainError("area must be positive");
  return {"constant", [area](double) { return area; }, [](double) { return 0.0; }, cutoff};
}

/// A(x) = A0 exp(-eps s(x)) with s the compact bump of radius X; a(x) = eps s'(x).
inline NozzleGeometry bump_geometry(double area0, double eps, double cutoff) {
  if (!(area0 > 0.0) || !(cutoff > 0.0)) throw DomainError("bump geometry needs positive area and radius");
  return {"bump",
          [=](double x) { return area0 * std::exp(-eps * detail::bump(x, cutoff)); },
          [=](double x) { return eps * detail::bump_derivative(x, cutoff); }, cutoff};
}

/// Smoothed converging-diverging duct A(x) = A0 (1 - kappa s(x)), 0 <= kappa < 1.
inline NozzleGeometry laval_geometry(double area0, double kappa, double cutoff) {
  if (!(area0 > 0.0) || !(cutoff > 0.0)) throw DomainError("laval geometry needs positive area and radius");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw DomainError("laval geometry needs 0 <= kappa < 1");
  return {"laval",
          [=](double x) { return area0 * (1.0 - kappa * detail::bump(x, cutoff)); },
          [=](double x) {
            return kappa * detail::bump_derivative(x, cutoff) / (1.0 - kappa * detail::bump(x, cutoff));
          },
          cutoff};
}

/// Tabulated cross-section with monotone cubic interpolation; constant outside the table.
inline NozzleGeometry table_geometry(std::vector<double> xs, std::vector<double> areas) {
  if (xs.size() < 4 || xs.size() != areas.size()) throw DomainError("geometry table needs at least 4 (x, A) rows");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw DomainError("geometry table x column must be strictly increasing");
  for (double A : areas)
    if (!(A > 0.0)) throw DomainError("geometry table areas must be positive");
  const double x0 = xs.front();
  const double x1 = xs.back();
  const double a0 = areas.front();
  const double a1 = areas.back();
  const double cutoff = std::max(std::abs(x0), std::abs(x1));
  auto interp = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs), std::move(areas));
  return {"table",
          [=](double x) { return x <= x0 ? a0 : (x >= x1 ? a1 : (*interp)(x)); },
          [=](double x) { return (x <= x0 || x >= x1) ? 0.0 : -interp->prime(x) / (*interp)(x); }, cutoff};
}

/// Reads a two-column (x, A) text table; a non-numeric first line is taken as a header.
inline NozzleGeometry read_geometry_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("geometry.table", "cannot open " + path);
  std::vector<double> xs, as;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream ls(line);
    double x, A;
    if (!(ls >> x >> A)) {
      const bool blank = line.find_first_not_of(" \r") == std::string::npos;
      if (blank || line[line.find_first_not_of(' ')] == '#' || first) {
        first = false;
        continue;
      }
      throw ConfigError("geometry.table", "malformed row: " + line);
    }
    first = false;
    xs.push_back(x);
    as.push_back(A);
  }
  return table_geometry(std::move(xs), std::move(as));
}

// ---------------------------------------------------------------------------
// Bound function

/// Nonnegative b(x) supported on [lo, hi] with a cached cumulative integral B(x) = int_0^x b.
/// B is composite Simpson on a uniform grid through lo and hi; between grid nodes a single
/// Simpson panel is added, which is exact when b is cubic there.
class BoundFunction {
public:
  using Fn = std::function<double(double)>;

  BoundFunction() = default;

  BoundFunction(Fn b, double lo, double hi, double spacing) : b_(std::move(b)), lo_(lo), hi_(hi) {
    if (!b_ || !(hi > lo)) {
      b_ = nullptr;
      return;
    }
    if (!(spacing > 0.0)) throw DomainError("bound function grid spacing must be positive");
    const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / spacing - 1e-9));
    n_ = std::max<std::size_t>(cells, 1);
    h_ = (hi - lo) / static_cast<double>(n_);
    cumulative_.assign(n_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double x0 = node(i);
      cumulative_[i + 1] = cumulative_[i] + panel(x0, x0 + h_);
    }
    offset_ = raw_cumulative(0.0);
  }

  /// b == 0 everywhere.
  static BoundFunction zero() { return {}; }

  /// b == value on [lo, hi], zero elsewhere.
  static BoundFunction constant(double value, double lo, double hi, double spacing) {
    return {[value](double) { return value; }, lo, hi, spacing};
  }

  bool is_zero() const { return !b_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double operator()(double x) const {
    if (!b_ || x < lo_ || x > hi_) return 0.0;
    return b_(x);
  }

  /// B(x) = int_0^x b(y) dy.
  double cumulative(double x) const { return b_ ? raw_cumulative(x) - offset_ : 0.0; }

  /// int_x0^x1 b(y) dy.
  double integral(double x0, double x1) const { return cumulative(x1) - cumulative(x0); }

  /// int_0^inf b.
  double integral_plus() const { return b_ ? cumulative_.back() - offset_ : 0.0; }
  /// int_-inf^0 b.
  double integral_minus() const { return b_ ? offset_ : 0.0; }
  double max_integral() const { return std::max(integral_plus(), integral_minus()); }

  /// b scaled by a constant factor (same support and grid).
  BoundFunction scaled(double factor) const {
    if (!b_) return {};
    auto f = b_;
    return {[f, factor](double x) { return factor * f(x); }, lo_, hi_, h_};
  }

private:
  double node(std::size_t i) const { return i == n_ ? hi_ : lo_ + static_cast<double>(i) * h_; }

  double panel(double x0, double x1) const {
    return (x1 - x0) / 6.0 * ((*this)(x0) + 4.0 * (*this)(0.5 * (x0 + x1)) + (*this)(x1));
  }

  double raw_cumulative(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return cumulative_.back();
    auto i = static_cast<std::size_t>((x - lo_) / h_);
    i = std::min(i, n_ - 1);
    const double x0 = node(i);
    return cumulative_[i] + panel(x0, x);
  }

  Fn b_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double h_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> cumulative_;
  double offset_ = 0.0;
};

// ---------------------------------------------------------------------------
// Admissibility

struct AdmissibilityConstants {
  double mu = 0.0;
  double sigma = 0.0;

  /// Half of log(1/sigma), the budget for each one-sided integral of b.
  double budget() const { return 0.5 * std::log(1.0 / sigma); }
};

inline AdmissibilityConstants admissibility_constants(const GasConstants& c) {
  const double th = c.theta;
  if (!(th > 0.0 && th < 1.0)) throw DomainError("admissibility constants need 0 < theta < 1");
  const double s = std::sqrt(th);
  AdmissibilityConstants k;
  k.mu = (1.0 - th) * (1.0 - th) / (th * (1.0 + th - 2.0 * s));
  k.sigma = (1.0 - th) / ((1.0 - s) * (2.0 * std::sqrt(th + 1.0) + s - 1.0));
  if (!(k.sigma > 0.0 && k.sigma < 1.0)) throw DomainError("admissibility constant sigma outside (0, 1)");
  return k;
}

/// Default bound function: (1 + margin) / mu times the running maximum of |a| over a window of
/// radius 2 width, mollified over `width`, sampled every width/4 and interpolated monotonically.
/// Taking the running maximum first keeps |a| <= mu b pointwise after smoothing and interpolation.
inline BoundFunction auto_bound(const NozzleGeometry& geom, const AdmissibilityConstants& k, double width,
                                double margin = 0.05) {
  if (geom.straight() || geom.cutoff() == 0.0) return BoundFunction::zero();
  if (!(width > 0.0)) throw DomainError("mollification width must be positive");
  const double lo = -geom.cutoff() - 3.0 * width;
  const double hi = geom.cutoff() + 3.0 * width;
  const double step = width / 4.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  const double h = (hi - lo) / static_cast<double>(n);
  // Normalized kernel exp(-1/(1-y^2)) on [-1, 1].
  auto kernel = [](double y) { return std::abs(y) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - y * y)); };
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  const double norm = Gauss::integrate(kernel, -1.0, 1.0);
  std::vector<double> xs(n + 1), bs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    xs[i] = x;
    auto running_max = [&](double y0) {
      constexpr int probes = 64;
      double m = 0.0;
      for (int p = 0; p <= probes; ++p) m = std::max(m, std::abs(geom.a(y0 + width * (4.0 * p / probes - 2.0))));
      return m;
    };
    const double avg = Gauss::integrate([&](double y) { return kernel(y) * running_max(x + width * y); }, -1.0, 1.0) / norm;
    bs[i] = (1.0 + margin) * avg / k.mu;
  }
  bs.front() = 0.0;
  bs.back() = 0.0;
  auto interp = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs), std::move(bs));
  return {[interp](double x) { return std::max(0.0, (*interp)(x)); }, lo, hi, h};
}

struct ValidationReport {
  double mu = 0.0;
  double sigma = 0.0;
  double budget = 0.0;
  double integral_plus = 0.0;
  double integral_minus = 0.0;
  /// max over the check grid of |a(x)| - mu b(x); must be <= 0.
  double max_pointwise_margin = 0.0;
  double worst_x = 0.0;
  /// max(I+, I-) - budget when positive, else 0.
  double integral_excess = 0.0;
  bool pointwise_ok = true;
  bool integral_ok = true;
  bool pass() const { return pointwise_ok && integral_ok; }
};

/// Checks |a| <= mu b on a dense grid and the one-sided integral budget.
inline ValidationReport validate_condition(const NozzleGeometry& geom, const BoundFunction& b,
                                           const AdmissibilityConstants& k, double spacing = 1e-3) {
  ValidationReport r;
  r.mu = k.mu;
  r.sigma = k.sigma;
  r.budget = k.budget();
  r.integral_plus = b.integral_plus();
  r.integral_minus = b.integral_minus();
  const double ext = std::max(geom.cutoff(), std::max(std::abs(b.lo()), std::abs(b.hi()))) + 1.0;
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * ext / spacing));
  r.max_pointwise_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = -ext + 2.0 * ext * static_cast<double>(i) / static_cast<double>(n);
    const double margin = std::abs(geom.a(x)) - k.mu * b(x);
    if (margin > r.max_pointwise_margin) {
      r.max_pointwise_margin = margin;
      r.worst_x = x;
    }
  }
  r.pointwise_ok = r.max_pointwise_margin <= 1e-12;
  const double worst = std::max(r.integral_plus, r.integral_minus);
  r.integral_excess = std::max(0.0, worst - r.budget);
  r.integral_ok = worst <= r.budget;
  return r;
}

// ---------------------------------------------------------------------------
// Envelope

/// lower(x) = -M e^{-B(x)}, upper(x) = M e^{B(x)}.
class InvariantEnvelope {
public:
  InvariantEnvelope(double M, const BoundFunction& b) : M_(M), b_(&b) {
    if (!(M >= 0.0)) throw DomainError("envelope bound M must be nonnegative");
  }
  double M() const { return M_; }
  double lower(double x) const { return -M_ * std::exp(-b_->cumulative(x)); }
  double upper(double x) const { return M_ * std::exp(b_->cumulative(x)); }

private:
  double M_;
  const BoundFunction* b_;
};

struct EnvelopeBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline EnvelopeBounds envelope(double M, const BoundFunction& b, double x) {
  const InvariantEnvelope e(M, b);
  return {e.lower(x), e.upper(x)};
}

/// Smallest M with -M e^{-B} <= z and w <= M e^{B} at the given samples.
inline double minimal_bound(const std::vector<double>& xs, const std::vector<GasState>& us, const BoundFunction& b,
                            const GasConstants& c) {
  double M = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = to_invariants(us[i], c);
    const double B = b.cumulative(xs[i]);
    M = std::max({M, -p.z * std::exp(B), p.w * std::exp(-B)});
  }
  return M;
}

// ---------------------------------------------------------------------------
// Steady profiles and time correction

/// z(x) = z_d exp(z_exp (B(x) - B(x_d))), w(x) = w_d exp(w_exp (B(x) - B(x_d))).
/// The interior profile uses (z_exp, w_exp) = (-1, +1); the near-vacuum profile
/// scales both invariants down, (-1, -1), and its mirror image is (+1, +1).
struct ProfileData {
  double x_anchor = 0.0;
  InvariantPair anchor;
  int z_exp = -1;
  int w_exp = 1;

  friend bool operator==(const ProfileData&, const ProfileData&) = default;
};

inline InvariantPair profile_invariants(const ProfileData& p, double x, const BoundFunction& b) {
  if (b.is_zero() || x == p.x_anchor) return p.anchor;
  const double dB = b.integral(p.x_anchor, x);
  return {p.anchor.z * std::exp(p.z_exp * dB), p.anchor.w * std::exp(p.w_exp * dB)};
}

/// Callable steady-state profile anchored at (x_d, u_d).
class SteadyProfile {
public:
  SteadyProfile(ProfileData data, const BoundFunction& b, const GasConstants& c) : data_(data), b_(&b), c_(c) {}
  InvariantPair invariants(double x) const { return profile_invariants(data_, x, *b_); }
  GasState operator()(double x) const { return from_invariants(invariants(x), c_); }
  const ProfileData& data() const { return data_; }

private:
  ProfileData data_;
  const BoundFunction* b_;
  GasConstants c_;
};

inline SteadyProfile steady_profile(double x_d, const GasState& u_d, const BoundFunction& b, const GasConstants& c) {
  const auto p = to_invariants(u_d, c);
  if (p.w < p.z) throw DomainError("steady_profile: w < z");
  return {ProfileData{x_d, p, -1, 1}, b, c};
}

struct CorrectedState {
  InvariantPair p;
  GasState u;
  bool clamped = false;
};

/// Profile value at x advanced by t_offset along the characteristics:
///   z = zb - (a vb rb^theta + z_exp b lambda1 zb) t,   w = wb + (a vb rb^theta - w_exp b lambda2 wb) t.
/// For the interior profile this is the usual "- b lambda_2 w" form; the near-vacuum
/// profile (w_exp = -1) gives "+ b lambda_2 w". A crossing w < z is clamped to vacuum.
inline CorrectedState time_correct_invariants(const InvariantPair& bar, double ax, double bx, int z_exp, int w_exp,
                                              double t_offset, const GasConstants& c) {
  CorrectedState out;
  if (t_offset == 0.0 || (ax == 0.0 && bx == 0.0)) {
    out.p = bar;
  } else {
    const double v = 0.5 * (bar.w + bar.z);
    const double s = 0.5 * c.theta * (bar.w - bar.z);  // rho^theta
    const double l1 = v - s;
    const double l2 = v + s;
    const double avs = ax * v * s;
    out.p.z = bar.z - (avs + z_exp * bx * l1 * bar.z) * t_offset;
    out.p.w = bar.w + (avs - w_exp * bx * l2 * bar.w) * t_offset;
  }
  if (out.p.w < out.p.z) {
    const double mid = 0.5 * (out.p.w + out.p.z);
    out.p = {mid, mid};
    out.clamped = true;
  }
  out.u = from_invariants(out.p, c);
  return out;
}

inline CorrectedState time_correct(const ProfileData& prof, double x, double t_offset, const NozzleGeometry& geom,
                                   const BoundFunction& b, const GasConstants& c) {
  return time_correct_invariants(profile_invariants(prof, x, b), geom.a(x), b(x), prof.z_exp, prof.w_exp, t_offset, c);
}

}  // namespace nozzle_lf
