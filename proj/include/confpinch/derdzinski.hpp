#pragma once

// Rotationally symmetric warped products dt^2 + F(t)^2 g_{S^{n-1}} with
// constant scalar curvature R.
//
// For such a metric
//   R = -2(n-1) F''/F + (n-1)(n-2)(1 - F'^2)/F^2,
// so constant R means
//   F'' = ((n-2)(1 - F'^2)/F - R F/(n-1)) / 2,
// which has the first integral
//   F^{n-2} (1 - F'^2) - R/(n(n-1)) F^n = C.
// Writing F'^2 = V(F) = 1 - C F^{2-n} - R F^2/(n(n-1)), non-constant
// positive periodic solutions exist exactly for 0 < C < (2/n) F0^{n-2} with
// F0 = sqrt((n-1)(n-2)/R), the constant (product) solution.

#include "confpinch/tensor_core.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace confpinch {

struct WarpODE {
  int n = 4;
  double R = 6.0;  // target scalar curvature
  double C = 0.0;  // first-integral constant
};

inline void require_positive_scalar(double R) {
  if (!(R > 0.0)) throw GeometryError("scalar curvature must be positive");
}

/// Constant warping function of the product metric with scalar curvature R.
inline double static_solution(int n, double R) {
  Dim{n};
  require_positive_scalar(R);
  return std::sqrt((n - 1.0) * (n - 2.0) / R);
}

struct AdmissibleRange {
  double lo = 0.0;
  double hi = 0.0;  // C_max
};

inline AdmissibleRange admissible_range(int n, double R) {
  const double f0 = static_solution(n, R);
  return {0.0, 2.0 / n * std::pow(f0, n - 2)};
}

inline void require_periodic_orbit(const WarpODE& ode) {
  const AdmissibleRange r = admissible_range(ode.n, ode.R);
  if (!(ode.C > r.lo && ode.C < r.hi)) throw GeometryError("no periodic orbit");
}

inline double curvature_coupling(const WarpODE& ode) { return ode.R / (ode.n * (ode.n - 1.0)); }

/// V(F) = 1 - C F^{2-n} - R F^2 / (n(n-1)).
inline double potential(const WarpODE& ode, double f) {
  return 1.0 - ode.C * std::pow(f, 2 - ode.n) - curvature_coupling(ode) * f * f;
}

inline double first_integral(const WarpODE& ode, double f, double df) {
  return std::pow(f, ode.n - 2) * (1.0 - df * df) - curvature_coupling(ode) * std::pow(f, ode.n);
}

inline double warp_acceleration(const WarpODE& ode, double f, double df) {
  return 0.5 * ((ode.n - 2.0) * (1.0 - df * df) / f - ode.R * f / (ode.n - 1.0));
}

namespace detail {

/// Ascending coefficients of P(F) = F^{n-2} V(F) = F^{n-2} - C - k F^n.
inline std::vector<double> potential_polynomial(const WarpODE& ode) {
  std::vector<double> p(ode.n + 1, 0.0);
  p[0] = -ode.C;
  p[ode.n - 2] += 1.0;
  p[ode.n] = -curvature_coupling(ode);
  return p;
}

inline double horner(const std::vector<double>& p, double x) {
  double v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

inline double horner_derivative(const std::vector<double>& p, double x) {
  double v = 0.0;
  for (std::size_t k = p.size() - 1; k >= 1; --k) v = v * x + k * p[k];
  return v;
}

/// Quotient of p by (x - root), remainder dropped.
inline std::vector<double> deflate(const std::vector<double>& p, double root) {
  const std::size_t deg = p.size() - 1;
  std::vector<double> q(deg, 0.0);
  q[deg - 1] = p[deg];
  for (std::size_t k = deg - 1; k >= 1; --k) q[k - 1] = p[k] + root * q[k];
  return q;
}

/// Root of p in [lo, hi] where p(lo) and p(hi) have opposite signs.
inline double bracketed_root(const std::vector<double>& p, double lo, double hi) {
  double plo = horner(p, lo);
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = horner(p, mid);
    if (pm == 0.0) return mid;
    if ((pm < 0) == (plo < 0)) {
      lo = mid;
      plo = pm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  // Newton polish; keep the step only if it reduces the residual.
  for (int it = 0; it < 3; ++it) {
    const double d = horner_derivative(p, x);
    if (d == 0.0) break;
    const double y = x - horner(p, x) / d;
    if (std::abs(horner(p, y)) < std::abs(horner(p, x))) x = y;
    else break;
  }
  return x;
}

}  // namespace detail

struct TurningPoints {
  double f_min = 0.0;
  double f_max = 0.0;
};

inline TurningPoints turning_points(const WarpODE& ode) {
  require_periodic_orbit(ode);
  const auto p = detail::potential_polynomial(ode);
  const double f0 = static_solution(ode.n, ode.R);
  const double f_top = std::sqrt(ode.n * (ode.n - 1.0) / ode.R);  // P(f_top) = -C < 0
  return {detail::bracketed_root(p, 0.0, f0), detail::bracketed_root(p, f0, f_top)};
}

/// |V(F)| relative to the size of its terms.
inline double potential_residual(const WarpODE& ode, double f) {
  const double a = ode.C * std::pow(f, 2 - ode.n);
  const double b = curvature_coupling(ode) * f * f;
  return std::abs(potential(ode, f)) / (1.0 + a + b);
}

struct PeriodEstimate {
  double value = 0.0;
  double error = 0.0;  // |difference| between the last two node counts
  int nodes = 0;
};

/// Lambda = 2 int_{Fmin}^{Fmax} dF / sqrt(V(F)).
///
/// Substituting F = m - d cos(theta) and factoring the two simple roots out of
/// P(F) = F^{n-2} V(F) turns the integrand into the smooth periodic function
/// F^{(n-2)/2} / sqrt(Q(F)), which the midpoint rule integrates spectrally.
inline PeriodEstimate period_estimate(const WarpODE& ode) {
  const TurningPoints tp = turning_points(ode);
  const auto p = detail::potential_polynomial(ode);
  auto q = detail::deflate(detail::deflate(p, tp.f_min), tp.f_max);
  for (double& c : q) c = -c;
  const double m = 0.5 * (tp.f_min + tp.f_max);
  const double d = 0.5 * (tp.f_max - tp.f_min);
  auto midpoint = [&](int nodes) {
    const double dtheta = M_PI / nodes;
    double s = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double f = m - d * std::cos((j + 0.5) * dtheta);
      s += std::pow(f, 0.5 * (ode.n - 2)) / std::sqrt(detail::horner(q, f));
    }
    return 2.0 * s * dtheta;
  };
  PeriodEstimate est;
  int nodes = 16;
  double prev = midpoint(nodes);
  for (;;) {
    nodes *= 2;
    const double cur = midpoint(nodes);
    est = {cur, std::abs(cur - prev), nodes};
    if (est.error <= 1e-14 * cur || nodes >= (1 << 16)) break;
    prev = cur;
  }
  if (!std::isfinite(est.value)) throw GeometryError("period quadrature failed");
  return est;
}

inline double period(const WarpODE& ode) { return period_estimate(ode).value; }

/// Uniform samples of one period of a Derdzinski warping function.
struct WarpSolution {
  WarpODE ode;
  double period = 0.0;
  std::vector<double> t;   // t_j = j * period / N, j < N
  std::vector<double> f;   // F(t_j)
  std::vector<double> df;  // F'(t_j)
  double f_min = 0.0;
  double f_max = 0.0;
  double conserved_defect = 0.0;  // max |first integral - C| on the grid
  double closure_defect = 0.0;    // max(|F(period) - F(0)|, |F'(period) - F'(0)|)
  double symmetry_defect = 0.0;   // max |F(period - t) - F(t)|

  int size() const { return static_cast<int>(t.size()); }
};

struct SolveOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  double conserved_budget = 1e-9;
  double closure_budget = 1e-8;
};

inline void measure_defects(WarpSolution& s) {
  const int n = s.size();
  s.conserved_defect = 0.0;
  s.symmetry_defect = 0.0;
  for (int j = 0; j < n; ++j) {
    s.conserved_defect =
        std::max(s.conserved_defect, std::abs(first_integral(s.ode, s.f[j], s.df[j]) - s.ode.C));
    if (j > 0) s.symmetry_defect = std::max(s.symmetry_defect, std::abs(s.f[n - j] - s.f[j]));
  }
}

/// Integrates the warping ODE from (Fmin, 0) over one period and samples it on
/// `grid_n` uniform points.
inline WarpSolution solve(const WarpODE& ode, int grid_n, const SolveOptions& opt = {}) {
  if (grid_n < 64) throw GeometryError("grid must have at least 64 points");
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;

  WarpSolution s;
  s.ode = ode;
  const TurningPoints tp = turning_points(ode);
  s.f_min = tp.f_min;
  s.f_max = tp.f_max;
  s.period = period(ode);

  std::vector<double> times(grid_n + 1);
  for (int j = 0; j <= grid_n; ++j) times[j] = s.period * j / grid_n;
  times[grid_n] = s.period;

  auto rhs = [&ode](const State& y, State& dy, double) {
    dy[0] = y[1];
    dy[1] = warp_acceleration(ode, y[0], y[1]);
  };
  std::vector<State> states;
  states.reserve(grid_n + 1);
  State y{tp.f_min, 0.0};
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                         odeint::runge_kutta_fehlberg78<State>());
  odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), s.period / grid_n / 4,
                          [&](const State& st, double) { states.push_back(st); });
  if (static_cast<int>(states.size()) != grid_n + 1) throw GeometryError("integration incomplete");

  for (int j = 0; j < grid_n; ++j) {
    s.t.push_back(times[j]);
    s.f.push_back(states[j][0]);
    s.df.push_back(states[j][1]);
  }
  s.closure_defect = std::max(std::abs(states[grid_n][0] - states[0][0]),
                              std::abs(states[grid_n][1] - states[0][1]));
  measure_defects(s);
  for (double v : s.f)
    if (!(v > 0.0)) throw GeometryError("warping function is not positive");
  if (s.conserved_defect > opt.conserved_budget || s.closure_defect > opt.closure_budget) {
    std::ostringstream msg;
    msg << "integrator tolerance not met: conserved defect " << s.conserved_defect
        << ", closure defect " << s.closure_defect;
    throw GeometryError(msg.str());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Plain-text table: '#'-prefixed header with n, R, C, period, then rows "t F F'".

inline void write_table(std::ostream& os, const WarpSolution& s) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "# confpinch warp table v1\n";
  os << "# n " << s.ode.n << "\n";
  os << "# R " << s.ode.R << "\n";
  os << "# C " << s.ode.C << "\n";
  os << "# period " << s.period << "\n";
  os << "# columns t F dF\n";
  for (int j = 0; j < s.size(); ++j) os << s.t[j] << ' ' << s.f[j] << ' ' << s.df[j] << '\n';
  os.flags(flags);
  os.precision(prec);
}

inline WarpSolution read_table(std::istream& is) {
  WarpSolution s;
  bool have_n = false, have_r = false, have_c = false, have_p = false, magic = false;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "confpinch") magic = true;
      else if (key == "n") have_n = static_cast<bool>(ls >> s.ode.n);
      else if (key == "R") have_r = static_cast<bool>(ls >> s.ode.R);
      else if (key == "C") have_c = static_cast<bool>(ls >> s.ode.C);
      else if (key == "period") have_p = static_cast<bool>(ls >> s.period);
      continue;
    }
    double t = 0, f = 0, df = 0;
    if (!(ls >> t >> f >> df)) throw GeometryError("malformed warp table row: " + line);
    s.t.push_back(t);
    s.f.push_back(f);
    s.df.push_back(df);
  }
  if (!magic || !have_n || !have_r || !have_c || !have_p)
    throw GeometryError("warp table header incomplete");
  Dim{s.ode.n};
  require_positive_scalar(s.ode.R);
  if (s.size() < 4 || !(s.period > 0.0)) throw GeometryError("warp table has too few rows");
  for (double v : s.f)
    if (!(v > 0.0)) throw GeometryError("warping function is not positive");
  s.f_min = *std::min_element(s.f.begin(), s.f.end());
  s.f_max = *std::max_element(s.f.begin(), s.f.end());
  measure_defects(s);
  return s;
}

}  // namespace confpinch
