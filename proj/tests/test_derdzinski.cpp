#include "confpinch/derdzinski.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

using namespace confpinch;

namespace {

// Classical RK4 on F'' = (1/2)[(n-2)(1-F'^2)/F - R F/(n-1)], from (Fmin, 0) to the
// first sign change of F' (at Fmax); the half period is refined with a Newton step.
double rk4_period(int n, double R, double C, double h) {
  auto acc = [&](double f, double df) { return 0.5 * ((n - 2.0) * (1.0 - df * df) / f - R * f / (n - 1.0)); };
  auto step = [&](std::array<double, 2> y, double dt) {
    auto rhs = [&](const std::array<double, 2>& s) { return std::array<double, 2>{s[1], acc(s[0], s[1])}; };
    const auto k1 = rhs(y);
    const auto k2 = rhs({y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]});
    const auto k3 = rhs({y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]});
    const auto k4 = rhs({y[0] + dt * k3[0], y[1] + dt * k3[1]});
    return std::array<double, 2>{y[0] + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                                 y[1] + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  };
  // Fmin by bisection on V(F) = 1 - C F^{2-n} - R F^2/(n(n-1)) below the static solution.
  const double f0 = std::sqrt((n - 1.0) * (n - 2.0) / R);
  double lo = 1e-12, hi = f0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - C * std::pow(mid, 2 - n) - R * mid * mid / (n * (n - 1.0)) < 0 ? lo : hi) = mid;
  }
  std::array<double, 2> y{0.5 * (lo + hi), 0.0};
  double t = 0.0;
  // leave the turning point, where F' = 0
  y = step(y, h);
  t += h;
  for (;;) {
    const auto next = step(y, h);
    if (next[1] <= 0.0) {
      double dt = 0.0;
      auto z = y;
      for (int it = 0; it < 4; ++it) {
        dt -= z[1] / acc(z[0], z[1]);
        z = step(y, dt);
      }
      return 2.0 * (t + dt);
    }
    y = next;
    t += h;
  }
}

}  // namespace

TEST(StaticSolution, Examples) {
  EXPECT_NEAR(static_solution(3, 6.0), 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(static_solution(4, 6.0), 1.0, 1e-15);
  EXPECT_NEAR(static_solution(10, 72.0), 1.0, 1e-15);
  EXPECT_THROW(static_solution(4, 0.0), GeometryError);
  EXPECT_THROW(static_solution(4, -1.0), GeometryError);
}

TEST(AdmissibleRange, Examples) {
  EXPECT_NEAR(admissible_range(3, 6.0).hi, 2.0 / 3.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(admissible_range(4, 6.0).hi, 0.5, 1e-15);
  EXPECT_EQ(admissible_range(4, 6.0).lo, 0.0);
  EXPECT_THROW(admissible_range(4, -2.0), GeometryError);
}

TEST(TurningPoints, ClosedFormNFour) {
  // n = 4, R = 6: V = 0  <=>  F^4/2 - F^2 + C = 0
  for (double C : {0.1, 0.25, 0.4, 0.45, 0.499}) {
    const TurningPoints tp = turning_points({4, 6.0, C});
    const double d = std::sqrt(1.0 - 2.0 * C);
    EXPECT_NEAR(tp.f_min, std::sqrt(1.0 - d), 1e-12);
    EXPECT_NEAR(tp.f_max, std::sqrt(1.0 + d), 1e-12);
    EXPECT_LE(potential_residual({4, 6.0, C}, tp.f_min), 1e-12);
  }
}

TEST(TurningPoints, NThree) {
  const WarpODE ode{3, 6.0, 0.3};
  const TurningPoints tp = turning_points(ode);
  EXPECT_LT(tp.f_min, static_solution(3, 6.0));
  EXPECT_GT(tp.f_max, static_solution(3, 6.0));
  EXPECT_LE(std::abs(potential(ode, tp.f_min)), 1e-12);
  EXPECT_LE(std::abs(potential(ode, tp.f_max)), 1e-12);
}

TEST(TurningPoints, Limits) {
  const double cmax = admissible_range(5, 12.0).hi;
  const TurningPoints near_top = turning_points({5, 12.0, cmax * (1 - 1e-8)});
  EXPECT_NEAR(near_top.f_min, static_solution(5, 12.0), 1e-3);
  EXPECT_NEAR(near_top.f_max, static_solution(5, 12.0), 1e-3);
  const TurningPoints near_zero = turning_points({5, 12.0, 1e-9});
  EXPECT_LT(near_zero.f_min, 1e-2);
  EXPECT_NEAR(near_zero.f_max, std::sqrt(20.0 / 12.0), 1e-6);
}

TEST(TurningPoints, NoPeriodicOrbit) {
  for (double C : {0.5, 0.6, 0.0, -0.1}) {
    try {
      turning_points({4, 6.0, C});
      FAIL() << C;
    } catch (const GeometryError& e) {
      EXPECT_STREQ(e.what(), "no periodic orbit");
    }
  }
  EXPECT_THROW(solve({4, 6.0, 0.5}, 128), GeometryError);
  EXPECT_THROW(period({3, 6.0, 1.0}), GeometryError);
}

TEST(Period, MatchesIndependentIntegration) {
  const double quad = period({4, 6.0, 0.45});
  const double ode = rk4_period(4, 6.0, 0.45, 1e-4);
  EXPECT_NEAR(quad, ode, 1e-7 * quad);
  for (int n = 3; n <= 5; ++n) {
    const double R = 1.5 * (n - 1.0) * (n - 2.0);
    const double C = 0.3 * admissible_range(n, R).hi;
    const double q = period({n, R, C});
    EXPECT_NEAR(q, rk4_period(n, R, C, 1e-4), 1e-7 * q) << n;
  }
}

TEST(Period, HarmonicLimit) {
  for (int n = 3; n <= 6; ++n) {
    const double R = 5.0;
    const double f0 = static_solution(n, R);
    const double C = 0.999 * admissible_range(n, R).hi;
    // V''(F0) for V = 1 - C F^{2-n} - k F^2
    const double k = R / (n * (n - 1.0));
    const double v2 = -C * (2.0 - n) * (1.0 - n) * std::pow(f0, -n) - 2.0 * k;
    const double omega = std::sqrt(0.5 * std::abs(v2));
    EXPECT_NEAR(period({n, R, C}), 2.0 * M_PI / omega, 0.01 * 2.0 * M_PI / omega) << n;
  }
}

TEST(Period, DoublingConverges) {
  const PeriodEstimate e = period_estimate({5, 12.0, 0.2 * admissible_range(5, 12.0).hi});
  EXPECT_LE(e.error, 1e-8 * e.value);
}

TEST(Solve, DefectsAndExtremes) {
  const WarpODE ode{4, 6.0, 0.45};
  const WarpSolution s = solve(ode, 512);
  EXPECT_EQ(s.size(), 512);
  EXPECT_LE(s.conserved_defect, 1e-9);
  EXPECT_LE(s.closure_defect, 1e-8);
  const TurningPoints tp = turning_points(ode);
  double lo = 1e9, hi = 0.0, worst = 0.0;
  for (int j = 0; j < s.size(); ++j) {
    lo = std::min(lo, s.f[j]);
    hi = std::max(hi, s.f[j]);
    worst = std::max(worst, std::abs(first_integral(ode, s.f[j], s.df[j]) - ode.C));
  }
  EXPECT_NEAR(lo, tp.f_min, 1e-8);
  EXPECT_NEAR(hi, tp.f_max, 1e-8);  // even grid hits t = period/2
  EXPECT_LE(worst, 1e-9);
}

TEST(Solve, FirstIntegralIsConservedByTheOde) {
  // d/dt of the first integral along the flow vanishes: check with the acceleration.
  const WarpODE ode{5, 7.0, 0.2};
  for (double f : {0.8, 1.0, 1.3})
    for (double df : {-0.3, 0.0, 0.4}) {
      const double dd = warp_acceleration(ode, f, df);
      const double dI = (ode.n - 2.0) * std::pow(f, ode.n - 3) * df * (1 - df * df) -
                        std::pow(f, ode.n - 2) * 2 * df * dd -
                        ode.R / (ode.n * (ode.n - 1.0)) * ode.n * std::pow(f, ode.n - 1) * df;
      EXPECT_NEAR(dI, 0.0, 1e-13);
    }
}

TEST(Solve, RejectsSmallGrid) { EXPECT_THROW(solve({4, 6.0, 0.3}, 32), GeometryError); }

TEST(Table, RoundTrip) {
  const WarpSolution s = solve({3, 2.0, 0.2}, 128);
  std::stringstream ss;
  write_table(ss, s);
  const WarpSolution r = read_table(ss);
  EXPECT_EQ(r.ode.n, 3);
  EXPECT_EQ(r.ode.R, 2.0);
  EXPECT_EQ(r.ode.C, 0.2);
  EXPECT_EQ(r.period, s.period);
  ASSERT_EQ(r.size(), s.size());
  for (int j = 0; j < s.size(); ++j) {
    EXPECT_EQ(r.t[j], s.t[j]);
    EXPECT_EQ(r.f[j], s.f[j]);
    EXPECT_EQ(r.df[j], s.df[j]);
  }
  EXPECT_NEAR(r.conserved_defect, s.conserved_defect, 1e-15);
}

TEST(Table, MalformedInput) {
  std::stringstream missing("# confpinch warp table v1\n# n 4\n0 1 0\n");
  EXPECT_THROW(read_table(missing), GeometryError);
  std::stringstream bad("# confpinch warp table v1\n# n 4\n# R 6\n# C 0.4\n# period 4\n0 x 0\n");
  EXPECT_THROW(read_table(bad), GeometryError);
}
