#include "confpinch/tensor_core.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace confpinch;

namespace {

Sym2 random_metric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 0.15);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = N(rng);
      m(i, j) += v;
      if (i != j) m(j, i) += v;
    }
  return Sym2::from_matrix(m);
}

Sym2 random_trace_free(const Sym2& g, std::mt19937_64& rng) {
  const int n = g.dim();
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = N(rng);
  const Sym2 t = Sym2::from_matrix(m);
  const double tr = (g.matrix().inverse() * m).trace();
  return t - (tr / n) * g;
}

// Brute-force contractions, written independently of the library.
double q_direct_oracle(const Sym2& g, const Curv4& r, const Sym2& ric, const Sym2& e) {
  const int n = g.dim();
  const Eigen::MatrixXd gi = g.matrix().inverse();
  const Eigen::MatrixXd eu = gi * e.matrix() * gi;  // E^{ij}
  double a = 0.0, b = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) a += r(i, k, j, l) * eu(i, j) * eu(k, l);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m) b += ric(j, k) * eu(i, j) * e(i, m) * gi(m, k);
  return -a + b;
}

double eig_gap_oracle(const Eigen::VectorXd& ev) {
  const int n = ev.size();
  double c = 0.0, s = 0.0;
  for (int i = 0; i < n; ++i) {
    c += ev(i) * ev(i) * ev(i);
    s += ev(i) * ev(i);
  }
  return c + (n - 2.0) / std::sqrt(n * (n - 1.0)) * std::pow(s, 1.5);
}

}  // namespace

TEST(Trace, Examples) {
  EXPECT_DOUBLE_EQ(trace(Sym2::identity(3), Sym2::identity(3)), 3.0);
  EXPECT_NEAR(trace(Sym2::identity(4), Sym2::diagonal({1, 1, 1, -3})), 0.0, 1e-15);
  const Sym2 g = Sym2::diagonal({4, 1, 1});
  EXPECT_NEAR(trace(g, g), 3.0, 1e-15);
}

TEST(Trace, DegenerateMetric) {
  EXPECT_THROW(
      {
        try {
          trace(Sym2::diagonal({1, 0, 1}), Sym2::identity(3));
        } catch (const GeometryError& e) {
          EXPECT_STREQ(e.what(), "degenerate metric");
          throw;
        }
      },
      GeometryError);
  EXPECT_THROW(inverse_metric(Sym2::diagonal({1, -1, 1})), GeometryError);
}

TEST(Dim, RejectsSmall) {
  EXPECT_THROW(Dim{2}, GeometryError);
  EXPECT_EQ(Dim{3}.value(), 3);
}

TEST(Sym2, FromMatrixRejectsAsymmetry) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 0.5;
  EXPECT_THROW(Sym2::from_matrix(m), GeometryError);
  EXPECT_THROW(Sym2::from_matrix(Eigen::MatrixXd::Zero(2, 3)), GeometryError);
}

TEST(ScalarQuantities, NormMatchesContraction) {
  std::mt19937_64 rng(3);
  for (int n = 3; n <= 6; ++n) {
    const Sym2 g = random_metric(n, rng);
    const Sym2 e = random_trace_free(g, rng);
    const ScalarQuantities q = scalar_quantities(g, e, 2.5);
    const Eigen::MatrixXd gi = g.matrix().inverse();
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += gi(i, k) * gi(j, l) * e(i, j) * e(k, l);
    EXPECT_GE(q.norm_e, 0.0);
    EXPECT_NEAR(q.norm_e * q.norm_e, s, 1e-12 * s);
    EXPECT_EQ(q.scalar, 2.5);
  }
}

TEST(TraceFreePart, Examples) {
  for (int n = 3; n <= 6; ++n) {
    const Sym2 g = Sym2::identity(n);
    EXPECT_LE(trace_free_part(g, (n - 1.0) * g, n * (n - 1.0)).max_abs(), 1e-14);
  }
  const Sym2 e = trace_free_part(Sym2::identity(4), Sym2::diagonal({2, 2, 2, 0}), 6.0);
  EXPECT_LE((e - Sym2::diagonal({0.5, 0.5, 0.5, -1.5})).max_abs(), 1e-15);
  EXPECT_EQ(trace_free_part(Sym2::identity(3), Sym2(3), 0.0).max_abs(), 0.0);
}

TEST(TraceFreePart, TraceMismatch) {
  try {
    trace_free_part(Sym2::identity(4), Sym2::diagonal({2, 2, 2, 0}), 7.0);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_STREQ(e.what(), "trace mismatch");
  }
}

TEST(TraceFreePart, ResultIsTraceFree) {
  std::mt19937_64 rng(5);
  for (int n = 3; n <= 6; ++n) {
    const Sym2 g = random_metric(n, rng);
    const Sym2 ric = random_trace_free(g, rng) + 1.7 * g;
    const Sym2 e = trace_free_part(g, ric, trace(g, ric));
    EXPECT_LE(std::abs(trace(g, e)), 1e-12);
  }
}

TEST(Okumura, Examples) {
  const Sym2 g = Sym2::identity(3);
  EXPECT_EQ(okumura_gap(g, Sym2(3)), 0.0);
  EXPECT_NEAR(okumura_gap(g, Sym2::diagonal({1, 1, -2})), 0.0, 1e-12);
  EXPECT_NEAR(okumura_gap(g, Sym2::diagonal({2, -1, -1})), 12.0, 1e-12);
  EXPECT_NEAR(cubic(g, Sym2::diagonal({1, 1, -2})), -6.0, 1e-14);
}

TEST(Okumura, RejectsNonTraceFree) {
  EXPECT_THROW(okumura_gap(Sym2::identity(3), Sym2::diagonal({1, 1, 1})), GeometryError);
}

TEST(Okumura, AgreesWithEigendecomposition) {
  std::mt19937_64 rng(11);
  for (int n = 3; n <= 6; ++n)
    for (int s = 0; s < 200; ++s) {
      const Sym2 g = random_metric(n, rng);
      const Sym2 e = random_trace_free(g, rng);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(e.matrix(), g.matrix());
      const double oracle = eig_gap_oracle(es.eigenvalues());
      const double gap = okumura_gap(g, e);
      EXPECT_NEAR(gap, oracle, 1e-10 * std::max(1.0, std::abs(oracle)));
      EXPECT_GE(gap, -1e-12 * std::max(1.0, std::pow(norm(g, e), 3)));
    }
}

TEST(Okumura, EqualityOnlyOnNonNegativePattern) {
  for (int n = 3; n <= 6; ++n) {
    std::vector<double> d(n, 0.7);
    d.back() = -(n - 1) * 0.7;
    EXPECT_NEAR(okumura_gap(Sym2::identity(n), Sym2::diagonal(d)), 0.0, 1e-10);
    for (double& v : d) v = -v;
    EXPECT_GT(okumura_gap(Sym2::identity(n), Sym2::diagonal(d)), 1e-3);
  }
}

TEST(Schouten, Examples) {
  const Sym2 g3 = Sym2::identity(3);
  EXPECT_LE((schouten(g3, 2.0 * g3, 6.0) - 0.5 * g3).max_abs(), 1e-15);
  EXPECT_NEAR(trace(g3, schouten(g3, 2.0 * g3, 6.0)), 1.5, 1e-15);
  EXPECT_EQ(schouten(g3, Sym2(3), 0.0).max_abs(), 0.0);
  const Sym2 a = schouten(Sym2::identity(4), Sym2::diagonal({2, 2, 2, 0}), 6.0);
  EXPECT_LE((a - Sym2::diagonal({0.5, 0.5, 0.5, -0.5})).max_abs(), 1e-15);
  EXPECT_NEAR(trace(Sym2::identity(4), a), 1.0, 1e-15);
}

TEST(Schouten, RejectsLowDimension) {
  EXPECT_THROW(schouten(Sym2::identity(2), Sym2::identity(2), 2.0), GeometryError);
}

TEST(CfRiemann, UnitSphere) {
  for (int n = 3; n <= 6; ++n) {
    const Sym2 g = Sym2::identity(n);
    const Curv4 r = cf_riemann_from_ricci(g, Sym2(n), n * (n - 1.0));
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l)
            worst = std::max(worst, std::abs(r(i, k, j, l) - (g(i, j) * g(k, l) - g(i, l) * g(j, k))));
    EXPECT_LE(worst, 1e-14);
    EXPECT_EQ(cf_riemann_from_ricci(g, Sym2(n), 0.0).max_abs(), 0.0);
  }
}

TEST(CfRiemann, SymmetriesAndContraction) {
  std::mt19937_64 rng(17);
  for (int n = 3; n <= 6; ++n)
    for (int s = 0; s < 50; ++s) {
      const Sym2 g = random_metric(n, rng);
      const Sym2 e = random_trace_free(g, rng);
      const double R = 4.0 * s - 30.0;
      const Curv4 r = cf_riemann_from_ricci(g, e, R);
      const double scale = std::max(1.0, r.max_abs());
      EXPECT_LE(pair_symmetry_defect(r), 1e-12 * scale);
      EXPECT_LE(antisymmetry_defect(r), 1e-12 * scale);
      EXPECT_LE(bianchi_defect(r), 1e-12 * scale);
      // g^{kl} R_{ikjl} = E_ij + (R/n) g_ij
      const Eigen::MatrixXd gi = g.matrix().inverse();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double c = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) c += gi(k, l) * r(i, k, j, l);
          EXPECT_NEAR(c, e(i, j) + R / n * g(i, j), 1e-12 * scale);
        }
    }
}

TEST(Weyl, VanishesOnConformallyFlat) {
  std::mt19937_64 rng(19);
  for (int n = 3; n <= 6; ++n) {
    const Sym2 g = random_metric(n, rng);
    const Sym2 e = random_trace_free(g, rng);
    const double R = 3.0;
    const Curv4 r = cf_riemann_from_ricci(g, e, R);
    EXPECT_LE(weyl_from(g, r, e + (R / n) * g, R).max_abs(), 1e-12);
  }
  const Sym2 g = Sym2::identity(4);
  EXPECT_LE(weyl_from(g, cf_riemann_from_ricci(g, Sym2(4), 12.0), 3.0 * g, 12.0).max_abs(), 1e-14);
}

TEST(Weyl, PerturbationIsDetectedAndReassembled) {
  for (int n = 4; n <= 6; ++n) {
    const Sym2 g = Sym2::identity(n);
    Curv4 r = cf_riemann_from_ricci(g, Sym2(n), n * (n - 1.0));
    const double d = 0.3;  // change the sectional curvature of the (0,1) plane only
    r(0, 1, 0, 1) += d;
    r(1, 0, 1, 0) += d;
    r(0, 1, 1, 0) -= d;
    r(1, 0, 0, 1) -= d;
    const Sym2 ric = ricci_contraction(g, r);
    const double R = trace(g, ric);
    const Curv4 w = weyl_from(g, r, ric, R);
    EXPECT_GT(w.max_abs(), 1e-2);
    EXPECT_LE(weyl_trace_defect(g, w), 1e-10);
    EXPECT_LE((reassemble(g, w, ric, R) - r).max_abs(), 1e-14);
  }
}

TEST(QInvariant, Examples) {
  for (int n = 3; n <= 6; ++n) {
    const Sym2 g = Sym2::identity(n);
    const QInvariant q = q_invariant(g, cf_riemann_from_ricci(g, Sym2(n), 7.0), (7.0 / n) * g, Sym2(n));
    EXPECT_EQ(q.direct, 0.0);
    EXPECT_EQ(q.formula, 0.0);
  }
  const Sym2 g = Sym2::identity(4);
  const Sym2 e = Sym2::diagonal({0.5, 0.5, 0.5, -1.5});
  const Curv4 r = cf_riemann_from_ricci(g, e, 6.0);
  const QInvariant q = q_invariant(g, r, Sym2::diagonal({2, 2, 2, 0}), e);
  EXPECT_NEAR(q.direct, 0.0, 1e-13);
  EXPECT_NEAR(q.formula, 0.0, 1e-13);
  EXPECT_NEAR(norm(g, e) * norm(g, e), 3.0, 1e-14);
  EXPECT_NEAR(cubic(g, e), -3.0, 1e-14);
}

TEST(QInvariant, MatchesIndependentContraction) {
  std::mt19937_64 rng(23);
  for (int n = 3; n <= 6; ++n)
    for (int s = 0; s < 100; ++s) {
      const Sym2 g = random_metric(n, rng);
      const Sym2 e = random_trace_free(g, rng);
      const double R = 0.2 * s - 5.0;
      const Sym2 ric = e + (R / n) * g;
      const Curv4 r = cf_riemann_from_ricci(g, e, R);
      const QInvariant q = q_invariant(g, r, ric, e);
      const double oracle = q_direct_oracle(g, r, ric, e);
      EXPECT_NEAR(q.direct, oracle, 1e-10 * std::max(1.0, std::abs(oracle)));
      EXPECT_NEAR(q.direct, q.formula, 1e-10 * std::max(1.0, std::abs(q.direct)));
    }
}

TEST(EigenPattern, Examples) {
  const Sym2 g = Sym2::identity(4);
  EXPECT_EQ(eigen_pattern(g, Sym2(4), 1e-8).kind, PatternKind::Null);
  const EigenPattern p = eigen_pattern(g, Sym2::diagonal({0.5, 0.5, 0.5, -1.5}), 1e-8);
  EXPECT_EQ(p.kind, PatternKind::Pattern);
  EXPECT_NEAR(p.lambda, 0.5, 1e-12);
  EXPECT_EQ(eigen_pattern(g, Sym2::diagonal({1, 1, -1, -1}), 1e-8).kind, PatternKind::Other);
  const EigenPattern neg = eigen_pattern(g, Sym2::diagonal({-0.5, -0.5, -0.5, 1.5}), 1e-8);
  EXPECT_EQ(neg.kind, PatternKind::Pattern);
  EXPECT_NEAR(neg.lambda, -0.5, 1e-12);
}

TEST(EigenPattern, NonIdentityMetric) {
  std::mt19937_64 rng(29);
  const Sym2 g = random_metric(5, rng);
  // E = lambda g - n lambda v v^T with g(v, v) = 1 has the (n-1, 1) pattern.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(5);
  w /= std::sqrt(w.dot(g.matrix() * w));
  const Eigen::VectorXd v = g.matrix() * w;
  const double lam = 0.3;
  const Sym2 e = Sym2::from_matrix(lam * g.matrix() - 5 * lam * v * v.transpose());
  const EigenPattern p = eigen_pattern(g, e, 1e-8);
  EXPECT_EQ(p.kind, PatternKind::Pattern);
  EXPECT_NEAR(p.lambda, lam, 1e-10);
}

TEST(EigenPattern, RejectsNonPositiveTolerance) {
  EXPECT_THROW(eigen_pattern(Sym2::identity(3), Sym2(3), 0.0), GeometryError);
  EXPECT_THROW(eigen_pattern(Sym2::identity(3), Sym2(3), -1.0), GeometryError);
}
