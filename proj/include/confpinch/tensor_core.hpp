#pragma once

// Pointwise multilinear algebra on curvature-type tensors.
//
// Index convention for Curv4: comps(a, b, c, d) = R_{abcd} with
//   R_{abcd} = -R_{bacd} = -R_{abdc} = R_{cdab},
//   unit sphere:  R_{abcd} = g_ac g_bd - g_ad g_bc,
//   Ricci:        Ric_ac  = g^{bd} R_{abcd}.
// The four-index symbol R_{ikjl} used in the classical formulas for Codazzi
// tensors corresponds to comps(i, k, j, l).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confpinch {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Manifold dimension; the toolkit only handles n >= 3.
class Dim {
 public:
  explicit Dim(int n) : n_(n) {
    if (n < 3) throw GeometryError("dimension must be at least 3");
  }
  int value() const { return n_; }
  operator int() const { return n_; }

 private:
  int n_;
};

/// Symmetric 2-tensor with lower indices. Storage is exactly symmetric.
class Sym2 {
 public:
  Sym2() = default;
  explicit Sym2(int n) : m_(Eigen::MatrixXd::Zero(n, n)) {}

  static Sym2 identity(int n) {
    Sym2 s(n);
    s.m_.setIdentity();
    return s;
  }

  static Sym2 diagonal(const std::vector<double>& d) {
    Sym2 s(static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) s.m_(i, i) = d[i];
    return s;
  }

  /// Symmetrizes; rejects inputs whose asymmetry exceeds `tol` relative to the entries.
  static Sym2 from_matrix(const Eigen::MatrixXd& m, double tol = 1e-8) {
    if (m.rows() != m.cols()) throw GeometryError("Sym2 requires a square matrix");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
      throw GeometryError("matrix is not symmetric");
    Sym2 s;
    s.m_ = 0.5 * (m + m.transpose());
    return s;
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Eigen::MatrixXd& matrix() const { return m_; }

  Sym2& operator+=(const Sym2& o) {
    m_ += o.m_;
    return *this;
  }
  Sym2& operator-=(const Sym2& o) {
    m_ -= o.m_;
    return *this;
  }
  Sym2& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
  friend Sym2 operator-(Sym2 a, const Sym2& b) { return a -= b; }
  friend Sym2 operator*(Sym2 a, double s) { return a *= s; }
  friend Sym2 operator*(double s, Sym2 a) { return a *= s; }

  double max_abs() const { return m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0; }

 private:
  Eigen::MatrixXd m_;
};

/// Dense 4-index tensor, all indices lower.
class Curv4 {
 public:
  Curv4() = default;
  explicit Curv4(int n) : n_(n), c_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int a, int b, int c, int d) { return c_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return c_[index(a, b, c, d)]; }

  Curv4& operator+=(const Curv4& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Curv4& operator-=(const Curv4& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Curv4& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  friend Curv4 operator+(Curv4 a, const Curv4& b) { return a += b; }
  friend Curv4 operator-(Curv4 a, const Curv4& b) { return a -= b; }
  friend Curv4 operator*(Curv4 a, double s) { return a *= s; }
  friend Curv4 operator*(double s, Curv4 a) { return a *= s; }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  std::vector<double> c_;
};

inline Eigen::MatrixXd inverse_metric(const Sym2& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.matrix());
  if (llt.info() != Eigen::Success) throw GeometryError("degenerate metric");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(g.dim(), g.dim()));
  if (!inv.allFinite()) throw GeometryError("degenerate metric");
  return 0.5 * (inv + inv.transpose());
}

inline double trace(const Sym2& g, const Sym2& t) {
  return (inverse_metric(g) * t.matrix()).trace();
}

/// |T| = sqrt(g^{ik} g^{jl} T_ij T_kl).
inline double norm(const Sym2& g, const Sym2& t) {
  const Eigen::MatrixXd mixed = inverse_metric(g) * t.matrix();
  return std::sqrt(std::max(0.0, (mixed * mixed).trace()));
}

/// T_ij T_jk T_ki with indices raised by g.
inline double cubic(const Sym2& g, const Sym2& t) {
  const Eigen::MatrixXd mixed = inverse_metric(g) * t.matrix();
  return (mixed * mixed * mixed).trace();
}

struct ScalarQuantities {
  double scalar = 0.0;
  double norm_e = 0.0;
  double cubic_e = 0.0;
};

inline ScalarQuantities scalar_quantities(const Sym2& g, const Sym2& e, double scalar) {
  return {scalar, norm(g, e), cubic(g, e)};
}

/// E = Ric - (R/n) g.
inline Sym2 trace_free_part(const Sym2& g, const Sym2& ric, double scalar) {
  const double tr = trace(g, ric);
  if (std::abs(tr - scalar) > 1e-10 * std::max(1.0, std::abs(scalar)))
    throw GeometryError("trace mismatch");
  return ric - (scalar / g.dim()) * g;
}

/// Trace-free part with the trace computed from the tensor itself.
inline Sym2 trace_free(const Sym2& g, const Sym2& t) {
  return t - (trace(g, t) / g.dim()) * g;
}

inline void require_trace_free(const Sym2& g, const Sym2& e, double tol = 1e-10) {
  if (std::abs(trace(g, e)) > tol * std::max(1.0, norm(g, e)))
    throw GeometryError("tensor is not trace-free");
}

/// tr(E^3) + (n-2)/sqrt(n(n-1)) |E|^3. Non-negative for trace-free E.
inline double okumura_gap(const Sym2& g, const Sym2& e) {
  require_trace_free(g, e);
  const double n = g.dim();
  const double ne = norm(g, e);
  return cubic(g, e) + (n - 2.0) / std::sqrt(n * (n - 1.0)) * ne * ne * ne;
}

/// A = (Ric - R/(2(n-1)) g) / (n-2).
inline Sym2 schouten(const Sym2& g, const Sym2& ric, double scalar) {
  const int n = Dim(g.dim());
  return (1.0 / (n - 2.0)) * (ric - (scalar / (2.0 * (n - 1.0))) * g);
}

/// (h o k)_{abcd} = h_ac k_bd + h_bd k_ac - h_ad k_bc - h_bc k_ad.
inline Curv4 kulkarni_nomizu(const Sym2& h, const Sym2& k) {
  const int n = h.dim();
  Curv4 out(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          out(a, b, c, d) = h(a, c) * k(b, d) + h(b, d) * k(a, c) - h(a, d) * k(b, c) -
                            h(b, c) * k(a, d);
  return out;
}

/// Riemann tensor of a conformally flat metric from its trace-free Ricci tensor and scalar curvature.
inline Curv4 cf_riemann_from_ricci(const Sym2& g, const Sym2& e, double scalar) {
  const int n = Dim(g.dim());
  require_trace_free(g, e);
  return (1.0 / (n - 2.0)) * kulkarni_nomizu(e, g) +
         (scalar / (2.0 * n * (n - 1.0))) * kulkarni_nomizu(g, g);
}

/// g^{bd} R_{abcd}, not symmetrized.
inline Eigen::MatrixXd ricci_contraction_raw(const Sym2& g, const Curv4& riem) {
  const int n = g.dim();
  const Eigen::MatrixXd gi = inverse_metric(g);
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) s += gi(b, d) * riem(a, b, c, d);
      ric(a, c) = s;
    }
  return ric;
}

inline Sym2 ricci_contraction(const Sym2& g, const Curv4& riem) {
  return Sym2::from_matrix(ricci_contraction_raw(g, riem), 1e-6);
}

/// W = Riem - Ric o g / (n-2) + R g o g / (2(n-1)(n-2)).
inline Curv4 weyl_from(const Sym2& g, const Curv4& riem, const Sym2& ric, double scalar) {
  const int n = Dim(g.dim());
  return riem - (1.0 / (n - 2.0)) * kulkarni_nomizu(ric, g) +
         (scalar / (2.0 * (n - 1.0) * (n - 2.0))) * kulkarni_nomizu(g, g);
}

/// Inverse of weyl_from.
inline Curv4 reassemble(const Sym2& g, const Curv4& weyl, const Sym2& ric, double scalar) {
  const int n = Dim(g.dim());
  return weyl + (1.0 / (n - 2.0)) * kulkarni_nomizu(ric, g) -
         (scalar / (2.0 * (n - 1.0) * (n - 2.0))) * kulkarni_nomizu(g, g);
}

// Algebraic symmetry defects (max-norm). All vanish for a genuine curvature tensor.

inline double pair_symmetry_defect(const Curv4& r) {
  const int n = r.dim();
  double m = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) m = std::max(m, std::abs(r(a, b, c, d) - r(c, d, a, b)));
  return m;
}

inline double antisymmetry_defect(const Curv4& r) {
  const int n = r.dim();
  double m = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          m = std::max(m, std::abs(r(a, b, c, d) + r(b, a, c, d)));
          m = std::max(m, std::abs(r(a, b, c, d) + r(a, b, d, c)));
        }
  return m;
}

inline double bianchi_defect(const Curv4& r) {
  const int n = r.dim();
  double m = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          m = std::max(m, std::abs(r(a, b, c, d) + r(b, c, a, d) + r(c, a, b, d)));
  return m;
}

/// max |g^{bd} R_{abcd} - Ric_ac|.
inline double ricci_contraction_defect(const Sym2& g, const Curv4& riem, const Sym2& ric) {
  return (ricci_contraction_raw(g, riem) - ric.matrix()).cwiseAbs().maxCoeff();
}

/// max |g^{bd} W_{abcd}|.
inline double weyl_trace_defect(const Sym2& g, const Curv4& weyl) {
  return ricci_contraction_raw(g, weyl).cwiseAbs().maxCoeff();
}

struct QInvariant {
  double direct = 0.0;   // -R_{ikjl} E_ij E_kl + R_jk E_ij E_ik by full contraction
  double formula = 0.0;  // R |E|^2/(n-1) + n/(n-2) tr(E^3)
};

inline QInvariant q_invariant(const Sym2& g, const Curv4& riem, const Sym2& ric, const Sym2& e) {
  const int n = Dim(g.dim());
  const Eigen::MatrixXd gi = inverse_metric(g);
  const Eigen::MatrixXd eu = gi * e.matrix() * gi;
  double contraction = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) contraction += riem(a, b, c, d) * eu(a, c) * eu(b, d);
  const double ricci_term = (gi * ric.matrix() * gi * e.matrix() * gi * e.matrix()).trace();
  QInvariant q;
  q.direct = -contraction + ricci_term;
  const double scalar = (gi * ric.matrix()).trace();
  const double ne = norm(g, e);
  q.formula = scalar * ne * ne / (n - 1.0) + n / (n - 2.0) * cubic(g, e);
  return q;
}

/// Eigenvalues of E relative to g, ascending. Uses g^{-1/2} E g^{-1/2}.
inline Eigen::VectorXd generalized_eigenvalues(const Sym2& g, const Sym2& e) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(g.matrix());
  if (gs.info() != Eigen::Success || gs.eigenvalues().minCoeff() <= 0.0)
    throw GeometryError("degenerate metric");
  const Eigen::MatrixXd inv_sqrt =
      gs.eigenvectors() * gs.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      gs.eigenvectors().transpose();
  const Eigen::MatrixXd m = inv_sqrt * e.matrix() * inv_sqrt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

enum class PatternKind { Null, Pattern, Other };

struct EigenPattern {
  PatternKind kind = PatternKind::Other;
  double lambda = 0.0;  // the (n-1)-fold eigenvalue when kind == Pattern
};

inline const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Null: return "null";
    case PatternKind::Pattern: return "pattern";
    case PatternKind::Other: return "other";
  }
  return "other";
}

/// Classifies E as null, (lambda x (n-1), -(n-1) lambda x 1), or other.
/// `tol` is an eigenvalue clustering tolerance scaled by max(1, |E|).
inline EigenPattern eigen_pattern(const Sym2& g, const Sym2& e, double tol) {
  if (!(tol > 0.0)) throw GeometryError("tolerance must be positive");
  const int n = g.dim();
  const Eigen::VectorXd ev = generalized_eigenvalues(g, e);
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double eff = tol * scale;
  if (ev.cwiseAbs().maxCoeff() <= eff) return {PatternKind::Null, 0.0};

  auto try_group = [&](int first, int lone) -> std::optional<double> {
    double mean = 0.0;
    for (int i = first; i < first + n - 1; ++i) mean += ev(i);
    mean /= (n - 1);
    for (int i = first; i < first + n - 1; ++i)
      if (std::abs(ev(i) - mean) > eff) return std::nullopt;
    if (std::abs(ev(lone) + (n - 1) * mean) > eff) return std::nullopt;
    return mean;
  };
  // Non-negative lambda: the cluster sits on top; negative lambda: at the bottom.
  if (auto lam = try_group(1, 0)) return {PatternKind::Pattern, *lam};
  if (auto lam = try_group(0, n - 1)) return {PatternKind::Pattern, *lam};
  return {PatternKind::Other, 0.0};
}

}  // namespace confpinch
