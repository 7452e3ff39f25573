#pragma once

// Differential geometry on a single coordinate chart.
//
// Curvature comes from Christoffel symbols (analytic when the chart supplies
// them, otherwise fourth-order differences of the metric) and fourth-order
// differences of those symbols. Quantities that need derivatives of
// curvature (Cotton, divergence of Weyl, covariant derivatives of curvature
// fields) difference the curvature again with the chart's nested step.

#include "confpinch/finite_difference.hpp"
#include "confpinch/tensor_core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace confpinch {

using Point = Eigen::VectorXd;

/// Dense 3-index array. Used for Christoffel symbols Gamma^k_ij stored as
/// (k, i, j), covariant derivatives nabla_k T_ij stored as (k, i, j), and the
/// Cotton tensor C_ijk stored as (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), c_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int a, int b, int c) { return c_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c]; }
  double operator()(int a, int b, int c) const {
    return c_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
  }

  Tensor3& operator+=(const Tensor3& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Tensor3& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> c_;
};

using Christoffel = Tensor3;
using Deriv3 = Tensor3;

struct Axis {
  double lo = -1.0;
  double hi = 1.0;
  bool periodic = false;  // period = hi - lo
};

/// Restricts sampling of axes >= first_axis to a ball (used for stereographic
/// coordinates, which degenerate towards the antipode).
struct SampleBall {
  int first_axis = 0;
  double radius = 1.0;
};

class MetricChart {
 public:
  using MetricFn = std::function<Sym2(const Point&)>;
  using ChristoffelFn = std::function<Christoffel(const Point&)>;

  MetricChart(std::vector<Axis> box, MetricFn metric, std::optional<ChristoffelFn> christoffel,
              double fd_step, std::optional<SampleBall> ball = std::nullopt,
              std::string label = {})
      : box_(std::move(box)),
        metric_(std::move(metric)),
        christoffel_(std::move(christoffel)),
        h_(fd_step),
        ball_(ball),
        label_(std::move(label)) {
    n_ = Dim(static_cast<int>(box_.size()));
    if (!(h_ > 0.0)) throw GeometryError("fd_step must be positive");
    for (const Axis& a : box_)
      if (!(a.hi > a.lo)) throw GeometryError("empty coordinate interval");
    nested_h_ = 0.1 * std::sqrt(h_);
  }

  int dim() const { return n_; }
  const std::vector<Axis>& box() const { return box_; }
  double fd_step() const { return h_; }
  /// Step for differentiating curvature quantities that already carry one level of differencing.
  double nested_step() const { return nested_h_; }
  void set_nested_step(double h) {
    if (!(h > 0.0)) throw GeometryError("nested step must be positive");
    nested_h_ = h;
  }
  bool has_analytic_christoffel() const { return christoffel_.has_value(); }
  const std::optional<SampleBall>& ball() const { return ball_; }
  const std::string& label() const { return label_; }

  Sym2 metric(const Point& x) const { return metric_(wrap(x)); }
  Christoffel analytic_christoffel(const Point& x) const {
    if (!christoffel_) throw GeometryError("chart has no analytic Christoffel symbols");
    return (*christoffel_)(wrap(x));
  }

  /// Maps periodic coordinates into [lo, hi).
  Point wrap(Point x) const {
    for (int a = 0; a < n_; ++a) {
      const Axis& ax = box_[a];
      if (!ax.periodic) continue;
      const double p = ax.hi - ax.lo;
      double v = std::fmod(x(a) - ax.lo, p);
      if (v < 0) v += p;
      x(a) = ax.lo + v;
    }
    return x;
  }

  Point shifted(const Point& x, int axis, double s) const {
    Point y = x;
    y(axis) += s;
    return y;
  }

  void require_margin(const Point& x, double reach) const {
    if (x.size() != n_) throw GeometryError("point has wrong dimension");
    for (int a = 0; a < n_; ++a) {
      const Axis& ax = box_[a];
      if (ax.periodic) continue;
      if (x(a) - reach < ax.lo || x(a) + reach > ax.hi)
        throw GeometryError("insufficient stencil margin");
    }
  }

  /// Stencil reach of one Christoffel evaluation.
  double christoffel_reach() const { return christoffel_ ? 0.0 : 2.0 * h_; }
  /// Stencil reach of one curvature evaluation.
  double curvature_reach() const { return christoffel_reach() + 2.0 * h_; }

 private:
  int n_ = 3;
  std::vector<Axis> box_;
  MetricFn metric_;
  std::optional<ChristoffelFn> christoffel_;
  double h_;
  double nested_h_;
  std::optional<SampleBall> ball_;
  std::string label_;
};

/// Partial derivative along `axis` of any vector-space-valued function of the point.
template <class F>
auto partial(const MetricChart& chart, F&& f, const Point& x, int axis, double h) {
  return fd::first([&](double s) { return f(chart.shifted(x, axis, s)); }, h);
}

inline Christoffel christoffel_from_metric_derivatives(const Sym2& g,
                                                       const std::vector<Sym2>& dg) {
  const int n = g.dim();
  const Eigen::MatrixXd gi = inverse_metric(g);
  Christoffel first_kind(n);  // Gamma_{l i j} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        first_kind(l, i, j) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  Christoffel gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gi(k, l) * first_kind(l, i, j);
        gamma(k, i, j) = s;
        gamma(k, j, i) = s;
      }
  return gamma;
}

/// Christoffel symbols from fourth-order differences of the metric.
inline Christoffel fd_christoffel_at(const MetricChart& chart, const Point& x) {
  chart.require_margin(x, 2.0 * chart.fd_step());
  const int n = chart.dim();
  std::vector<Sym2> dg;
  dg.reserve(n);
  for (int a = 0; a < n; ++a)
    dg.push_back(partial(chart, [&](const Point& y) { return chart.metric(y); }, x, a,
                         chart.fd_step()));
  return christoffel_from_metric_derivatives(chart.metric(x), dg);
}

inline Christoffel christoffel_at(const MetricChart& chart, const Point& x) {
  if (chart.has_analytic_christoffel()) {
    chart.require_margin(x, 0.0);
    return chart.analytic_christoffel(x);
  }
  return fd_christoffel_at(chart, x);
}

/// Max |analytic - FD| Christoffel difference at the given points (0 if the chart has no analytic path).
inline double christoffel_consistency(const MetricChart& chart, const std::vector<Point>& pts) {
  if (!chart.has_analytic_christoffel()) return 0.0;
  double m = 0.0;
  for (const Point& x : pts)
    m = std::max(m, (chart.analytic_christoffel(x) - fd_christoffel_at(chart, x)).max_abs());
  return m;
}

struct CurvatureAt {
  Sym2 metric;
  Christoffel gamma;
  Curv4 riemann;
  Sym2 ricci;
  double scalar = 0.0;
};

inline CurvatureAt curvature_at(const MetricChart& chart, const Point& x) {
  chart.require_margin(x, chart.curvature_reach());
  const int n = chart.dim();
  const double h = chart.fd_step();
  CurvatureAt out;
  out.metric = chart.metric(x);
  out.gamma = christoffel_at(chart, x);
  std::vector<Christoffel> dgamma;  // dgamma[m](r, s, t) = d_m Gamma^r_st
  dgamma.reserve(n);
  for (int m = 0; m < n; ++m)
    dgamma.push_back(partial(chart, [&](const Point& y) { return christoffel_at(chart, y); }, x,
                             m, h));
  const Christoffel& G = out.gamma;

  // Rup(rho, sigma, mu, nu) = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma}
  //                          + G^rho_{mu lam} G^lam_{nu sigma} - G^rho_{nu lam} G^lam_{mu sigma}
  // and R_{abcd} = -g_{d rho} Rup(rho, c, a, b).
  Curv4 rup(n);
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = mu + 1; nu < n; ++nu) {
          double v = dgamma[mu](r, nu, s) - dgamma[nu](r, mu, s);
          for (int l = 0; l < n; ++l) v += G(r, mu, l) * G(l, nu, s) - G(r, nu, l) * G(l, mu, s);
          rup(r, s, mu, nu) = v;
          rup(r, s, nu, mu) = -v;
        }
  out.riemann = Curv4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double v = 0.0;
          for (int r = 0; r < n; ++r) v += out.metric(d, r) * rup(r, c, a, b);
          out.riemann(a, b, c, d) = -v;
        }
  out.ricci = Sym2::from_matrix(ricci_contraction_raw(out.metric, out.riemann), 1e-4);
  out.scalar = trace(out.metric, out.ricci);
  return out;
}

inline Curv4 riemann_at(const MetricChart& chart, const Point& x) {
  return curvature_at(chart, x).riemann;
}
inline Sym2 ricci_at(const MetricChart& chart, const Point& x) {
  return curvature_at(chart, x).ricci;
}
inline double scalar_at(const MetricChart& chart, const Point& x) {
  return curvature_at(chart, x).scalar;
}

inline Curv4 weyl_at(const MetricChart& chart, const Point& x) {
  const CurvatureAt c = curvature_at(chart, x);
  return weyl_from(c.metric, c.riemann, c.ricci, c.scalar);
}

// ---------------------------------------------------------------------------
// Symmetric 2-tensor fields and their covariant derivatives.

struct Sym2Field {
  MetricChart chart;
  std::function<Sym2(const Point&)> eval;
  /// Stencil reach of one evaluation of the field.
  double reach = 0.0;
  std::string name;

  Sym2 operator()(const Point& x) const { return eval(x); }
};

inline Sym2Field constant_field(const MetricChart& chart, Sym2 value, std::string name = "constant") {
  return {chart, [value](const Point&) { return value; }, 0.0, std::move(name)};
}

inline Sym2Field ricci_field(const MetricChart& chart) {
  return {chart, [chart](const Point& x) { return ricci_at(chart, x); }, chart.curvature_reach(),
          "ricci"};
}

/// E = Ric - (R/n) g.
inline Sym2Field trace_free_ricci_field(const MetricChart& chart) {
  return {chart,
          [chart](const Point& x) {
            const CurvatureAt c = curvature_at(chart, x);
            return trace_free_part(c.metric, c.ricci, c.scalar);
          },
          chart.curvature_reach(), "trace-free-ricci"};
}

inline Sym2Field schouten_field(const MetricChart& chart) {
  return {chart,
          [chart](const Point& x) {
            const CurvatureAt c = curvature_at(chart, x);
            return schouten(c.metric, c.ricci, c.scalar);
          },
          chart.curvature_reach(), "schouten"};
}

/// Pointwise trace-free part of a field.
inline Sym2Field trace_free_field(const Sym2Field& f) {
  Sym2Field out = f;
  out.eval = [f](const Point& x) { return trace_free(f.chart.metric(x), f(x)); };
  out.name = f.name + "/trace-free";
  return out;
}

inline Tensor3 covariant_derivative_from(const Christoffel& G, const Sym2& t,
                                         const std::vector<Sym2>& dt) {
  const int n = t.dim();
  Deriv3 out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = dt[k](i, j);
        for (int m = 0; m < n; ++m) v -= G(m, k, i) * t(m, j) + G(m, k, j) * t(i, m);
        out(k, i, j) = v;
      }
  return out;
}

/// nabla_k T_ij at x, differencing the field with the chart's nested step.
inline Deriv3 covariant_derivative_at(const Sym2Field& f, const Point& x) {
  const MetricChart& chart = f.chart;
  const double h = chart.nested_step();
  chart.require_margin(x, f.reach + 2.0 * h);
  const int n = chart.dim();
  std::vector<Sym2> dt;
  dt.reserve(n);
  for (int k = 0; k < n; ++k) dt.push_back(partial(chart, f.eval, x, k, h));
  return covariant_derivative_from(christoffel_at(chart, x), f(x), dt);
}

/// C_ijk = nabla_k R_ij - nabla_j R_ik - (nabla_k R g_ij - nabla_j R g_ik) / (2(n-1)).
inline Tensor3 cotton_at(const MetricChart& chart, const Point& x) {
  const int n = chart.dim();
  const Deriv3 dric = covariant_derivative_at(ricci_field(chart), x);
  const Sym2 g = chart.metric(x);
  const Eigen::MatrixXd gi = inverse_metric(g);
  std::vector<double> dscalar(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dscalar[k] += gi(i, j) * dric(k, i, j);
  Tensor3 c(n);
  const double w = 1.0 / (2.0 * (n - 1.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        c(i, j, k) = dric(k, i, j) - dric(j, i, k) - w * (dscalar[k] * g(i, j) - dscalar[j] * g(i, k));
  return c;
}

struct WeylDivergence {
  double defect = 0.0;      // max |div W - (n-3)/(n-2) C|
  double divergence = 0.0;  // max |div W|
  double cotton = 0.0;      // max |(n-3)/(n-2) C|
};

/// Compares g^{ed} nabla_e W_{abcd} with (n-3)/(n-2) C_{cab}.
inline WeylDivergence weyl_divergence_at(const MetricChart& chart, const Point& x) {
  const int n = chart.dim();
  if (n < 4) throw GeometryError("identity requires n >= 4");
  const double h = chart.nested_step();
  chart.require_margin(x, chart.curvature_reach() + 2.0 * h);
  const Sym2 g = chart.metric(x);
  const Eigen::MatrixXd gi = inverse_metric(g);
  const Christoffel G = christoffel_at(chart, x);
  const Curv4 w = weyl_at(chart, x);
  std::vector<Curv4> dw;
  dw.reserve(n);
  for (int e = 0; e < n; ++e)
    dw.push_back(partial(chart, [&](const Point& y) { return weyl_at(chart, y); }, x, e, h));

  auto nabla = [&](int e, int a, int b, int c, int d) {
    double v = dw[e](a, b, c, d);
    for (int m = 0; m < n; ++m)
      v -= G(m, e, a) * w(m, b, c, d) + G(m, e, b) * w(a, m, c, d) + G(m, e, c) * w(a, b, m, d) +
           G(m, e, d) * w(a, b, c, m);
    return v;
  };

  const Tensor3 cot = cotton_at(chart, x);
  const double factor = (n - 3.0) / (n - 2.0);
  WeylDivergence out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double div = 0.0;
        for (int e = 0; e < n; ++e)
          for (int d = 0; d < n; ++d) div += gi(e, d) * nabla(e, a, b, c, d);
        const double rhs = factor * cot(c, a, b);
        out.defect = std::max(out.defect, std::abs(div - rhs));
        out.divergence = std::max(out.divergence, std::abs(div));
        out.cotton = std::max(out.cotton, std::abs(rhs));
      }
  return out;
}

inline double weyl_divergence_defect_at(const MetricChart& chart, const Point& x) {
  return weyl_divergence_at(chart, x).defect;
}

/// Identity residual together with the magnitude of the terms it balances.
/// Tolerances apply to residual / max(1, scale).
struct Residual {
  double residual = 0.0;
  double scale = 0.0;
  double relative() const { return residual / std::max(1.0, scale); }
};

inline Residual codazzi_terms_at(const Sym2Field& f, const Point& x) {
  const Deriv3 d = covariant_derivative_at(f, x);
  const int n = d.dim();
  Residual r;
  r.scale = d.max_abs();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) r.residual = std::max(r.residual, std::abs(d(k, i, j) - d(j, i, k)));
  return r;
}

/// max over (i,j,k) of |nabla_k T_ij - nabla_j T_ik|.
inline double codazzi_defect_at(const Sym2Field& f, const Point& x) {
  return codazzi_terms_at(f, x).residual;
}

namespace detail {

inline double norm_sq_deriv3(const Eigen::MatrixXd& gi, const Deriv3& d) {
  const int n = d.dim();
  // Raise all three indices then contract.
  double s = 0.0;
  Tensor3 up(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) v += gi(k, a) * gi(i, b) * gi(j, c) * d(a, b, c);
        up(k, i, j) = v;
      }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += up(k, i, j) * d(k, i, j);
  return s;
}

/// -R_{ikjl} T^{ij} T^{kl} + R_{jk} T^{j}_{i} T^{ik} in coordinates.
inline double curvature_term(const Sym2& g, const Curv4& riem, const Sym2& ric, const Sym2& t) {
  return q_invariant(g, riem, ric, t).direct;
}

inline void require_trace_free_codazzi(const Sym2Field& f, const Point& x) {
  const Sym2 g = f.chart.metric(x);
  const Sym2 t = f(x);
  if (std::abs(trace(g, t)) > 1e-8 * std::max(1.0, norm(g, t)) ||
      codazzi_terms_at(f, x).relative() > 1e-6)
    throw GeometryError("not a trace-free Codazzi field");
}

}  // namespace detail

/// Rough Laplacian g^{ab} nabla_a nabla_b T_ij (nested differencing).
inline Sym2 rough_laplacian_at(const Sym2Field& f, const Point& x) {
  const MetricChart& chart = f.chart;
  const int n = chart.dim();
  const double h = chart.nested_step();
  chart.require_margin(x, f.reach + 4.0 * h);
  const Sym2 g = chart.metric(x);
  const Eigen::MatrixXd gi = inverse_metric(g);
  const Christoffel G = christoffel_at(chart, x);
  const Deriv3 dt = covariant_derivative_at(f, x);
  std::vector<Tensor3> ddt;  // ddt[a](b, i, j) = d_a (nabla_b T_ij)
  ddt.reserve(n);
  for (int a = 0; a < n; ++a)
    ddt.push_back(partial(chart, [&](const Point& y) { return covariant_derivative_at(f, y); }, x,
                          a, h));
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          if (gi(a, b) == 0.0) continue;
          double v = ddt[a](b, i, j);
          for (int m = 0; m < n; ++m)
            v -= G(m, a, b) * dt(m, i, j) + G(m, a, i) * dt(b, m, j) + G(m, a, j) * dt(b, i, m);
          s += gi(a, b) * v;
        }
      lap(i, j) = s;
    }
  return Sym2::from_matrix(lap, 1e-3);
}

/// max |Delta T_ij + R_{ikjl} T^{kl} - T_i^k R_kj| for a trace-free Codazzi field.
inline Residual elliptic_terms_at(const Sym2Field& f, const Point& x) {
  detail::require_trace_free_codazzi(f, x);
  const MetricChart& chart = f.chart;
  const int n = chart.dim();
  const CurvatureAt c = curvature_at(chart, x);
  const Eigen::MatrixXd gi = inverse_metric(c.metric);
  const Sym2 t = f(x);
  const Eigen::MatrixXd tu = gi * t.matrix() * gi;
  const Eigen::MatrixXd tric = t.matrix() * gi * c.ricci.matrix();
  const Sym2 lap = rough_laplacian_at(f, x);
  Residual r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rt = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) rt += c.riemann(i, k, j, l) * tu(k, l);
      r.residual = std::max(r.residual, std::abs(lap(i, j) + rt - tric(i, j)));
      r.scale = std::max({r.scale, std::abs(lap(i, j)), std::abs(rt), std::abs(tric(i, j))});
    }
  return r;
}

inline double elliptic_residual_at(const Sym2Field& f, const Point& x) {
  return elliptic_terms_at(f, x).residual;
}

struct KatoTerms {
  double grad_tensor_sq = 0.0;  // |nabla T|^2
  double grad_norm_sq = 0.0;    // |nabla |T||^2
  double gap = 0.0;             // |nabla T|^2 - (n+2)/n |nabla |T||^2
  double relative() const { return gap / std::max(1.0, grad_tensor_sq); }
};

inline KatoTerms kato_terms_at(const Sym2Field& f, const Point& x) {
  const MetricChart& chart = f.chart;
  const int n = chart.dim();
  const Sym2 g = chart.metric(x);
  const Eigen::MatrixXd gi = inverse_metric(g);
  const Sym2 t = f(x);
  const double tn = norm(g, t);
  if (tn <= 1e-8) throw GeometryError("vanishing locus");
  const Deriv3 d = covariant_derivative_at(f, x);
  const Eigen::MatrixXd tu = gi * t.matrix() * gi;
  Eigen::VectorXd grad_norm(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += tu(i, j) * d(k, i, j);
    grad_norm(k) = s / tn;
  }
  KatoTerms out;
  out.grad_tensor_sq = detail::norm_sq_deriv3(gi, d);
  out.grad_norm_sq = grad_norm.dot(gi * grad_norm);
  out.gap = out.grad_tensor_sq - (n + 2.0) / n * out.grad_norm_sq;
  return out;
}

inline double kato_gap_at(const Sym2Field& f, const Point& x) { return kato_terms_at(f, x).gap; }

struct WeitzenbockTerms {
  double half_laplacian = 0.0;  // (1/2) Delta |T|^2
  double grad_sq = 0.0;         // |nabla T|^2
  double curvature = 0.0;       // -R_{ikjl} T_ij T_kl + R_jk T_ij T_ik
  double residual = 0.0;
  double scale = 0.0;
  double relative() const { return residual / std::max(1.0, scale); }
};

inline WeitzenbockTerms weitzenbock_terms_at(const Sym2Field& f, const Point& x) {
  const MetricChart& chart = f.chart;
  const int n = chart.dim();
  const double h = chart.nested_step();
  chart.require_margin(x, f.reach + 4.0 * h);
  const CurvatureAt c = curvature_at(chart, x);
  const Eigen::MatrixXd gi = inverse_metric(c.metric);
  auto norm_sq = [&](const Point& y) {
    const double v = norm(chart.metric(y), f(y));
    return v * v;
  };
  auto grad = [&](const Point& y) {
    Eigen::VectorXd out(n);
    for (int b = 0; b < n; ++b) out(b) = partial(chart, norm_sq, y, b, h);
    return out;
  };
  const Eigen::VectorXd df = grad(x);
  std::vector<Eigen::VectorXd> ddf;
  ddf.reserve(n);
  for (int a = 0; a < n; ++a) ddf.push_back(partial(chart, grad, x, a, h));
  double lap = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (gi(a, b) == 0.0) continue;
      double v = ddf[a](b);
      for (int m = 0; m < n; ++m) v -= c.gamma(m, a, b) * df(m);
      lap += gi(a, b) * v;
    }
  WeitzenbockTerms out;
  out.half_laplacian = 0.5 * lap;
  out.grad_sq = detail::norm_sq_deriv3(gi, covariant_derivative_at(f, x));
  out.curvature = detail::curvature_term(c.metric, c.riemann, c.ricci, f(x));
  out.residual = std::abs(out.half_laplacian - out.grad_sq - out.curvature);
  out.scale = std::max({std::abs(out.half_laplacian), out.grad_sq, std::abs(out.curvature)});
  return out;
}

inline double weitzenbock_residual_at(const Sym2Field& f, const Point& x) {
  return weitzenbock_terms_at(f, x).residual;
}

// ---------------------------------------------------------------------------
// Sampling and audits.

/// Uniform samples in the box, shrunk by `reach` on non-periodic axes and
/// restricted to the chart's sampling ball.
inline std::vector<Point> sample_points(const MetricChart& chart, int count, std::mt19937_64& rng,
                                        double reach) {
  const int n = chart.dim();
  std::vector<std::uniform_real_distribution<double>> dist;
  for (const Axis& a : chart.box()) {
    const double lo = a.periodic ? a.lo : a.lo + reach;
    const double hi = a.periodic ? a.hi : a.hi - reach;
    if (!(hi > lo)) throw GeometryError("insufficient stencil margin");
    dist.emplace_back(lo, hi);
  }
  std::vector<Point> pts;
  pts.reserve(count);
  int attempts = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++attempts > 1000 * (count + 1)) throw GeometryError("sampling region is empty");
    Point x(n);
    for (int a = 0; a < n; ++a) x(a) = dist[a](rng);
    if (const auto& ball = chart.ball()) {
      const double r = x.tail(n - ball->first_axis).norm();
      if (r > ball->radius) continue;
    }
    pts.push_back(x);
  }
  return pts;
}

/// Throws unless the metric is positive definite at every point.
inline void positive_definite_audit(const MetricChart& chart, const std::vector<Point>& pts) {
  for (const Point& x : pts) {
    Eigen::LLT<Eigen::MatrixXd> llt(chart.metric(x).matrix());
    if (llt.info() != Eigen::Success) throw GeometryError("metric is not positive definite");
  }
}

}  // namespace confpinch
