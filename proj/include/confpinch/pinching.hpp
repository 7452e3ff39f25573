#pragma once

// Integral pinching functional, its regularized counterpart and the pointwise
// equality-case scan on model geometries.
//
// Warped and product models reduce to a one-dimensional periodic integral in t
// weighted by the fiber volume; the sphere is evaluated on chart samples.

#include "confpinch/chart_geometry.hpp"
#include "confpinch/model_metrics.hpp"
#include "confpinch/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace confpinch {

/// Area of the unit k-sphere.
inline double unit_sphere_area(int k) {
  const double m = (k + 1) / 2.0;
  return 2.0 * std::pow(M_PI, m) / std::tgamma(m);
}

struct PinchOptions {
  std::uint64_t seed = 1;
  int audit_samples = 50;
  double audit_tol = 1e-6;       // stdev of the sampled scalar curvature
  int start_nodes = 128;
  int max_nodes = 1 << 17;
  double quad_tol = 1e-10;       // order-doubling change relative to max(1, scale)
  int scan_samples = 200;
  double pattern_tol = 1e-8;
  double null_tol = 1e-9;        // |E| <= null_tol * max(1, |R|) is treated as E = 0
};

struct ScalarAudit {
  double mean = 0.0;
  double stdev = 0.0;
  int samples = 0;
};

/// Throws "hypothesis violated" unless the sampled scalar curvature is constant.
inline ScalarAudit audit_constant_scalar(const MetricChart& chart, int samples, double tol,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<Point> pts = sample_points(chart, samples, rng, chart.curvature_reach());
  std::vector<double> r;
  r.reserve(pts.size());
  for (const Point& x : pts) r.push_back(scalar_at(chart, x));
  ScalarAudit a;
  a.samples = samples;
  for (double v : r) a.mean += v;
  a.mean /= r.size();
  for (double v : r) a.stdev += (v - a.mean) * (v - a.mean);
  a.stdev = std::sqrt(a.stdev / r.size());
  if (!(a.stdev <= tol)) throw GeometryError("hypothesis violated");
  return a;
}

/// |E|^{(n-2)/n} (R - sqrt(n(n-1)) |E|), with 0^{(n-2)/n} = 0.
inline double pinch_integrand(int n, double scalar, double norm_e) {
  if (norm_e == 0.0) return 0.0;
  return std::pow(norm_e, (n - 2.0) / n) * (scalar - std::sqrt(n * (n - 1.0)) * norm_e);
}

/// Pointwise trace-free Ricci data of a chart, with the null snap applied.
struct PointData {
  Sym2 metric;
  Sym2 e;
  double scalar = 0.0;
  double norm_e = 0.0;
};

inline PointData point_data(const MetricChart& chart, const Point& x, double null_tol) {
  const CurvatureAt c = curvature_at(chart, x);
  PointData p{c.metric, trace_free_part(c.metric, c.ricci, c.scalar), c.scalar, 0.0};
  p.norm_e = norm(p.metric, p.e);
  if (p.norm_e <= null_tol * std::max(1.0, std::abs(p.scalar))) {
    p.e = Sym2(chart.dim());
    p.norm_e = 0.0;
  }
  return p;
}

/// Evaluates the pinching integrand on a chart whose scalar curvature has been audited once.
class PinchEvaluator {
 public:
  explicit PinchEvaluator(MetricChart chart, const PinchOptions& opt = {})
      : chart_(std::move(chart)),
        opt_(opt),
        audit_(audit_constant_scalar(chart_, opt.audit_samples, opt.audit_tol, opt.seed)) {}

  const ScalarAudit& audit() const { return audit_; }
  const MetricChart& chart() const { return chart_; }

  double operator()(const Point& x) const {
    const PointData p = point_data(chart_, x, opt_.null_tol);
    return pinch_integrand(chart_.dim(), p.scalar, p.norm_e);
  }

 private:
  MetricChart chart_;
  PinchOptions opt_;
  ScalarAudit audit_;
};

inline double pinch_integrand_at(const MetricChart& chart, const Point& x) {
  return PinchEvaluator(chart)(x);
}

struct RegPoint {
  double eps = 0.0;
  double value = 0.0;
  double error = 0.0;  // order-doubling change
  double scale = 0.0;  // integral of the absolute integrand
};

struct PinchReport {
  std::string model;
  int n = 0;
  double P = 0.0;
  double P_error = 0.0;
  int nodes = 0;
  double scale = 0.0;           // integral of |E|^{(n-2)/n} |R|
  double max_integrand = 0.0;   // max pointwise |integrand|
  double pointwise_scale = 0.0; // max pointwise |R| |E|^{(n-2)/n}
  double volume = 0.0;
  double min_norm_e = 0.0;
  double max_norm_e = 0.0;
  ScalarAudit audit;
  std::vector<RegPoint> reg_series;
  double pattern_fraction = 0.0;
  double min_lambda = 0.0;
  double max_okumura_gap = 0.0;
  int scan_samples = 0;
};

namespace detail {

/// Orthonormal-frame trace-free Ricci data of a warped product at t.
struct WarpFrame {
  double scalar = 0.0;
  double e_t = 0.0;      // E(e_t, e_t)
  double e_fiber = 0.0;  // fiber eigenvalue, multiplicity n-1
  double norm_e = 0.0;
  double weight = 0.0;   // F^{n-1}
};

inline WarpFrame warp_frame(int n, const WarpProfile& profile, double t) {
  const WarpProfile::Value v = profile(t);
  const WarpCurvature c = closed_form_curvature(n, v);
  WarpFrame w;
  w.scalar = c.scalar;
  w.e_t = c.ricci_t - c.scalar / n;
  w.e_fiber = c.ricci_fiber - c.scalar / n;
  w.norm_e = std::sqrt(w.e_t * w.e_t + (n - 1.0) * w.e_fiber * w.e_fiber);
  w.weight = std::pow(v.f, n - 1);
  return w;
}

inline Sym2 frame_e(int n, const WarpFrame& w) {
  std::vector<double> d(n, w.e_fiber);
  d[0] = w.e_t;
  return Sym2::diagonal(d);
}

/// Q f_eps^{-(n+2)/n} with Q from the conformally flat Riemann tensor in an orthonormal frame.
inline double regularized_integrand(int n, const Sym2& e, double scalar, double eps) {
  const Sym2 g = Sym2::identity(n);
  const Curv4 riem = cf_riemann_from_ricci(g, e, scalar);
  const Sym2 ric = e + (scalar / n) * g;
  const double q = q_invariant(g, riem, ric, e).direct;
  return q * std::pow(std::max(norm(g, e), eps), -(n + 2.0) / n);
}

/// Periodic trapezoid over [0, period) with node doubling.
template <class F>
RegPoint periodic_trapezoid(F&& f, double period, const PinchOptions& opt, double tol_scale,
                            int* nodes_out = nullptr) {
  auto sum = [&](int m) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += f(period * j / m);
    return s * period / m;
  };
  int m = opt.start_nodes;
  double prev = sum(m);
  while (true) {
    const double cur = sum(2 * m);
    m *= 2;
    const double err = std::abs(cur - prev);
    if (err <= opt.quad_tol * std::max(1.0, tol_scale) || 2 * m > opt.max_nodes) {
      if (nodes_out) *nodes_out = m;
      return {0.0, cur, err, 0.0};
    }
    prev = cur;
  }
}

inline void sphere_functional(const ModelSpec& spec, const MetricChart& chart,
                              const PinchOptions& opt, PinchReport& rep) {
  const int n = spec.n;
  const double rho = std::get<SphereModel>(spec.kind).radius;
  rep.volume = unit_sphere_area(n) * std::pow(rho, n);
  std::mt19937_64 rng(opt.seed + 1);
  const std::vector<Point> pts =
      sample_points(chart, opt.scan_samples, rng, chart.curvature_reach());
  double mean = 0.0, mean_scale = 0.0;
  rep.min_norm_e = INFINITY;
  for (const Point& x : pts) {
    const PointData p = point_data(chart, x, opt.null_tol);
    const double v = pinch_integrand(n, p.scalar, p.norm_e);
    mean += v;
    const double s = p.norm_e == 0.0 ? 0.0 : std::pow(p.norm_e, (n - 2.0) / n) * std::abs(p.scalar);
    mean_scale += s;
    rep.max_integrand = std::max(rep.max_integrand, std::abs(v));
    rep.pointwise_scale = std::max(rep.pointwise_scale, s);
    rep.min_norm_e = std::min(rep.min_norm_e, p.norm_e);
    rep.max_norm_e = std::max(rep.max_norm_e, p.norm_e);
  }
  rep.P = mean / pts.size() * rep.volume;
  rep.scale = mean_scale / pts.size() * rep.volume;
  rep.nodes = static_cast<int>(pts.size());
}

inline void warped_functional(const ModelSpec& spec, const PinchOptions& opt, PinchReport& rep) {
  const int n = spec.n;
  const WarpProfile profile = warp_profile(spec);
  const double area = unit_sphere_area(n - 1);
  const double period = profile.period();
  const int probe = 4096;
  rep.min_norm_e = INFINITY;
  for (int j = 0; j < probe; ++j) {
    const WarpFrame w = warp_frame(n, profile, period * j / probe);
    const double v = pinch_integrand(n, w.scalar, w.norm_e);
    rep.max_integrand = std::max(rep.max_integrand, std::abs(v));
    rep.pointwise_scale =
        std::max(rep.pointwise_scale, std::pow(w.norm_e, (n - 2.0) / n) * std::abs(w.scalar));
    rep.min_norm_e = std::min(rep.min_norm_e, w.norm_e);
    rep.max_norm_e = std::max(rep.max_norm_e, w.norm_e);
  }
  if (!(rep.min_norm_e > 0.0)) throw GeometryError("trace-free Ricci vanishes on the warped model");

  auto volume = [&](double t) { return area * warp_frame(n, profile, t).weight; };
  auto scale = [&](double t) {
    const WarpFrame w = warp_frame(n, profile, t);
    return area * w.weight * std::pow(w.norm_e, (n - 2.0) / n) * std::abs(w.scalar);
  };
  auto integrand = [&](double t) {
    const WarpFrame w = warp_frame(n, profile, t);
    return area * w.weight * pinch_integrand(n, w.scalar, w.norm_e);
  };
  rep.volume = periodic_trapezoid(volume, period, opt, 1.0).value;
  rep.scale = periodic_trapezoid(scale, period, opt, 1.0).value;
  const RegPoint p = periodic_trapezoid(integrand, period, opt, rep.scale, &rep.nodes);
  rep.P = p.value;
  rep.P_error = p.error;
}

}  // namespace detail

/// P = integral of |E|^{(n-2)/n}(R - sqrt(n(n-1))|E|) dV over a sphere, product or warped model.
inline PinchReport pinch_functional(const ModelSpec& spec, const PinchOptions& opt = {}) {
  PinchReport rep;
  rep.model = kind_name(spec);
  rep.n = spec.n;
  if (std::holds_alternative<ConformalModel>(spec.kind))
    throw GeometryError("pinching functional needs a sphere, product or warped model");
  const MetricChart chart = build_chart(spec);
  rep.audit = audit_constant_scalar(chart, opt.audit_samples, opt.audit_tol, opt.seed);
  if (std::holds_alternative<SphereModel>(spec.kind))
    detail::sphere_functional(spec, chart, opt, rep);
  else
    detail::warped_functional(spec, opt, rep);
  return rep;
}

/// Integral of Q f_eps^{-(n+2)/n} dV with f_eps = max(|E|, eps).
inline RegPoint regularized_prop_integral(const ModelSpec& spec, double eps,
                                          const PinchOptions& opt = {}) {
  if (!(eps > 0.0)) throw GeometryError("epsilon must be positive");
  if (std::holds_alternative<ConformalModel>(spec.kind))
    throw GeometryError("regularized integral needs a sphere, product or warped model");
  const int n = spec.n;
  const MetricChart chart = build_chart(spec);
  audit_constant_scalar(chart, opt.audit_samples, opt.audit_tol, opt.seed);
  if (const auto* s = std::get_if<SphereModel>(&spec.kind)) {
    std::mt19937_64 rng(opt.seed + 1);
    const std::vector<Point> pts =
        sample_points(chart, opt.scan_samples, rng, chart.curvature_reach());
    double mean = 0.0, mean_abs = 0.0;
    for (const Point& x : pts) {
      const PointData p = point_data(chart, x, opt.null_tol);
      const Sym2 ric = p.e + (p.scalar / n) * p.metric;
      const Curv4 riem = cf_riemann_from_ricci(p.metric, p.e, p.scalar);
      const double v = q_invariant(p.metric, riem, ric, p.e).direct *
                       std::pow(std::max(p.norm_e, eps), -(n + 2.0) / n);
      mean += v;
      mean_abs += std::abs(v);
    }
    const double vol = unit_sphere_area(n) * std::pow(s->radius, n);
    return {eps, mean / pts.size() * vol, 0.0, mean_abs / pts.size() * vol};
  }
  const WarpProfile profile = warp_profile(spec);
  const double area = unit_sphere_area(n - 1);
  auto integrand = [&](double t) {
    const detail::WarpFrame w = detail::warp_frame(n, profile, t);
    return area * w.weight * detail::regularized_integrand(n, detail::frame_e(n, w), w.scalar, eps);
  };
  // Tolerance scale only: |integrand| is not smooth, so no refinement.
  double scale = 0.0;
  for (int j = 0; j < opt.start_nodes; ++j)
    scale += std::abs(integrand(profile.period() * j / opt.start_nodes));
  scale *= profile.period() / opt.start_nodes;
  RegPoint r = detail::periodic_trapezoid(integrand, profile.period(), opt, scale);
  r.eps = eps;
  r.scale = scale;
  return r;
}

struct ScanResult {
  double pattern_fraction = 0.0;
  double min_lambda = 0.0;
  double max_okumura_gap = 0.0;  // relative to max(1, |E|^3)
  int samples = 0;
};

/// Classifies E at sampled chart points and records the Okumura gap.
inline ScanResult equality_case_scan(const ModelSpec& spec, int samples,
                                     const PinchOptions& opt = {}) {
  const MetricChart chart = build_chart(spec);
  audit_constant_scalar(chart, opt.audit_samples, opt.audit_tol, opt.seed);
  std::mt19937_64 rng(opt.seed + 2);
  const std::vector<Point> pts = sample_points(chart, samples, rng, chart.curvature_reach());
  ScanResult out;
  out.samples = samples;
  out.min_lambda = INFINITY;
  int hits = 0;
  for (const Point& x : pts) {
    const PointData p = point_data(chart, x, opt.null_tol);
    const EigenPattern pat = eigen_pattern(p.metric, p.e, opt.pattern_tol);
    if (pat.kind != PatternKind::Other) ++hits;
    if (pat.kind == PatternKind::Pattern) out.min_lambda = std::min(out.min_lambda, pat.lambda);
    if (pat.kind == PatternKind::Null) out.min_lambda = std::min(out.min_lambda, 0.0);
    const double gap = okumura_gap(p.metric, trace_free(p.metric, p.e));
    out.max_okumura_gap =
        std::max(out.max_okumura_gap, std::abs(gap) / std::max(1.0, std::pow(p.norm_e, 3)));
  }
  out.pattern_fraction = static_cast<double>(hits) / samples;
  return out;
}

/// Functional, regularized series and equality scan in one report.
inline PinchReport pinch_report(const ModelSpec& spec, const std::vector<double>& eps,
                                const PinchOptions& opt = {}) {
  PinchReport rep = pinch_functional(spec, opt);
  for (double e : eps) rep.reg_series.push_back(regularized_prop_integral(spec, e, opt));
  const ScanResult s = equality_case_scan(spec, opt.scan_samples, opt);
  rep.pattern_fraction = s.pattern_fraction;
  rep.min_lambda = s.min_lambda;
  rep.max_okumura_gap = s.max_okumura_gap;
  rep.scan_samples = s.samples;
  return rep;
}

}  // namespace confpinch
