#pragma once

// Verification suites shared by the command-line driver and the acceptance run.
// Each suite appends named checks to a Report.

#include "confpinch/chart_geometry.hpp"
#include "confpinch/corpus.hpp"
#include "confpinch/derdzinski.hpp"
#include "confpinch/model_metrics.hpp"
#include "confpinch/pinching.hpp"
#include "confpinch/report.hpp"
#include "confpinch/tensor_core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace confpinch {

class ToleranceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named tolerances; every check in the suites reads one of these.
class Tolerances {
 public:
  Tolerances()
      : v_{{"q_identity", 1e-10},     {"okumura_lower", 1e-12},  {"okumura_equality", 1e-10},
           {"okumura_strict", 1e-3},  {"algebra", 1e-12},        {"reassembly", 1e-14},
           {"weyl_trace", 1e-10},     {"schouten_trace", 1e-12}, {"metric_pd", 0.0},
           {"christoffel", 1e-6},     {"fd_symmetry", 1e-7},     {"weyl", 1e-6},
           {"cotton", 1e-6},          {"weyl_divergence", 1e-5}, {"reconstruction", 1e-6},
           {"closed_form", 1e-6},     {"fiber_invariance", 1e-8}, {"parallel_ricci", 1e-6},
           {"scalar_constancy", 1e-6}, {"codazzi", 1e-6},        {"elliptic", 1e-5},
           {"weitzenbock", 1e-5},     {"kato", 1e-7},            {"turning", 1e-12},
           {"period", 1e-8},          {"conserved", 1e-9},       {"closure", 1e-8},
           {"symmetry", 1e-8},        {"extremes", 1e-8},        {"interpolation", 1e-9},
           {"scalar_curvature", 1e-6}, {"pinch", 1e-6},          {"pinch_product", 1e-12},
           {"integrand_product", 1e-10}, {"cancellation", 1e-2}, {"quadrature", 1e-8},
           {"regularized", 1e-6},     {"cauchy", 1e-6},          {"pattern", 1e-8},
           {"lambda", 1e-8},          {"okumura_scan", 1e-8}} {}

  double operator[](const std::string& key) const {
    auto it = v_.find(key);
    if (it == v_.end()) throw ToleranceError("unknown tolerance '" + key + "'");
    return it->second;
  }

  void set(const std::string& key, double value) {
    auto it = v_.find(key);
    if (it == v_.end()) throw ToleranceError("unknown tolerance '" + key + "'");
    if (!(value >= 0.0) || !std::isfinite(value))
      throw ToleranceError("tolerance '" + key + "' must be a finite non-negative number");
    it->second = value;
  }

  /// Parses "key=value".
  void apply(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ToleranceError("expected key=value, got '" + kv + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ToleranceError("bad tolerance value in '" + kv + "'");
    }
    set(kv.substr(0, eq), value);
  }

  const std::map<std::string, double>& values() const { return v_; }

 private:
  std::map<std::string, double> v_;
};

struct SuiteConfig {
  std::uint64_t seed = 1;
  int samples = 10000;           // random tensors per dimension
  int algebra_samples = 1000;
  int chart_samples = 100;       // points per chart for curvature audits
  int identity_samples = 20;     // points per chart for Codazzi-type identities
  int pd_samples = 1000;
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  Tolerances tol;
};

// ---------------------------------------------------------------------------
// Random tensors.

namespace sample {

inline Sym2 symmetric(int n, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> N(0.0, sigma);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = N(rng);
  return Sym2::from_matrix(0.5 * (m + m.transpose()), 1e-12);
}

/// Identity plus a small symmetric perturbation (positive definite).
inline Sym2 metric(int n, std::mt19937_64& rng, double size = 0.2) {
  for (;;) {
    Sym2 g = Sym2::identity(n) + size * symmetric(n, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(g.matrix());
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.1)
      return g;
  }
}

inline Sym2 trace_free(const Sym2& g, std::mt19937_64& rng, double sigma = 1.0) {
  return confpinch::trace_free(g, symmetric(g.dim(), rng, sigma));
}

/// E = lambda g - n lambda (g u)(g u)^T with |u|_g = 1: eigenvalues lambda x (n-1), -(n-1) lambda.
inline Sym2 pattern(const Sym2& g, double lambda, std::mt19937_64& rng) {
  const int n = g.dim();
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u(i) = N(rng);
  u /= std::sqrt(u.dot(g.matrix() * u));
  const Eigen::VectorXd gu = g.matrix() * u;
  return Sym2::from_matrix(lambda * g.matrix() - n * lambda * gu * gu.transpose(), 1e-12);
}

/// Generic algebraic curvature tensor: a sum of Kulkarni-Nomizu products.
inline Curv4 curvature(int n, std::mt19937_64& rng, int terms = 3) {
  Curv4 r(n);
  for (int k = 0; k < terms; ++k) r += kulkarni_nomizu(symmetric(n, rng), symmetric(n, rng));
  return r;
}

}  // namespace sample

namespace detail {

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

/// FNV-1a, stable across platforms.
inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string tag(const std::string& base, int n) { return base + ".n" + std::to_string(n); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Algebraic identities.

/// -R_{ikjl}E_ijE_kl + R_jkE_ijE_ik = R|E|^2/(n-1) + n/(n-2) tr E^3 on conformally flat inputs.
inline void q_identity_suite(Report& rep, const SuiteConfig& cfg, const std::vector<int>& dims = {3, 4, 5, 6}) {
  for (int n : dims) {
    std::mt19937_64 rng(detail::mix(cfg.seed, 100 + n));
    std::uniform_real_distribution<double> U(-5.0, 20.0);
    double worst = 0.0;
    for (int s = 0; s < cfg.samples; ++s) {
      const Sym2 g = sample::metric(n, rng);
      const Sym2 e = sample::trace_free(g, rng);
      const double R = U(rng);
      const Curv4 riem = cf_riemann_from_ricci(g, e, R);
      const QInvariant q = q_invariant(g, riem, e + (R / n) * g, e);
      worst = std::max(worst, std::abs(q.direct - q.formula) / std::max(1.0, std::abs(q.direct)));
    }
    rep.at_most(detail::tag("q_identity", n), worst, cfg.tol["q_identity"]);
  }
}

/// tr E^3 >= -(n-2)/sqrt(n(n-1)) |E|^3 with equality on the (n-1, 1) pattern.
inline void okumura_suite(Report& rep, const SuiteConfig& cfg, const std::vector<int>& dims = {3, 4, 5, 6}) {
  for (int n : dims) {
    std::mt19937_64 rng(detail::mix(cfg.seed, 200 + n));
    std::uniform_real_distribution<double> mag(-2.0, 2.0);
    std::uniform_real_distribution<double> lam(0.0, 2.0);
    double lower = INFINITY, equality = 0.0, strict = INFINITY;
    for (int s = 0; s < cfg.samples; ++s) {
      const Sym2 g = sample::metric(n, rng);
      const Sym2 e = std::pow(10.0, mag(rng)) * sample::trace_free(g, rng);
      const double ne = norm(g, e);
      lower = std::min(lower, okumura_gap(g, e) / (ne * ne * ne));

      const double l = s == 0 ? 0.0 : lam(rng);
      const Sym2 p = sample::pattern(g, l, rng);
      const double np = norm(g, p);
      const double gp = okumura_gap(g, p);
      equality = std::max(equality, np == 0.0 ? std::abs(gp) : std::abs(gp) / (np * np * np));

      const Sym2 q = sample::pattern(g, -(l + 0.01), rng);
      const double nq = norm(g, q);
      strict = std::min(strict, okumura_gap(g, q) / (nq * nq * nq));
    }
    rep.at_least(detail::tag("okumura.lower", n), lower, -cfg.tol["okumura_lower"]);
    rep.at_most(detail::tag("okumura.equality", n), equality, cfg.tol["okumura_equality"]);
    rep.at_least(detail::tag("okumura.strict", n), strict, cfg.tol["okumura_strict"]);
  }
}

/// Curvature-tensor symmetries, Weyl decomposition and the Schouten trace law.
inline void algebra_suite(Report& rep, const SuiteConfig& cfg, const std::vector<int>& dims = {3, 4, 5, 6}) {
  for (int n : dims) {
    std::mt19937_64 rng(detail::mix(cfg.seed, 300 + n));
    std::uniform_real_distribution<double> U(-5.0, 20.0);
    double sym = 0.0, weyl_cf = 0.0, weyl_tr = 0.0, reas = 0.0, sch = 0.0;
    for (int s = 0; s < cfg.algebra_samples; ++s) {
      const Sym2 g = sample::metric(n, rng);
      const Sym2 e = sample::trace_free(g, rng);
      const double R = U(rng);
      const Sym2 ric = e + (R / n) * g;
      const Curv4 cf = cf_riemann_from_ricci(g, e, R);
      const double scale = std::max(1.0, cf.max_abs());
      sym = std::max({sym, pair_symmetry_defect(cf) / scale, antisymmetry_defect(cf) / scale,
                      bianchi_defect(cf) / scale, ricci_contraction_defect(g, cf, ric) / scale});
      weyl_cf = std::max(weyl_cf, weyl_from(g, cf, ric, R).max_abs() / scale);

      const Curv4 generic = sample::curvature(n, rng);
      const Sym2 gric = ricci_contraction(g, generic);
      const double gR = trace(g, gric);
      const Curv4 w = weyl_from(g, generic, gric, gR);
      const double gscale = std::max(1.0, generic.max_abs());
      weyl_tr = std::max(weyl_tr, weyl_trace_defect(g, w) / gscale);
      reas = std::max(reas, (reassemble(g, w, gric, gR) - generic).max_abs() / gscale);

      sch = std::max(sch, std::abs(trace(g, schouten(g, ric, R)) - R / (2.0 * (n - 1.0))) /
                              std::max(1.0, std::abs(R)));
    }
    rep.at_most(detail::tag("curv4.symmetries", n), sym, cfg.tol["algebra"]);
    rep.at_most(detail::tag("weyl.conformally_flat", n), weyl_cf, cfg.tol["algebra"]);
    rep.at_most(detail::tag("weyl.trace", n), weyl_tr, cfg.tol["weyl_trace"]);
    rep.at_most(detail::tag("weyl.reassembly", n), reas, cfg.tol["reassembly"]);
    rep.at_most(detail::tag("schouten.trace", n), sch, cfg.tol["schouten_trace"]);
  }
}

inline Report identities_report(const SuiteConfig& cfg) {
  Report rep("verify-identities");
  rep.parameters()["seed"] = cfg.seed;
  rep.parameters()["samples"] = cfg.samples;
  rep.parameters()["algebra_samples"] = cfg.algebra_samples;
  q_identity_suite(rep, cfg);
  okumura_suite(rep, cfg);
  algebra_suite(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// Chart identities.

/// Stencil reach needed by the deepest chart operation (rough Laplacian of a curvature field).
inline double full_reach(const MetricChart& chart) {
  return chart.curvature_reach() + 4.0 * chart.nested_step();
}

/// Weyl, Cotton, divergence of Weyl and the conformally flat reconstruction at sampled points.
inline void conformal_flatness_suite(Report& rep, const ChartEntry& entry, const SuiteConfig& cfg,
                                     Report::Json* data = nullptr) {
  const MetricChart chart = build_chart(entry.spec);
  const int n = chart.dim();
  const std::string p = entry.name + ".";
  std::mt19937_64 rng(detail::mix(cfg.seed, detail::name_hash(entry.name)));

  const std::vector<Point> pd = sample_points(chart, cfg.pd_samples, rng, 0.0);
  try {
    positive_definite_audit(chart, pd);
    rep.at_most(p + "metric_pd", 0.0, cfg.tol["metric_pd"]);
  } catch (const GeometryError& e) {
    rep.failed(p + "metric_pd", e.what());
  }

  const std::vector<Point> pts = sample_points(chart, cfg.chart_samples, rng, full_reach(chart));
  if (chart.has_analytic_christoffel())
    rep.at_most(p + "christoffel", christoffel_consistency(chart, pts), cfg.tol["christoffel"]);

  double sym = 0.0, weyl = 0.0, cotton = 0.0, wdiv = 0.0, recon = 0.0, closed = 0.0, wdiv_terms = 0.0;
  for (const Point& x : pts) {
    const CurvatureAt c = curvature_at(chart, x);
    const double scale = std::max(1.0, c.riemann.max_abs());
    sym = std::max({sym, pair_symmetry_defect(c.riemann) / scale, bianchi_defect(c.riemann) / scale,
                    ricci_contraction_defect(c.metric, c.riemann, c.ricci) / scale});
    weyl = std::max(weyl, weyl_from(c.metric, c.riemann, c.ricci, c.scalar).max_abs());
    cotton = std::max(cotton, cotton_at(chart, x).max_abs());
    const Sym2 e = trace_free(c.metric, c.ricci);
    recon = std::max(recon, (cf_riemann_from_ricci(c.metric, e, c.scalar) - c.riemann).max_abs());
    if (n >= 4) {
      const WeylDivergence d = weyl_divergence_at(chart, x);
      wdiv = std::max(wdiv, d.defect);
      wdiv_terms = std::max({wdiv_terms, d.divergence, d.cotton});
    }
    if (std::holds_alternative<ProductModel>(entry.spec.kind) ||
        std::holds_alternative<WarpedModel>(entry.spec.kind)) {
      const WarpCurvature w = closed_form_curvature(entry.spec, chart.wrap(x)(0));
      const double s = std::max({1.0, std::abs(w.ricci_t), std::abs(w.ricci_fiber)});
      double d = std::abs(c.ricci(0, 0) - w.ricci_t);
      for (int a = 1; a < n; ++a) d = std::max(d, std::abs(c.ricci(a, a) / c.metric(a, a) - w.ricci_fiber));
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) d = std::max(d, std::abs(c.ricci(a, b)));
      d = std::max(d, std::abs(c.scalar - w.scalar));
      closed = std::max(closed, d / s);
    }
  }
  rep.at_most(p + "fd_symmetry", sym, cfg.tol["fd_symmetry"]);
  rep.at_most(p + "weyl", weyl, cfg.tol["weyl"]);
  rep.at_most(p + "cotton", cotton, cfg.tol["cotton"]);
  rep.at_most(p + "reconstruction", recon, cfg.tol["reconstruction"]);
  if (n >= 4) rep.at_most(p + "weyl_divergence", wdiv, cfg.tol["weyl_divergence"]);
  if (std::holds_alternative<ProductModel>(entry.spec.kind) ||
      std::holds_alternative<WarpedModel>(entry.spec.kind)) {
    rep.at_most(p + "closed_form", closed, cfg.tol["closed_form"]);
    // Invariants at fixed t must not depend on the fiber point.
    double fiber = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size() && k < 10; k += 2) {
      Point a = pts[k], b = pts[k + 1];
      b(0) = a(0);
      const CurvatureAt ca = curvature_at(chart, a), cb = curvature_at(chart, b);
      const double na = norm(ca.metric, trace_free(ca.metric, ca.ricci));
      const double nb = norm(cb.metric, trace_free(cb.metric, cb.ricci));
      fiber = std::max({fiber, std::abs(na - nb) / std::max(1.0, na),
                        std::abs(ca.scalar - cb.scalar) / std::max(1.0, std::abs(ca.scalar))});
    }
    rep.at_most(p + "fiber_invariance", fiber, cfg.tol["fiber_invariance"]);
  }
  if (data) {
    Report::Json& d = (*data)[entry.name];
    d["kind"] = kind_name(entry.spec);
    d["n"] = n;
    d["samples"] = static_cast<int>(pts.size());
    d["max_weyl"] = weyl;
    d["max_cotton"] = cotton;
    if (n >= 4) d["max_weyl_divergence_term"] = wdiv_terms;
  }
}

/// Codazzi, elliptic, Weitzenbock and Kato identities for the trace-free Ricci and Schouten fields.
/// Charts whose scalar curvature is not constant are skipped (recorded in `data`).
inline void codazzi_suite(Report& rep, const ChartEntry& entry, const SuiteConfig& cfg,
                          Report::Json* data = nullptr) {
  const MetricChart chart = build_chart(entry.spec);
  const std::string p = entry.name + ".";
  std::mt19937_64 rng(detail::mix(cfg.seed, detail::name_hash(entry.name) + 1));
  ScalarAudit audit;
  try {
    audit = audit_constant_scalar(chart, cfg.identity_samples, cfg.tol["scalar_constancy"], cfg.seed);
  } catch (const GeometryError&) {
    if (data) (*data)[entry.name]["codazzi_suite"] = "skipped: scalar curvature not constant";
    return;
  }
  const std::vector<Point> pts = sample_points(chart, cfg.identity_samples, rng, full_reach(chart));
  const Sym2Field e = trace_free_ricci_field(chart);
  const Sym2Field a = schouten_field(chart);
  double cod = 0.0, ell = 0.0, wei = 0.0, kato = INFINITY, par = 0.0;
  int kato_points = 0;
  for (const Point& x : pts) {
    cod = std::max({cod, codazzi_terms_at(e, x).relative(), codazzi_terms_at(a, x).relative()});
    ell = std::max(ell, elliptic_terms_at(e, x).relative());
    wei = std::max(wei, weitzenbock_terms_at(e, x).relative());
    try {
      kato = std::min(kato, kato_terms_at(e, x).relative());
      ++kato_points;
    } catch (const GeometryError&) {
    }
    if (std::holds_alternative<ProductModel>(entry.spec.kind)) {
      const Deriv3 d = covariant_derivative_at(ricci_field(chart), x);
      par = std::max(par, d.max_abs() / std::max(1.0, ricci_at(chart, x).max_abs()));
    }
  }
  rep.at_most(p + "scalar_constancy", audit.stdev, cfg.tol["scalar_constancy"]);
  rep.at_most(p + "codazzi", cod, cfg.tol["codazzi"]);
  rep.at_most(p + "elliptic", ell, cfg.tol["elliptic"]);
  rep.at_most(p + "weitzenbock", wei, cfg.tol["weitzenbock"]);
  if (kato_points > 0) rep.at_least(p + "kato", kato, -cfg.tol["kato"]);
  if (std::holds_alternative<ProductModel>(entry.spec.kind))
    rep.at_most(p + "parallel_ricci", par, cfg.tol["parallel_ricci"]);
  if (data) {
    Report::Json& d = (*data)[entry.name];
    d["scalar_mean"] = audit.mean;
    d["kato_points"] = kato_points;
    if (kato_points > 0) d["min_kato_relative"] = kato;
  }
}

inline Report models_report(const Corpus& corpus, const SuiteConfig& cfg) {
  Report rep("verify-models");
  rep.parameters()["seed"] = cfg.seed;
  rep.parameters()["corpus"] = corpus.source;
  rep.parameters()["chart_samples"] = cfg.chart_samples;
  rep.parameters()["identity_samples"] = cfg.identity_samples;
  Report::Json data = Report::Json::object();
  for (const ChartEntry& e : corpus.charts) {
    conformal_flatness_suite(rep, e, cfg, &data);
    codazzi_suite(rep, e, cfg, &data);
  }
  rep.data()["charts"] = std::move(data);
  return rep;
}

// ---------------------------------------------------------------------------
// Warping functions.

struct DerdzinskiRun {
  WarpSolution solution;
  Report report{"derdzinski"};
};

/// Builds the warping function for (n, R, C) and validates it. `grid` = 0 refines automatically.
inline DerdzinskiRun derdzinski_run(const WarpODE& ode, int grid, const SuiteConfig& cfg) {
  DerdzinskiRun run;
  Report& rep = run.report;
  rep.parameters()["n"] = ode.n;
  rep.parameters()["R"] = ode.R;
  rep.parameters()["C"] = ode.C;
  rep.parameters()["grid"] = grid;
  rep.parameters()["seed"] = cfg.seed;

  const TurningPoints tp = turning_points(ode);
  rep.at_most("turning", std::max(potential_residual(ode, tp.f_min), potential_residual(ode, tp.f_max)),
              cfg.tol["turning"]);
  const PeriodEstimate per = period_estimate(ode);
  rep.at_most("period", per.error / per.value, cfg.tol["period"]);

  if (grid > 0) {
    run.solution = solve(ode, grid);
  } else {
    const ResolvedWarp r = resolve_warp(ode, 128, cfg.tol["interpolation"]);
    rep.at_most("interpolation", r.interpolation_error, cfg.tol["interpolation"]);
    run.solution = r.solution;
  }
  const WarpSolution& s = run.solution;
  rep.at_most("conserved", s.conserved_defect, cfg.tol["conserved"]);
  rep.at_most("closure", s.closure_defect, cfg.tol["closure"]);
  rep.at_most("symmetry", s.symmetry_defect, cfg.tol["symmetry"]);
  const auto [lo, hi] = std::minmax_element(s.f.begin(), s.f.end());
  rep.at_most("extremes", std::max(std::abs(*lo - tp.f_min), std::abs(*hi - tp.f_max)),
              cfg.tol["extremes"]);

  const ModelSpec spec = derdzinski_model(s);
  const MetricChart chart = build_chart(spec);
  std::mt19937_64 rng(detail::mix(cfg.seed, 500));
  const std::vector<Point> pts = sample_points(chart, 50, rng, chart.curvature_reach());
  double dev = 0.0, lambda = INFINITY;
  int patterns = 0;
  for (const Point& x : pts) {
    const CurvatureAt c = curvature_at(chart, x);
    dev = std::max(dev, std::abs(c.scalar - ode.R));
    const EigenPattern pat = eigen_pattern(c.metric, trace_free_part(c.metric, c.ricci, c.scalar),
                                           cfg.tol["pattern"]);
    if (pat.kind == PatternKind::Pattern) {
      ++patterns;
      lambda = std::min(lambda, pat.lambda);
    }
  }
  rep.at_most("scalar_curvature", dev, cfg.tol["scalar_curvature"]);
  rep.at_least("pattern_fraction", static_cast<double>(patterns) / pts.size(), 1.0);
  rep.at_least("lambda", lambda, -cfg.tol["lambda"]);

  Report::Json& d = rep.data();
  d["F_min"] = tp.f_min;
  d["F_max"] = tp.f_max;
  d["static_solution"] = static_solution(ode.n, ode.R);
  d["C_max"] = admissible_range(ode.n, ode.R).hi;
  d["period"] = s.period;
  d["period_nodes"] = per.nodes;
  d["grid"] = s.size();
  d["conserved_defect"] = s.conserved_defect;
  d["closure_defect"] = s.closure_defect;
  d["symmetry_defect"] = s.symmetry_defect;
  d["max_scalar_deviation"] = dev;
  return run;
}

// ---------------------------------------------------------------------------
// Pinching.

inline PinchOptions pinch_options(const SuiteConfig& cfg) {
  PinchOptions o;
  o.seed = cfg.seed;
  o.audit_tol = cfg.tol["scalar_constancy"];
  o.pattern_tol = cfg.tol["pattern"];
  o.scan_samples = std::max(cfg.chart_samples, 1);
  return o;
}

/// Records the pinching checks of one model under `prefix`.
inline PinchReport pinch_suite(Report& rep, const std::string& prefix, const ModelSpec& spec,
                               const SuiteConfig& cfg) {
  const PinchReport r = pinch_report(spec, cfg.eps, pinch_options(cfg));
  const std::string p = prefix.empty() ? "" : prefix + ".";
  const Tolerances& t = cfg.tol;
  rep.at_most(p + "scalar_constancy", r.audit.stdev, t["scalar_constancy"]);
  if (std::holds_alternative<SphereModel>(spec.kind)) {
    rep.at_most(p + "P", std::abs(r.P), 0.0, "exact zero");
  } else if (std::holds_alternative<ProductModel>(spec.kind)) {
    rep.at_most(p + "P", std::abs(r.P) / std::max(1.0, r.scale), t["pinch_product"]);
    rep.at_most(p + "max_integrand", r.max_integrand / std::max(1.0, r.pointwise_scale),
                t["integrand_product"]);
  } else {
    rep.at_most(p + "P", std::abs(r.P) / r.scale, t["pinch"]);
    rep.at_least(p + "cancellation", r.max_integrand / r.pointwise_scale, t["cancellation"]);
  }
  if (!std::holds_alternative<SphereModel>(spec.kind))
    rep.at_most(p + "quadrature", r.P_error / std::max(1.0, r.scale), t["quadrature"]);
  double cauchy = 0.0;
  for (std::size_t k = 0; k < r.reg_series.size(); ++k) {
    const RegPoint& q = r.reg_series[k];
    char label[32];
    std::snprintf(label, sizeof(label), "regularized.eps%g", q.eps);
    rep.at_most(p + label, std::abs(q.value) / std::max(1.0, q.scale), t["regularized"]);
    if (k > 0) cauchy = std::max(cauchy, std::abs(q.value - r.reg_series[k - 1].value) / std::max(1.0, q.scale));
  }
  if (r.reg_series.size() > 1) rep.at_most(p + "regularized.cauchy", cauchy, t["cauchy"]);
  rep.at_least(p + "pattern_fraction", r.pattern_fraction, 1.0);
  rep.at_least(p + "lambda", r.min_lambda, -t["lambda"]);
  rep.at_most(p + "okumura", r.max_okumura_gap, t["okumura_scan"]);
  return r;
}

inline Report::Json to_json(const PinchReport& r) {
  Report::Json j;
  j["model"] = r.model;
  j["n"] = r.n;
  j["P"] = r.P;
  j["P_error"] = r.P_error;
  j["nodes"] = r.nodes;
  j["scale"] = r.scale;
  j["max_integrand"] = r.max_integrand;
  j["pointwise_scale"] = r.pointwise_scale;
  j["volume"] = r.volume;
  j["min_norm_E"] = r.min_norm_e;
  j["max_norm_E"] = r.max_norm_e;
  j["scalar_mean"] = r.audit.mean;
  j["scalar_stdev"] = r.audit.stdev;
  Report::Json reg = Report::Json::array();
  for (const RegPoint& q : r.reg_series)
    reg.push_back({{"eps", q.eps}, {"value", q.value}, {"error", q.error}, {"scale", q.scale}});
  j["regularized"] = std::move(reg);
  j["pattern_fraction"] = r.pattern_fraction;
  j["min_lambda"] = Report::number(r.min_lambda);
  j["max_okumura_gap"] = r.max_okumura_gap;
  j["scan_samples"] = r.scan_samples;
  return j;
}

}  // namespace confpinch
