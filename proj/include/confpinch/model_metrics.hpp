#pragma once

// Model geometries as coordinate charts: the round sphere (stereographic),
// the product S^1 x S^{n-1}, warped products dt^2 + F(t)^2 g_{S^{n-1}} and
// conformally flat charts e^{2 phi} delta on a box.

#include "confpinch/chart_geometry.hpp"
#include "confpinch/derdzinski.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace confpinch {

/// Periodic warping function as a trigonometric series
/// F(t) = a0 + sum_k a_k cos(k w t) + b_k sin(k w t), w = 2 pi / period.
class WarpProfile {
 public:
  struct Value {
    double f = 0.0;
    double df = 0.0;
    double ddf = 0.0;
  };

  WarpProfile() = default;

  static WarpProfile constant(double r, double period) {
    if (!(r > 0.0)) throw GeometryError("warping function must be positive");
    return fourier(period, r, {}, {});
  }

  static WarpProfile fourier(double period, double a0, std::vector<double> cos_coeffs,
                             std::vector<double> sin_coeffs) {
    if (!(period > 0.0)) throw GeometryError("period must be positive");
    WarpProfile p;
    p.period_ = period;
    p.a0_ = a0;
    const std::size_t k = std::max(cos_coeffs.size(), sin_coeffs.size());
    cos_coeffs.resize(k, 0.0);
    sin_coeffs.resize(k, 0.0);
    p.a_ = std::move(cos_coeffs);
    p.b_ = std::move(sin_coeffs);
    return p;
  }

  /// Trigonometric interpolant of uniform samples f(j * period / N), j < N.
  static WarpProfile interpolate(double period, const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 4) throw GeometryError("too few samples to interpolate");
    std::vector<double> cs(n), sn(n);
    for (int m = 0; m < n; ++m) {
      cs[m] = std::cos(2.0 * M_PI * m / n);
      sn[m] = std::sin(2.0 * M_PI * m / n);
    }
    double a0 = 0.0;
    for (double v : samples) a0 += v;
    a0 /= n;
    const int kmax = n / 2;
    std::vector<double> a(kmax, 0.0), b(kmax, 0.0);
    for (int k = 1; k <= kmax; ++k) {
      double sa = 0.0, sb = 0.0;
      for (int j = 0; j < n; ++j) {
        const int m = static_cast<int>((static_cast<long long>(k) * j) % n);
        sa += samples[j] * cs[m];
        sb += samples[j] * sn[m];
      }
      const bool nyquist = (n % 2 == 0) && k == kmax;
      a[k - 1] = (nyquist ? 1.0 : 2.0) * sa / n;
      b[k - 1] = nyquist ? 0.0 : 2.0 * sb / n;
    }
    // drop the tail below sample noise
    double peak = 0.0;
    for (double v : samples) peak = std::max(peak, std::abs(v));
    const double floor = 2e-15 * peak;
    int keep = kmax;
    while (keep > 0 && std::abs(a[keep - 1]) <= floor && std::abs(b[keep - 1]) <= floor) --keep;
    a.resize(keep);
    b.resize(keep);
    return fourier(period, a0, std::move(a), std::move(b));
  }

  static WarpProfile from_solution(const WarpSolution& s) { return interpolate(s.period, s.f); }

  double period() const { return period_; }
  double mean() const { return a0_; }
  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }

  Value operator()(double t) const {
    const double w = 2.0 * M_PI / period_;
    const double c1 = std::cos(w * t), s1 = std::sin(w * t);
    double ck = 1.0, sk = 0.0;
    Value v{a0_, 0.0, 0.0};
    for (std::size_t k = 1; k <= a_.size(); ++k) {
      const double cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
      const double kw = k * w;
      v.f += a_[k - 1] * ck + b_[k - 1] * sk;
      v.df += kw * (b_[k - 1] * ck - a_[k - 1] * sk);
      v.ddf -= kw * kw * (a_[k - 1] * ck + b_[k - 1] * sk);
    }
    return v;
  }

  double min_on_grid(int m) const {
    double lo = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) lo = std::min(lo, (*this)(period_ * j / m).f);
    return lo;
  }

 private:
  double period_ = 1.0;
  double a0_ = 1.0;
  std::vector<double> a_;
  std::vector<double> b_;
};

/// Max |interpolant(N) - samples(2N)| at the odd points of the finer grid.
inline double interpolation_error(const WarpSolution& coarse, const WarpSolution& fine) {
  const WarpProfile p = WarpProfile::from_solution(coarse);
  double m = 0.0;
  for (int j = 1; j < fine.size(); j += 2) m = std::max(m, std::abs(p(fine.t[j]).f - fine.f[j]));
  return m;
}

struct ResolvedWarp {
  WarpSolution solution;
  double interpolation_error = 0.0;
};

/// Doubles the grid from `start` until the trigonometric interpolant of the
/// coarse grid reproduces the fine grid within `budget`; returns the fine grid.
inline ResolvedWarp resolve_warp(const WarpODE& ode, int start = 128, double budget = 1e-9,
                                 int max_grid = 1 << 14) {
  WarpSolution coarse = solve(ode, start);
  for (int n = start; 2 * n <= max_grid; n *= 2) {
    WarpSolution fine = solve(ode, 2 * n);
    const double err = interpolation_error(coarse, fine);
    if (err <= budget) return {std::move(fine), err};
    coarse = std::move(fine);
  }
  throw GeometryError("warp interpolation budget not met");
}

// ---------------------------------------------------------------------------
// Conformal factors.

struct PhiTerm {
  enum class Kind { Monomial, Sine, Cosine };
  Kind kind = Kind::Monomial;
  double coef = 0.0;
  std::vector<int> powers;   // Monomial: exponent per axis
  std::vector<double> wave;  // Sine/Cosine: wave vector
  double phase = 0.0;

  friend bool operator==(const PhiTerm&, const PhiTerm&) = default;
};

inline const char* to_string(PhiTerm::Kind k) {
  switch (k) {
    case PhiTerm::Kind::Monomial: return "monomial";
    case PhiTerm::Kind::Sine: return "sin";
    case PhiTerm::Kind::Cosine: return "cos";
  }
  return "monomial";
}

inline double phi_value(const std::vector<PhiTerm>& terms, const Point& x) {
  double v = 0.0;
  for (const PhiTerm& t : terms) {
    if (t.kind == PhiTerm::Kind::Monomial) {
      double m = t.coef;
      for (std::size_t a = 0; a < t.powers.size(); ++a) m *= std::pow(x(a), t.powers[a]);
      v += m;
    } else {
      double arg = t.phase;
      for (std::size_t a = 0; a < t.wave.size(); ++a) arg += t.wave[a] * x(a);
      v += t.coef * (t.kind == PhiTerm::Kind::Sine ? std::sin(arg) : std::cos(arg));
    }
  }
  return v;
}

inline Eigen::VectorXd phi_gradient(const std::vector<PhiTerm>& terms, const Point& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (const PhiTerm& t : terms) {
    if (t.kind == PhiTerm::Kind::Monomial) {
      for (std::size_t a = 0; a < t.powers.size(); ++a) {
        if (t.powers[a] == 0) continue;
        double m = t.coef * t.powers[a];
        for (std::size_t b = 0; b < t.powers.size(); ++b)
          m *= std::pow(x(b), b == a ? t.powers[b] - 1 : t.powers[b]);
        g(a) += m;
      }
    } else {
      double arg = t.phase;
      for (std::size_t a = 0; a < t.wave.size(); ++a) arg += t.wave[a] * x(a);
      const double d = t.kind == PhiTerm::Kind::Sine ? t.coef * std::cos(arg) : -t.coef * std::sin(arg);
      for (std::size_t a = 0; a < t.wave.size(); ++a) g(a) += t.wave[a] * d;
    }
  }
  return g;
}

/// Christoffel symbols of e^{2 phi} delta: d_j phi delta^k_i + d_i phi delta^k_j - delta_ij d_k phi.
inline Christoffel conformal_christoffel(const Eigen::VectorXd& dphi) {
  const int n = static_cast<int>(dphi.size());
  Christoffel g(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g(k, i, j) = (k == i ? dphi(j) : 0.0) + (k == j ? dphi(i) : 0.0) - (i == j ? dphi(k) : 0.0);
  return g;
}

// ---------------------------------------------------------------------------
// Model specifications.

struct SphereModel {
  double radius = 1.0;
  friend bool operator==(const SphereModel&, const SphereModel&) = default;
};

struct ProductModel {
  double length = 2.0 * M_PI;  // circle length L
  double fiber_radius = 1.0;   // r
  friend bool operator==(const ProductModel&, const ProductModel&) = default;
};

struct FourierSource {
  double period = 2.0 * M_PI;
  double a0 = 1.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  friend bool operator==(const FourierSource&, const FourierSource&) = default;
};

struct DerdzinskiSource {
  double R = 6.0;
  double C = 0.0;
  int grid = 0;  // 0: refine until the interpolation budget is met
  friend bool operator==(const DerdzinskiSource&, const DerdzinskiSource&) = default;
};

struct TableSource {
  std::string path;
  friend bool operator==(const TableSource&, const TableSource&) = default;
};

using WarpSource = std::variant<FourierSource, DerdzinskiSource, TableSource>;

struct WarpedModel {
  WarpSource source;
  WarpProfile profile;         // materialized from source
  std::optional<WarpODE> ode;  // set for Derdzinski profiles
};

struct ConformalModel {
  std::vector<PhiTerm> phi;
  double half_width = 1.0;
  friend bool operator==(const ConformalModel&, const ConformalModel&) = default;
};

struct ModelSpec {
  int n = 4;
  std::variant<SphereModel, ProductModel, WarpedModel, ConformalModel> kind;
  double fd_step = 1e-3;  // relative to the chart's length scale
};

inline const char* kind_name(const ModelSpec& s) {
  switch (s.kind.index()) {
    case 0: return "sphere";
    case 1: return "product";
    case 2: return "warped";
    default: return "conformal";
  }
}

/// Relative table paths are resolved against `base_dir`.
inline WarpedModel make_warped_model(int n, WarpSource source,
                                     const std::filesystem::path& base_dir = {}) {
  WarpedModel m;
  m.source = source;
  if (const auto* f = std::get_if<FourierSource>(&source)) {
    m.profile = WarpProfile::fourier(f->period, f->a0, f->cos_coeffs, f->sin_coeffs);
  } else if (const auto* d = std::get_if<DerdzinskiSource>(&source)) {
    const WarpODE ode{n, d->R, d->C};
    m.ode = ode;
    m.profile = WarpProfile::from_solution(d->grid > 0 ? solve(ode, d->grid)
                                                       : resolve_warp(ode).solution);
  } else {
    const auto& t = std::get<TableSource>(source);
    std::filesystem::path path(t.path);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw GeometryError("cannot open warp table: " + path.string());
    const WarpSolution s = read_table(in);
    if (s.ode.n != n) throw GeometryError("warp table dimension does not match model");
    m.ode = s.ode;
    m.profile = WarpProfile::from_solution(s);
  }
  return m;
}

inline ModelSpec sphere_model(int n, double radius) { return {n, SphereModel{radius}}; }
inline ModelSpec product_model(int n, double length, double r) {
  return {n, ProductModel{length, r}};
}
inline ModelSpec derdzinski_model(int n, double R, double C, int grid = 0) {
  return {n, make_warped_model(n, DerdzinskiSource{R, C, grid})};
}
inline ModelSpec derdzinski_model(const WarpSolution& s) {
  WarpedModel m;
  m.source = DerdzinskiSource{s.ode.R, s.ode.C, s.size()};
  m.profile = WarpProfile::from_solution(s);
  m.ode = s.ode;
  return {s.ode.n, m};
}
inline ModelSpec conformal_model(int n, std::vector<PhiTerm> phi, double half_width = 1.0) {
  return {n, ConformalModel{std::move(phi), half_width}};
}

/// Profile of a product or warped model.
inline WarpProfile warp_profile(const ModelSpec& spec) {
  if (const auto* p = std::get_if<ProductModel>(&spec.kind))
    return WarpProfile::constant(p->fiber_radius, p->length);
  if (const auto* w = std::get_if<WarpedModel>(&spec.kind)) return w->profile;
  throw GeometryError("model is not a warped product");
}

inline void validate(const ModelSpec& spec) {
  Dim{spec.n};
  if (!(spec.fd_step > 0.0)) throw GeometryError("fd_step must be positive");
  if (const auto* s = std::get_if<SphereModel>(&spec.kind)) {
    if (!(s->radius > 0.0)) throw GeometryError("sphere radius must be positive");
  } else if (const auto* p = std::get_if<ProductModel>(&spec.kind)) {
    if (!(p->length > 0.0) || !(p->fiber_radius > 0.0))
      throw GeometryError("product lengths must be positive");
  } else if (const auto* w = std::get_if<WarpedModel>(&spec.kind)) {
    if (!(w->profile.min_on_grid(1024) > 0.0)) throw GeometryError("warping function must be positive");
  } else {
    const auto& c = std::get<ConformalModel>(spec.kind);
    if (!(c.half_width > 0.0)) throw GeometryError("conformal box must be non-empty");
    for (const PhiTerm& t : c.phi)
      if (static_cast<int>(t.powers.size()) > spec.n || static_cast<int>(t.wave.size()) > spec.n)
        throw GeometryError("conformal term references a missing axis");
  }
}

namespace detail {

inline MetricChart warped_chart(int n, const WarpProfile& profile, double fd_step, std::string label) {
  std::vector<Axis> box;
  box.push_back({0.0, profile.period(), true});
  for (int a = 1; a < n; ++a) box.push_back({-2.0, 2.0, false});

  // Fiber: unit S^{n-1} in stereographic coordinates, h = e^{2 psi} delta,
  // psi = log(2 / (1 + |y|^2)).
  auto metric = [n, profile](const Point& x) {
    const double f = profile(x(0)).f;
    const double y2 = x.tail(n - 1).squaredNorm();
    const double sigma = 4.0 / ((1.0 + y2) * (1.0 + y2));
    Sym2 g(n);
    g.set(0, 0, 1.0);
    for (int a = 1; a < n; ++a) g.set(a, a, f * f * sigma);
    return g;
  };
  auto christoffel = [n, profile](const Point& x) {
    const WarpProfile::Value v = profile(x(0));
    const double y2 = x.tail(n - 1).squaredNorm();
    const double sigma = 4.0 / ((1.0 + y2) * (1.0 + y2));
    Christoffel G(n);
    for (int a = 1; a < n; ++a) {
      G(0, a, a) = -v.f * v.df * sigma;
      G(a, 0, a) = v.df / v.f;
      G(a, a, 0) = v.df / v.f;
    }
    for (int k = 1; k < n; ++k)
      for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
          auto dpsi = [&](int a) { return -2.0 * x(a) / (1.0 + y2); };
          G(k, i, j) = (k == i ? dpsi(j) : 0.0) + (k == j ? dpsi(i) : 0.0) - (i == j ? dpsi(k) : 0.0);
        }
    return G;
  };
  // t scale: smallest fiber radius
  const double scale = std::min(1.0, profile.min_on_grid(1024));
  return MetricChart(std::move(box), metric, MetricChart::ChristoffelFn(christoffel), fd_step * scale,
                     SampleBall{1, 1.8}, std::move(label));
}

}  // namespace detail

inline MetricChart build_chart(const ModelSpec& spec) {
  validate(spec);
  const int n = spec.n;
  if (const auto* s = std::get_if<SphereModel>(&spec.kind)) {
    const double rho = s->radius;
    std::vector<Axis> box(n, Axis{-2.0 * rho, 2.0 * rho, false});
    // g = 4 rho^4 / (rho^2 + |x|^2)^2 delta = e^{2 phi} delta, phi = log(2 rho^2 / (rho^2 + |x|^2)).
    auto metric = [n, rho](const Point& x) {
      const double d = rho * rho + x.squaredNorm();
      const double c = 4.0 * std::pow(rho, 4) / (d * d);
      Sym2 g(n);
      for (int a = 0; a < n; ++a) g.set(a, a, c);
      return g;
    };
    auto christoffel = [rho](const Point& x) {
      return conformal_christoffel(-2.0 * x / (rho * rho + x.squaredNorm()));
    };
    return MetricChart(std::move(box), metric, MetricChart::ChristoffelFn(christoffel),
                       spec.fd_step * rho, SampleBall{0, 1.8 * rho}, "sphere");
  }
  if (const auto* p = std::get_if<ProductModel>(&spec.kind))
    return detail::warped_chart(n, WarpProfile::constant(p->fiber_radius, p->length),
                                spec.fd_step, "product");
  if (const auto* w = std::get_if<WarpedModel>(&spec.kind))
    return detail::warped_chart(n, w->profile, spec.fd_step, w->ode ? "derdzinski" : "warped");
  const auto& c = std::get<ConformalModel>(spec.kind);
  std::vector<Axis> box(n, Axis{-c.half_width, c.half_width, false});
  auto metric = [n, phi = c.phi](const Point& x) {
    const double e = std::exp(2.0 * phi_value(phi, x));
    Sym2 g(n);
    for (int a = 0; a < n; ++a) g.set(a, a, e);
    return g;
  };
  // No analytic Christoffel symbols: conformal charts exercise the pure finite-difference path.
  return MetricChart(std::move(box), metric, std::nullopt, spec.fd_step * c.half_width,
                     std::nullopt, "conformal");
}

struct WarpCurvature {
  double ricci_t = 0.0;      // Ric(d_t, d_t)
  double ricci_fiber = 0.0;  // fiber eigenvalue of Ric, multiplicity n-1
  double scalar = 0.0;
};

/// Closed-form Ricci eigenvalues and scalar curvature of dt^2 + F^2 g_{S^{n-1}}.
inline WarpCurvature closed_form_curvature(int n, const WarpProfile::Value& v) {
  WarpCurvature c;
  c.ricci_t = -(n - 1.0) * v.ddf / v.f;
  c.ricci_fiber = ((n - 2.0) * (1.0 - v.df * v.df) - v.f * v.ddf) / (v.f * v.f);
  c.scalar = -2.0 * (n - 1.0) * v.ddf / v.f + (n - 1.0) * (n - 2.0) * (1.0 - v.df * v.df) / (v.f * v.f);
  return c;
}

inline WarpCurvature closed_form_curvature(const ModelSpec& spec, double t) {
  return closed_form_curvature(spec.n, warp_profile(spec)(t));
}

}  // namespace confpinch
