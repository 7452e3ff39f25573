#pragma once

// Chart corpus: a YAML list of named model specifications.
//
//   version: 1
//   charts:
//     - name: sphere-4
//       kind: sphere            # sphere | product | warped | conformal
//       n: 4
//       fd_step: 0.001          # optional, relative to the chart length scale
//       radius: 1
//     - {name: product-4, kind: product, n: 4, length: 6.283185307179586, r: 1}
//     - name: derdzinski-4
//       kind: warped
//       n: 4
//       warp: {source: derdzinski, R: 6, C: 0.25, grid: 0}
//       # or {source: fourier, period: P, a0: A, cos: [...], sin: [...]}
//       # or {source: table, path: file}  (relative to the corpus file)
//     - name: conformal-4-a
//       kind: conformal
//       n: 4
//       half_width: 1
//       phi:
//         - {type: monomial, coef: 0.3, powers: [1, 1]}
//         - {type: sin, coef: 0.2, wave: [1, 0.5], phase: 0.3}

#include "confpinch/model_metrics.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace confpinch {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChartEntry {
  std::string name;
  ModelSpec spec;
};

struct Corpus {
  int version = 1;
  std::vector<ChartEntry> charts;
  std::string source = "built-in";

  const ChartEntry& find(const std::string& name) const {
    for (const ChartEntry& c : charts)
      if (c.name == name) return c;
    throw CorpusError("no chart named '" + name + "'");
  }
};

/// True when two specs describe the same chart (warped models compare by source).
inline bool same_spec(const ModelSpec& a, const ModelSpec& b) {
  if (a.n != b.n || a.fd_step != b.fd_step || a.kind.index() != b.kind.index()) return false;
  if (const auto* s = std::get_if<SphereModel>(&a.kind)) return *s == std::get<SphereModel>(b.kind);
  if (const auto* p = std::get_if<ProductModel>(&a.kind)) return *p == std::get<ProductModel>(b.kind);
  if (const auto* w = std::get_if<WarpedModel>(&a.kind)) return w->source == std::get<WarpedModel>(b.kind).source;
  return std::get<ConformalModel>(a.kind) == std::get<ConformalModel>(b.kind);
}

inline bool operator==(const Corpus& a, const Corpus& b) {
  if (a.version != b.version || a.charts.size() != b.charts.size()) return false;
  for (std::size_t i = 0; i < a.charts.size(); ++i)
    if (a.charts[i].name != b.charts[i].name || !same_spec(a.charts[i].spec, b.charts[i].spec))
      return false;
  return true;
}

namespace detail {

inline void allow_keys(const YAML::Node& node, std::initializer_list<const char*> keys,
                       const std::string& where) {
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const std::string k = kv.first.as<std::string>();
    if (!ok.count(k)) throw CorpusError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
T required(const YAML::Node& node, const char* key, const std::string& where) {
  if (!node[key]) throw CorpusError(where + ": missing key '" + key + "'");
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw CorpusError(where + ": bad value for '" + key + "'");
  }
}

template <class T>
T optional(const YAML::Node& node, const char* key, T fallback, const std::string& where) {
  return node[key] ? required<T>(node, key, where) : fallback;
}

inline PhiTerm parse_phi(const YAML::Node& t, const std::string& where) {
  if (!t.IsMap()) throw CorpusError(where + ": phi term must be a map");
  PhiTerm p;
  const std::string type = required<std::string>(t, "type", where);
  p.coef = required<double>(t, "coef", where);
  if (type == "monomial") {
    allow_keys(t, {"type", "coef", "powers"}, where);
    p.kind = PhiTerm::Kind::Monomial;
    p.powers = required<std::vector<int>>(t, "powers", where);
    for (int e : p.powers)
      if (e < 0) throw CorpusError(where + ": negative exponent");
  } else if (type == "sin" || type == "cos") {
    allow_keys(t, {"type", "coef", "wave", "phase"}, where);
    p.kind = type == "sin" ? PhiTerm::Kind::Sine : PhiTerm::Kind::Cosine;
    p.wave = required<std::vector<double>>(t, "wave", where);
    p.phase = optional<double>(t, "phase", 0.0, where);
  } else {
    throw CorpusError(where + ": unknown phi type '" + type + "'");
  }
  return p;
}

inline WarpSource parse_warp(const YAML::Node& w, const std::string& where) {
  if (!w.IsMap()) throw CorpusError(where + ": warp must be a map");
  const std::string src = required<std::string>(w, "source", where);
  if (src == "derdzinski") {
    allow_keys(w, {"source", "R", "C", "grid"}, where);
    return DerdzinskiSource{required<double>(w, "R", where), required<double>(w, "C", where),
                            optional<int>(w, "grid", 0, where)};
  }
  if (src == "fourier") {
    allow_keys(w, {"source", "period", "a0", "cos", "sin"}, where);
    return FourierSource{required<double>(w, "period", where), required<double>(w, "a0", where),
                         optional<std::vector<double>>(w, "cos", {}, where),
                         optional<std::vector<double>>(w, "sin", {}, where)};
  }
  if (src == "table") {
    allow_keys(w, {"source", "path"}, where);
    return TableSource{required<std::string>(w, "path", where)};
  }
  throw CorpusError(where + ": unknown warp source '" + src + "'");
}

inline ChartEntry parse_entry(const YAML::Node& c, std::size_t index,
                              const std::filesystem::path& base_dir) {
  std::string where = "chart " + std::to_string(index);
  if (!c.IsMap()) throw CorpusError(where + ": entry must be a map");
  ChartEntry e;
  e.name = required<std::string>(c, "name", where);
  where = "chart '" + e.name + "'";
  const std::string kind = required<std::string>(c, "kind", where);
  e.spec.n = required<int>(c, "n", where);
  e.spec.fd_step = optional<double>(c, "fd_step", 1e-3, where);
  if (kind == "sphere") {
    allow_keys(c, {"name", "kind", "n", "fd_step", "radius"}, where);
    e.spec.kind = SphereModel{required<double>(c, "radius", where)};
  } else if (kind == "product") {
    allow_keys(c, {"name", "kind", "n", "fd_step", "length", "r"}, where);
    e.spec.kind = ProductModel{required<double>(c, "length", where), required<double>(c, "r", where)};
  } else if (kind == "warped") {
    allow_keys(c, {"name", "kind", "n", "fd_step", "warp"}, where);
    if (!c["warp"]) throw CorpusError(where + ": missing key 'warp'");
    const WarpSource src = parse_warp(c["warp"], where);
    try {
      Dim{e.spec.n};
      e.spec.kind = make_warped_model(e.spec.n, src, base_dir);
    } catch (const GeometryError& err) {
      throw CorpusError(where + ": " + err.what());
    }
  } else if (kind == "conformal") {
    allow_keys(c, {"name", "kind", "n", "fd_step", "half_width", "phi"}, where);
    ConformalModel m;
    m.half_width = optional<double>(c, "half_width", 1.0, where);
    if (!c["phi"] || !c["phi"].IsSequence()) throw CorpusError(where + ": 'phi' must be a list");
    for (const auto& t : c["phi"]) m.phi.push_back(parse_phi(t, where));
    e.spec.kind = m;
  } else {
    throw CorpusError(where + ": unknown kind '" + kind + "'");
  }
  try {
    validate(e.spec);
  } catch (const GeometryError& err) {
    throw CorpusError(where + ": " + err.what());
  }
  return e;
}

}  // namespace detail

inline Corpus parse_corpus(const std::string& text, const std::filesystem::path& base_dir = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw CorpusError(std::string("malformed corpus: ") + e.what());
  }
  if (!root.IsMap()) throw CorpusError("corpus must be a map");
  detail::allow_keys(root, {"version", "charts"}, "corpus");
  Corpus out;
  out.version = detail::required<int>(root, "version", "corpus");
  if (out.version != 1) throw CorpusError("unsupported corpus version");
  const YAML::Node charts = root["charts"];
  if (!charts || !charts.IsSequence()) throw CorpusError("corpus: 'charts' must be a list");
  std::set<std::string> names;
  for (std::size_t i = 0; i < charts.size(); ++i) {
    ChartEntry e = detail::parse_entry(charts[i], i, base_dir);
    if (!names.insert(e.name).second) throw CorpusError("duplicate chart name '" + e.name + "'");
    out.charts.push_back(std::move(e));
  }
  return out;
}

inline Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read corpus: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Corpus c = parse_corpus(ss.str(), path.parent_path());
  c.source = path.string();
  return c;
}

namespace detail {

/// Shortest decimal text that reads back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::vector<std::string> shortest(const std::vector<double>& v) {
  std::vector<std::string> out;
  for (double x : v) out.push_back(shortest(x));
  return out;
}

}  // namespace detail

inline std::string emit_corpus(const Corpus& corpus) {
  using detail::shortest;
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "version" << YAML::Value << corpus.version;
  out << YAML::Key << "charts" << YAML::Value << YAML::BeginSeq;
  for (const ChartEntry& e : corpus.charts) {
    const ModelSpec& s = e.spec;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << e.name;
    out << YAML::Key << "kind" << YAML::Value << kind_name(s);
    out << YAML::Key << "n" << YAML::Value << s.n;
    out << YAML::Key << "fd_step" << YAML::Value << shortest(s.fd_step);
    if (const auto* sp = std::get_if<SphereModel>(&s.kind)) {
      out << YAML::Key << "radius" << YAML::Value << shortest(sp->radius);
    } else if (const auto* p = std::get_if<ProductModel>(&s.kind)) {
      out << YAML::Key << "length" << YAML::Value << shortest(p->length);
      out << YAML::Key << "r" << YAML::Value << shortest(p->fiber_radius);
    } else if (const auto* w = std::get_if<WarpedModel>(&s.kind)) {
      out << YAML::Key << "warp" << YAML::Value << YAML::Flow << YAML::BeginMap;
      if (const auto* d = std::get_if<DerdzinskiSource>(&w->source)) {
        out << YAML::Key << "source" << YAML::Value << "derdzinski";
        out << YAML::Key << "R" << YAML::Value << shortest(d->R);
        out << YAML::Key << "C" << YAML::Value << shortest(d->C);
        out << YAML::Key << "grid" << YAML::Value << d->grid;
      } else if (const auto* f = std::get_if<FourierSource>(&w->source)) {
        out << YAML::Key << "source" << YAML::Value << "fourier";
        out << YAML::Key << "period" << YAML::Value << shortest(f->period);
        out << YAML::Key << "a0" << YAML::Value << shortest(f->a0);
        out << YAML::Key << "cos" << YAML::Value << YAML::Flow << shortest(f->cos_coeffs);
        out << YAML::Key << "sin" << YAML::Value << YAML::Flow << shortest(f->sin_coeffs);
      } else {
        out << YAML::Key << "source" << YAML::Value << "table";
        out << YAML::Key << "path" << YAML::Value << std::get<TableSource>(w->source).path;
      }
      out << YAML::EndMap;
    } else {
      const auto& c = std::get<ConformalModel>(s.kind);
      out << YAML::Key << "half_width" << YAML::Value << shortest(c.half_width);
      out << YAML::Key << "phi" << YAML::Value << YAML::BeginSeq;
      for (const PhiTerm& t : c.phi) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "type" << YAML::Value << to_string(t.kind);
        out << YAML::Key << "coef" << YAML::Value << shortest(t.coef);
        if (t.kind == PhiTerm::Kind::Monomial) {
          out << YAML::Key << "powers" << YAML::Value << YAML::Flow << t.powers;
        } else {
          out << YAML::Key << "wave" << YAML::Value << YAML::Flow << shortest(t.wave);
          out << YAML::Key << "phase" << YAML::Value << shortest(t.phase);
        }
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

/// Five conformal factors used for every dimension of the built-in corpus.
inline std::vector<std::vector<PhiTerm>> default_conformal_factors() {
  using K = PhiTerm::Kind;
  return {
      {{K::Monomial, 0.3, {1}, {}, 0.0}, {K::Monomial, 0.2, {1, 1}, {}, 0.0}},
      {{K::Sine, 0.2, {}, {1.0, 0.5, -0.7}, 0.3}},
      {{K::Cosine, 0.15, {}, {0.8, -1.2, 0.4}, 0.0}, {K::Monomial, 0.1, {0, 2}, {}, 0.0}},
      {{K::Monomial, 0.1, {1, 1, 1}, {}, 0.0},
       {K::Monomial, 0.05, {3}, {}, 0.0},
       {K::Monomial, -0.08, {0, 0, 2}, {}, 0.0}},
      {{K::Sine, 0.1, {}, {0.5, 0.0, 1.1}, 0.0},
       {K::Cosine, 0.1, {}, {0.0, 1.3, 0.6}, 1.0},
       {K::Monomial, 0.05, {2, 1}, {}, 0.0}},
  };
}

/// Sphere, product, Derdzinski and five conformal charts for n = 3, 4, 5.
inline Corpus default_corpus() {
  Corpus c;
  const char* tags = "abcde";
  for (int n = 3; n <= 5; ++n) {
    const std::string sn = std::to_string(n);
    c.charts.push_back({"sphere-" + sn, sphere_model(n, 1.0)});
    c.charts.push_back({"product-" + sn, product_model(n, 2.0 * M_PI, 1.0)});
    const double R = (n - 1.0) * (n - 2.0);
    c.charts.push_back({"derdzinski-" + sn, derdzinski_model(n, R, 0.5 * admissible_range(n, R).hi)});
    const auto phis = default_conformal_factors();
    for (std::size_t k = 0; k < phis.size(); ++k)
      c.charts.push_back({"conformal-" + sn + "-" + tags[k], conformal_model(n, phis[k])});
  }
  return c;
}

/// Corpus named by `path`, else by CONFPINCH_CORPUS, else the built-in one.
inline Corpus resolve_corpus(const std::string& path) {
  if (!path.empty()) return load_corpus(path);
  if (const char* env = std::getenv("CONFPINCH_CORPUS"); env && *env) return load_corpus(env);
  return default_corpus();
}

}  // namespace confpinch
