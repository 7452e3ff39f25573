#pragma once

// Command-line driver: verify-identities, verify-models, derdzinski, pinch, corpus.
// Exit status: 0 all checks pass, 1 a tolerance check failed, 2 usage error.

#include "confpinch/corpus.hpp"
#include "confpinch/suites.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace confpinch {

enum ExitCode { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

struct RunConfig {
  std::string command;
  std::string corpus_path;  // empty: CONFPINCH_CORPUS, then the built-in corpus
  std::string out_path = "confpinch-report.json";
  std::vector<std::string> tol_overrides;  // "key=value"
  std::uint64_t seed = 1;

  // verify-identities
  int samples = 10000;
  int algebra_samples = 1000;
  // verify-models
  int chart_samples = 100;
  int identity_samples = 20;
  std::vector<std::string> charts;  // empty: every corpus chart
  // derdzinski and pinch
  std::string model;   // sphere | product | derdzinski
  std::string chart;   // corpus chart instead of --model
  int n = 4;
  double radius = 1.0;
  double length = 2.0 * M_PI;
  double fiber_radius = 1.0;
  std::optional<double> R;
  std::optional<double> C;
  int grid = 0;
  std::string table_path;
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  int scan_samples = 100;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline SuiteConfig suite_config(const RunConfig& rc) {
  SuiteConfig cfg;
  cfg.seed = rc.seed;
  cfg.samples = rc.samples;
  cfg.algebra_samples = rc.algebra_samples;
  cfg.chart_samples = rc.command == "pinch" ? rc.scan_samples : rc.chart_samples;
  cfg.identity_samples = rc.identity_samples;
  cfg.eps = rc.eps;
  for (const std::string& kv : rc.tol_overrides) {
    try {
      cfg.tol.apply(kv);
    } catch (const ToleranceError& e) {
      throw UsageError(e.what());
    }
  }
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw UsageError("--eps values must be positive");
  if (cfg.samples < 1 || cfg.algebra_samples < 1 || cfg.chart_samples < 1 || cfg.identity_samples < 1)
    throw UsageError("sample counts must be positive");
  return cfg;
}

inline WarpODE warp_ode(const RunConfig& rc) {
  if (!rc.R || !rc.C) throw UsageError("--R and --C are required");
  const WarpODE ode{rc.n, *rc.R, *rc.C};
  try {
    Dim{rc.n};
    require_periodic_orbit(ode);
  } catch (const GeometryError& e) {
    throw UsageError(e.what());
  }
  return ode;
}

inline ModelSpec pinch_spec(const RunConfig& rc, std::string& label) {
  if (!rc.chart.empty()) {
    Corpus corpus;
    try {
      corpus = resolve_corpus(rc.corpus_path);
      const ChartEntry& e = corpus.find(rc.chart);
      if (std::holds_alternative<ConformalModel>(e.spec.kind))
        throw UsageError("pinch needs a sphere, product or warped chart");
      label = e.name;
      return e.spec;
    } catch (const CorpusError& e) {
      throw UsageError(e.what());
    }
  }
  try {
    Dim{rc.n};
    ModelSpec spec;
    if (rc.model == "sphere") {
      spec = sphere_model(rc.n, rc.radius);
    } else if (rc.model == "product") {
      spec = product_model(rc.n, rc.length, rc.fiber_radius);
    } else if (rc.model == "derdzinski") {
      const WarpODE ode = warp_ode(rc);
      spec = derdzinski_model(ode.n, ode.R, ode.C, rc.grid);
    } else {
      throw UsageError("--model must be sphere, product or derdzinski (or use --chart)");
    }
    validate(spec);
    label = rc.model;
    return spec;
  } catch (const GeometryError& e) {
    throw UsageError(e.what());
  }
}

inline Corpus selected_corpus(const RunConfig& rc) {
  try {
    Corpus c = resolve_corpus(rc.corpus_path);
    if (rc.charts.empty()) return c;
    Corpus out;
    out.source = c.source;
    for (const std::string& name : rc.charts) out.charts.push_back(c.find(name));
    return out;
  } catch (const CorpusError& e) {
    throw UsageError(e.what());
  }
}

inline void summarize(const Report& rep, std::ostream& out) {
  int passed = 0;
  for (const Check& c : rep.checks()) passed += c.pass ? 1 : 0;
  out << rep.command() << ": " << passed << "/" << rep.checks().size() << " checks passed\n";
  for (const Check& c : rep.checks())
    if (!c.pass)
      out << "  FAIL " << c.name << ": " << c.value << " " << to_string(c.relation) << " " << c.tolerance
          << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
}

}  // namespace detail

/// Executes one command; writes the JSON report to `rc.out_path`.
inline int run(const RunConfig& rc, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::optional<Report> rep;
  std::optional<WarpSolution> table;
  try {
    const SuiteConfig cfg = detail::suite_config(rc);
    if (rc.command == "verify-identities") {
      rep = identities_report(cfg);
    } else if (rc.command == "verify-models") {
      const Corpus corpus = detail::selected_corpus(rc);
      rep = models_report(corpus, cfg);
    } else if (rc.command == "derdzinski") {
      const WarpODE ode = detail::warp_ode(rc);
      if (rc.grid != 0 && rc.grid < 64) throw UsageError("--grid must be 0 or at least 64");
      try {
        DerdzinskiRun r = derdzinski_run(ode, rc.grid, cfg);
        rep = std::move(r.report);
        table = std::move(r.solution);
      } catch (const GeometryError& e) {
        rep.emplace("derdzinski");
        rep->failed("construction", e.what());
      }
    } else if (rc.command == "pinch") {
      std::string label;
      const ModelSpec spec = detail::pinch_spec(rc, label);
      rep.emplace("pinch");
      rep->parameters()["model"] = label;
      rep->parameters()["n"] = spec.n;
      rep->parameters()["seed"] = rc.seed;
      rep->parameters()["scan_samples"] = cfg.chart_samples;
      rep->parameters()["eps"] = cfg.eps;
      try {
        rep->data() = to_json(pinch_suite(*rep, "", spec, cfg));
      } catch (const GeometryError& e) {
        rep->failed("hypothesis", e.what());
      }
    } else {
      throw UsageError("unknown command '" + rc.command + "'");
    }
    if (!rep->parameters().contains("seed")) rep->parameters()["seed"] = rc.seed;
    Report::Json tol = Report::Json::object();
    for (const auto& [k, v] : cfg.tol.values()) tol[k] = v;
    rep->parameters()["tolerances"] = std::move(tol);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::ofstream file(rc.out_path, std::ios::binary);
  if (!file) {
    err << "usage error: cannot write " << rc.out_path << "\n";
    return kExitUsage;
  }
  file << rep->dump();
  file.close();

  detail::summarize(*rep, out);
  out << "report: " << rc.out_path << "\n";
  if (table) {
    if (rc.table_path.empty()) {
      write_table(out, *table);
    } else {
      std::ofstream t(rc.table_path);
      if (!t) {
        err << "usage error: cannot write " << rc.table_path << "\n";
        return kExitUsage;
      }
      write_table(t, *table);
      out << "table: " << rc.table_path << "\n";
    }
  }
  if (const auto f = rep->first_failure()) {
    err << "FAIL " << f->name << ": " << f->value << " " << to_string(f->relation) << " "
        << f->tolerance << (f->note.empty() ? "" : " (" + f->note + ")") << "\n";
    return kExitFail;
  }
  return kExitPass;
}

/// Parses the command line into a RunConfig and runs it.
inline int main_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  RunConfig rc;
  CLI::App app{"Numerical checks for conformally flat metrics with constant positive scalar curvature",
               "confpinch"};
  app.require_subcommand(1);
  app.add_option("--seed", rc.seed, "Seed for random sampling");
  app.add_option("--out", rc.out_path, "JSON report path")->capture_default_str();
  app.add_option("--tol", rc.tol_overrides, "Tolerance override key=value (repeatable)");
  app.add_option("--corpus", rc.corpus_path, "Chart corpus (YAML); default $CONFPINCH_CORPUS, then built-in");

  auto* ids = app.add_subcommand("verify-identities", "Algebraic identity and inequality property suites");
  ids->add_option("--samples", rc.samples, "Random tensors per dimension")->capture_default_str();
  ids->add_option("--algebra-samples", rc.algebra_samples, "Random curvature tensors per dimension")
      ->capture_default_str();

  auto* models = app.add_subcommand("verify-models", "Curvature identities over the chart corpus");
  models->add_option("--samples", rc.chart_samples, "Points per chart")->capture_default_str();
  models->add_option("--identity-samples", rc.identity_samples, "Points per chart for Codazzi-type identities")
      ->capture_default_str();
  models->add_option("--chart", rc.charts, "Restrict to named corpus charts (repeatable)");

  auto* derd = app.add_subcommand("derdzinski", "Build and validate a periodic warping function");
  derd->add_option("--n", rc.n, "Dimension")->required();
  derd->add_option("--R", rc.R, "Scalar curvature")->required();
  derd->add_option("--C", rc.C, "First-integral constant")->required();
  derd->add_option("--grid", rc.grid, "Grid size (0: refine automatically)")->capture_default_str();
  derd->add_option("--table", rc.table_path, "Write the (t, F, F') table here instead of stdout");

  auto* pinch = app.add_subcommand("pinch", "Integral pinching report for a model");
  pinch->add_option("--model", rc.model, "sphere | product | derdzinski");
  pinch->add_option("--chart", rc.chart, "Corpus chart instead of --model");
  pinch->add_option("--n", rc.n, "Dimension")->capture_default_str();
  pinch->add_option("--radius", rc.radius, "Sphere radius")->capture_default_str();
  pinch->add_option("--L", rc.length, "Circle length of the product")->capture_default_str();
  pinch->add_option("--r", rc.fiber_radius, "Fiber radius of the product")->capture_default_str();
  pinch->add_option("--R", rc.R, "Scalar curvature (derdzinski)");
  pinch->add_option("--C", rc.C, "First-integral constant (derdzinski)");
  pinch->add_option("--grid", rc.grid, "Warp grid (0: refine automatically)")->capture_default_str();
  pinch->add_option("--eps", rc.eps, "Regularization parameters")->delimiter(',');
  pinch->add_option("--samples", rc.scan_samples, "Points for the equality-case scan")->capture_default_str();

  auto* corpus = app.add_subcommand("corpus", "Print the resolved chart corpus as YAML");

  for (auto* sub : {ids, models, derd, pinch, corpus}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  rc.command = app.get_subcommands().front()->get_name();
  if (rc.command == "corpus") {
    try {
      out << emit_corpus(resolve_corpus(rc.corpus_path));
      return kExitPass;
    } catch (const CorpusError& e) {
      err << "usage error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (rc.command == "pinch" && rc.model.empty() && rc.chart.empty()) {
    err << "usage error: pinch needs --model or --chart\n";
    return kExitUsage;
  }
  return run(rc, out, err);
}

}  // namespace confpinch
