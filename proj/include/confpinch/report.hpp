#pragma once

// Structured verification reports (JSON, schema "confpinch.report/1").

#include "json.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace confpinch {

inline constexpr const char* kReportSchema = "confpinch.report/1";

struct Check {
  enum class Relation { AtMost, AtLeast };
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::AtMost;
  bool pass = false;
  std::string note;
};

inline const char* to_string(Check::Relation r) { return r == Check::Relation::AtMost ? "<=" : ">="; }

class Report {
 public:
  using Json = nlohmann::ordered_json;

  explicit Report(std::string command) : command_(std::move(command)) {}

  const std::string& command() const { return command_; }

  /// value <= tolerance (NaN fails).
  const Check& at_most(std::string name, double value, double tolerance, std::string note = {}) {
    return add({std::move(name), value, tolerance, Check::Relation::AtMost, value <= tolerance,
                std::move(note)});
  }
  /// value >= tolerance (NaN fails).
  const Check& at_least(std::string name, double value, double tolerance, std::string note = {}) {
    return add({std::move(name), value, tolerance, Check::Relation::AtLeast, value >= tolerance,
                std::move(note)});
  }
  /// Records an evaluation that threw instead of producing a value.
  const Check& failed(std::string name, std::string note) {
    return add({std::move(name), NAN, 0.0, Check::Relation::AtMost, false, std::move(note)});
  }

  const std::vector<Check>& checks() const { return checks_; }
  bool pass() const {
    for (const Check& c : checks_)
      if (!c.pass) return false;
    return true;
  }
  std::optional<Check> first_failure() const {
    for (const Check& c : checks_)
      if (!c.pass) return c;
    return std::nullopt;
  }

  Json& parameters() { return parameters_; }
  Json& data() { return data_; }

  Json to_json() const {
    Json j;
    j["schema"] = kReportSchema;
    j["command"] = command_;
    j["parameters"] = parameters_.is_null() ? Json::object() : parameters_;
    Json checks = Json::array();
    for (const Check& c : checks_) {
      Json e;
      e["name"] = c.name;
      e["value"] = number(c.value);
      e["relation"] = to_string(c.relation);
      e["tolerance"] = number(c.tolerance);
      e["pass"] = c.pass;
      if (!c.note.empty()) e["note"] = c.note;
      checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    j["data"] = data_.is_null() ? Json::object() : data_;
    j["pass"] = pass();
    return j;
  }

  std::string dump() const { return to_json().dump(2) + "\n"; }

  /// JSON has no NaN or infinity; those become strings.
  static Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  }

 private:
  const Check& add(Check c) {
    checks_.push_back(std::move(c));
    return checks_.back();
  }

  std::string command_;
  Json parameters_;
  Json data_;
  std::vector<Check> checks_;
};

}  // namespace confpinch
