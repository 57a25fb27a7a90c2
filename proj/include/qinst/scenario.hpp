#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qinst/serialize.hpp"

namespace qinst {

/// A model remembers the object names it was loaded from so it can be
/// written back as references; empty names mean inline objects.
struct ModelValue {
  MeasurementModel model;
  std::string interaction_ref;
  std::string probe_ref;
};

using Value = std::variant<State, Observable, BiObservable, Operation, Instrument, BiInstrument, ModelValue,
                           Distribution>;

std::string type_name(const Value& v);
Json to_json(const Value& v);

struct NamedValue {
  std::string name;
  Value value;
};

struct Scenario {
  Tolerances tolerances;
  bool has_tolerances = false;
  std::vector<NamedValue> objects;  // file order
  Json tasks = Json::array();

  const Value* find(const std::string& name) const;
};

/// ParseError for malformed input, ReferenceError for unresolved names, and
/// the domain error of any object that fails its invariants.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path);
Json serialize_scenario(const Scenario& s);

/// Max object-by-object distance; infinity when names, types or shapes differ.
double scenario_distance(const Scenario& a, const Scenario& b);

struct TaskResult {
  std::string name;
  bool pass = true;
  std::optional<double> residual;
  Json outputs = Json::object();
};

struct Report {
  std::vector<TaskResult> tasks;
  bool pass() const;
};

Report run_scenario(const Scenario& s);

/// {tasks: [{name, status, residual, outputs}]}
Json report_to_json(const Report& r);
Report report_from_json(const Json& j);
std::string report_to_text(const Report& r);

}  // namespace qinst
