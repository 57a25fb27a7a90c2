#include "qinst/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "qinst/coexistence.hpp"
#include "qinst/families.hpp"

namespace qinst {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad_ref(const std::string& what) { throw Error(ErrorKind::ReferenceError, what); }
[[noreturn]] void bad_input(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

struct TypeVisitor {
  std::string operator()(const State&) const { return "state"; }
  std::string operator()(const Observable&) const { return "observable"; }
  std::string operator()(const BiObservable&) const { return "bi_observable"; }
  std::string operator()(const Operation&) const { return "operation"; }
  std::string operator()(const Instrument&) const { return "instrument"; }
  std::string operator()(const BiInstrument&) const { return "bi_instrument"; }
  std::string operator()(const ModelValue&) const { return "model"; }
  std::string operator()(const Distribution&) const { return "distribution"; }
};

double distribution_distance(const Distribution& a, const Distribution& b) {
  if (a.labels != b.labels) return kInf;
  double d = 0.0;
  for (std::size_t n = 0; n < a.probabilities.size(); ++n)
    d = std::max(d, std::abs(a.probabilities[n] - b.probabilities[n]));
  return d;
}

// Distance between two values of the same type; infinity on any shape or
// label difference.
double value_distance(const Value& a, const Value& b) {
  if (a.index() != b.index()) return kInf;
  try {
    if (auto* s = std::get_if<State>(&a)) {
      const auto& t = std::get<State>(b);
      return s->dim() == t.dim() ? max_abs(s->mat() - t.mat()) : kInf;
    }
    if (auto* o = std::get_if<Observable>(&a)) {
      const auto& p = std::get<Observable>(b);
      return o->dim() == p.dim() ? distance(*o, p) : kInf;
    }
    if (auto* o = std::get_if<BiObservable>(&a)) {
      const auto& p = std::get<BiObservable>(b);
      return o->dim() == p.dim() ? distance(*o, p) : kInf;
    }
    if (auto* o = std::get_if<Operation>(&a)) return map_distance(*o, std::get<Operation>(b));
    if (auto* o = std::get_if<Instrument>(&a)) return map_distance(*o, std::get<Instrument>(b));
    if (auto* o = std::get_if<BiInstrument>(&a)) return map_distance(*o, std::get<BiInstrument>(b));
    if (auto* d = std::get_if<Distribution>(&a)) return distribution_distance(*d, std::get<Distribution>(b));
    const auto& m = std::get<ModelValue>(a).model;
    const auto& n = std::get<ModelValue>(b).model;
    if (m.base_dim() != n.base_dim() || m.aux_dim() != n.aux_dim()) return kInf;
    return std::max(map_distance(m.interaction(), n.interaction()), distance(m.probe(), n.probe()));
  } catch (const Error&) {
    return kInf;
  }
}

// Objects are looked up by name first among loaded objects, then among task results.
class Env {
 public:
  void put(const std::string& name, Value v) {
    auto it = table_.find(name);
    if (it != table_.end()) it->second = std::move(v);
    else table_.emplace(name, std::move(v));
  }
  bool has(const std::string& name) const { return table_.count(name) > 0; }
  const Value& at(const std::string& name) const {
    auto it = table_.find(name);
    if (it == table_.end()) bad_ref("unknown object '" + name + "'");
    return it->second;
  }

 private:
  std::map<std::string, Value> table_;
};

Value load_object(const Json& j, const std::string& where, const Tolerances& tol, const Env& env);

MeasurementModel model_from_json(const Json& j, const std::string& where, const Tolerances& tol, const Env& env,
                                 std::string* interaction_ref, std::string* probe_ref) {
  if (!j.is_object()) bad_input(where, "expected an object");
  for (const char* key : {"base_dim", "aux_dim", "interaction", "probe"})
    if (!j.contains(key)) bad_input(where, std::string("missing field '") + key + "'");
  if (!j["base_dim"].is_number_integer() || !j["aux_dim"].is_number_integer() || j["base_dim"].get<long long>() < 1 ||
      j["aux_dim"].get<long long>() < 1)
    bad_input(where, "base_dim and aux_dim must be positive integers");
  const auto resolve = [&](const char* key, std::string* ref) -> Value {
    const Json& v = j[key];
    if (v.is_string()) {
      if (ref) *ref = v.get<std::string>();
      return env.at(v.get<std::string>());
    }
    return load_object(v, where + "/" + key, tol, env);
  };
  const Value iv = resolve("interaction", interaction_ref);
  const Value pv = resolve("probe", probe_ref);
  const auto* i = std::get_if<Instrument>(&iv);
  const auto* p = std::get_if<Observable>(&pv);
  if (!i) bad_ref(where + "/interaction: expected an instrument, got " + type_name(iv));
  if (!p) bad_ref(where + "/probe: expected an observable, got " + type_name(pv));
  return MeasurementModel::create(j["base_dim"].get<Index>(), j["aux_dim"].get<Index>(), *i, *p, tol);
}

Value load_object(const Json& j, const std::string& where, const Tolerances& tol, const Env& env) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) bad_input(where, "object needs a string 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "state") return state_from_json(j, where, tol);
  if (type == "observable") return observable_from_json(j, where, tol);
  if (type == "bi_observable") return biobservable_from_json(j, where, tol);
  if (type == "operation") return operation_from_json(j, where, tol);
  if (type == "instrument") return instrument_from_json(j, where, tol);
  if (type == "bi_instrument") return biinstrument_from_json(j, where, tol);
  if (type == "distribution") return distribution_from_json(j, where);
  if (type == "model") {
    ModelValue mv{model_from_json(j, where, tol, env, nullptr, nullptr), "", ""};
    return mv;
  }
  bad_input(where + "/type", "unknown object type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Tasks

struct Outcome {
  std::optional<Value> value;
  bool pass = true;
  std::optional<double> residual;
  Json outputs = Json::object();
};

struct TaskCtx {
  const Json& task;
  const std::string& where;
  const Env& env;
  const Tolerances& tol;

  const Json& arg(const char* key) const {
    auto it = task.find(key);
    if (it == task.end()) bad_input(where, std::string("missing field '") + key + "'");
    return *it;
  }
  const Value& ref(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_string()) bad_input(where + "/" + key, "expected an object name");
    return env.at(v.get<std::string>());
  }
  template <class T>
  const T& get(const char* key) const {
    const Value& v = ref(key);
    const T* p = std::get_if<T>(&v);
    if (!p) bad_ref(where + "/" + key + ": '" + arg(key).get<std::string>() + "' has type " + type_name(v));
    return *p;
  }
  template <class T>
  std::vector<T> get_list(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_array() || v.empty()) bad_input(where + "/" + key, "expected a nonempty array of object names");
    std::vector<T> out;
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (!v[n].is_string()) bad_input(where + "/" + key + "/" + std::to_string(n), "expected an object name");
      const Value& val = env.at(v[n].get<std::string>());
      const T* p = std::get_if<T>(&val);
      if (!p) bad_ref(where + "/" + key + "/" + std::to_string(n) + ": wrong type " + type_name(val));
      out.push_back(*p);
    }
    return out;
  }
  Index index(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) bad_input(where + "/" + key, "expected a positive integer");
    return v.get<Index>();
  }
  int choice(const char* key) const {
    const Index v = index(key);
    if (v != 1 && v != 2) bad_input(where + "/" + key, "expected 1 or 2");
    return static_cast<int>(v);
  }
  std::string str(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_string()) bad_input(where + "/" + key, "expected a string");
    return v.get<std::string>();
  }
  Labels labels(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_array()) bad_input(where + "/" + key, "expected an array of labels");
    Labels out;
    for (const auto& e : v) {
      if (!e.is_string()) bad_input(where + "/" + key, "labels must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  std::vector<double> numbers(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_array()) bad_input(where + "/" + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad_input(where + "/" + key, "expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<Matrix> matrices(const char* key) const {
    const Json& v = arg(key);
    if (!v.is_array() || v.empty()) bad_input(where + "/" + key, "expected a nonempty array of matrices");
    std::vector<Matrix> out;
    for (std::size_t n = 0; n < v.size(); ++n)
      out.push_back(matrix_from_json(v[n], where + "/" + key + "/" + std::to_string(n)));
    return out;
  }
  bool flag(const char* key, bool fallback) const {
    auto it = task.find(key);
    if (it == task.end()) return fallback;
    if (!it->is_boolean()) bad_input(where + "/" + key, "expected true or false");
    return it->get<bool>();
  }
  double threshold() const {
    auto it = task.find("tol");
    if (it == task.end()) return tol.eq;
    if (!it->is_number() || it->get<double>() <= 0.0) bad_input(where + "/tol", "expected a positive number");
    return it->get<double>();
  }
};

Outcome computed(Value v) {
  Outcome o;
  o.value = std::move(v);
  return o;
}

Outcome residual_check(double r, double threshold) {
  Outcome o;
  o.residual = r;
  o.pass = r < threshold;
  return o;
}

Instrument pick_marginal(const MixedMarginals& mm, int outcome, int factor) {
  if (outcome == 1) return factor == 1 ? mm.marginal1_keep1 : mm.marginal1_keep2;
  return factor == 2 ? mm.marginal2_keep2 : mm.marginal2_keep1;
}

Side side_of(int v) { return v == 1 ? Side::First : Side::Second; }
Keep keep_of(int v) { return v == 1 ? Keep::First : Keep::Second; }

using TaskFn = std::function<Outcome(const TaskCtx&)>;

struct OpSpec {
  std::vector<const char*> refs;       // fields holding one object name
  std::vector<const char*> ref_lists;  // fields holding arrays of names
  TaskFn run;
};

const std::map<std::string, OpSpec>& op_table() {
  static const std::map<std::string, OpSpec> table = {
      {"born_distribution",
       {{"instrument", "state"}, {}, [](const TaskCtx& c) {
          return computed(born_distribution(c.get<Instrument>("instrument"), c.get<State>("state"), c.tol));
        }}},
      {"rho_distribution",
       {{"observable", "state"}, {}, [](const TaskCtx& c) {
          return computed(rho_distribution(c.get<Observable>("observable"), c.get<State>("state"), c.tol));
        }}},
      {"update_state",
       {{"instrument", "state"}, {}, [](const TaskCtx& c) {
          return computed(update_state(c.get<Instrument>("instrument"), c.str("label"), c.get<State>("state"), c.tol));
        }}},
      {"measured_observable",
       {{"of"}, {}, [](const TaskCtx& c) -> Outcome {
          const Value& v = c.ref("of");
          if (auto* i = std::get_if<Instrument>(&v)) return computed(measured_observable(*i));
          if (auto* m = std::get_if<ModelValue>(&v)) return computed(measured_observable(m->model));
          bad_ref(c.where + "/of: expected an instrument or a model, got " + type_name(v));
        }}},
      {"channel",
       {{"instrument"}, {}, [](const TaskCtx& c) { return computed(c.get<Instrument>("instrument").channel()); }}},
      {"sequential_product",
       {{"first", "second"}, {}, [](const TaskCtx& c) {
          return computed(sequential_product(c.get<Instrument>("first"), c.get<Instrument>("second")));
        }}},
      {"conditioned",
       {{"instrument", "by"}, {}, [](const TaskCtx& c) {
          return computed(conditioned(c.get<Instrument>("instrument"), c.get<Instrument>("by")));
        }}},
      {"then_instrument",
       {{"instrument", "then"}, {}, [](const TaskCtx& c) {
          return computed(then_instrument(c.get<Instrument>("instrument"), c.get<Instrument>("then")));
        }}},
      {"bi_marginal",
       {{"of"}, {}, [](const TaskCtx& c) -> Outcome {
          const Value& v = c.ref("of");
          const Side side = side_of(c.choice("side"));
          if (auto* k = std::get_if<BiInstrument>(&v)) return computed(bi_marginal_instrument(*k, side));
          if (auto* b = std::get_if<BiObservable>(&v)) return computed(bi_marginal(*b, side));
          bad_ref(c.where + "/of: expected a bi_instrument or bi_observable, got " + type_name(v));
        }}},
      {"flatten",
       {{"of"}, {}, [](const TaskCtx& c) -> Outcome {
          const Value& v = c.ref("of");
          if (auto* k = std::get_if<BiInstrument>(&v)) return computed(k->flatten());
          if (auto* b = std::get_if<BiObservable>(&v)) return computed(b->flatten());
          bad_ref(c.where + "/of: expected a bi_instrument or bi_observable, got " + type_name(v));
        }}},
      {"reduced_instrument",
       {{"instrument"}, {}, [](const TaskCtx& c) {
          return computed(reduced_instrument(c.get<Instrument>("instrument"), c.index("n1"), c.index("n2"),
                                             keep_of(c.choice("keep"))));
        }}},
      {"mixed_marginal",
       {{"joint"}, {}, [](const TaskCtx& c) {
          const auto mm = mixed_marginals(c.get<BiInstrument>("joint"), c.index("n1"), c.index("n2"));
          return computed(pick_marginal(mm, c.choice("outcome"), c.choice("factor")));
        }}},
      {"convex_combination",
       {{}, {"instruments"}, [](const TaskCtx& c) {
          return computed(convex_combination(c.get_list<Instrument>("instruments"), c.numbers("weights"), c.tol));
        }}},
      {"post_process",
       {{"instrument"}, {}, [](const TaskCtx& c) {
          return computed(post_process(c.get<Instrument>("instrument"),
                                       real_matrix_from_json(c.arg("lambda"), c.where + "/lambda"), c.labels("labels"),
                                       c.tol));
        }}},
      {"tensor_instrument",
       {{"first", "second"}, {}, [](const TaskCtx& c) {
          return computed(tensor_instrument(c.get<Instrument>("first"), c.get<Instrument>("second")));
        }}},
      {"conditioned_observable",
       {{"observable", "instrument"}, {}, [](const TaskCtx& c) {
          return computed(conditioned_observable(c.get<Observable>("observable"), c.get<Instrument>("instrument")));
        }}},
      {"conditioned_biobservable",
       {{"observable", "instrument"}, {}, [](const TaskCtx& c) {
          return computed(conditioned_biobservable(c.get<Observable>("observable"), c.get<Instrument>("instrument")));
        }}},
      {"obs_sequential_product",
       {{"a", "instrument", "b"}, {}, [](const TaskCtx& c) {
          return computed(obs_sequential_product(c.get<Observable>("a"), c.get<Instrument>("instrument"),
                                                 c.get<Observable>("b"), c.tol));
        }}},
      {"lueders",
       {{"observable"}, {}, [](const TaskCtx& c) { return computed(lueders(c.get<Observable>("observable"), c.tol)); }}},
      {"holevo",
       {{"observable"}, {"states"}, [](const TaskCtx& c) {
          return computed(holevo(HolevoSpec{c.get<Observable>("observable"), c.get_list<State>("states")}, c.tol));
        }}},
      {"trivial",
       {{}, {}, [](const TaskCtx& c) {
          return computed(trivial(c.index("dim_in"), c.labels("labels"), c.matrices("betas"), c.tol));
        }}},
      {"trivial_joint",
       {{"instrument"}, {}, [](const TaskCtx& c) {
          return computed(trivial_joint(c.get<Instrument>("instrument"), c.labels("labels"), c.matrices("betas"), c.tol));
        }}},
      {"commuting_joint",
       {{"a", "b"}, {}, [](const TaskCtx& c) {
          return computed(commuting_joint(c.get<Observable>("a"), c.get<Observable>("b"), c.tol));
        }}},
      {"postprocess_joint",
       {{"joint"}, {}, [](const TaskCtx& c) {
          return computed(postprocess_joint(c.get<BiInstrument>("joint"),
                                            real_matrix_from_json(c.arg("lambda"), c.where + "/lambda"),
                                            c.labels("labels"), c.tol));
        }}},
      {"condition_joint",
       {{"joint", "instrument"}, {}, [](const TaskCtx& c) {
          return computed(condition_joint(c.get<BiInstrument>("joint"), c.get<Instrument>("instrument")));
        }}},
      {"observable_joint_transfer",
       {{"joint", "instrument"}, {}, [](const TaskCtx& c) {
          return computed(observable_joint_transfer(c.get<BiObservable>("joint"), c.get<Instrument>("instrument")));
        }}},
      {"measured_conditioned_joint",
       {{"instrument", "observable"}, {}, [](const TaskCtx& c) {
          return computed(measured_conditioned_joint(c.get<Instrument>("instrument"), c.get<Observable>("observable")));
        }}},
      {"measured_joint_observable",
       {{"joint", "i", "j"}, {}, [](const TaskCtx& c) {
          const auto cert = verify_joint_instrument(c.get<BiInstrument>("joint"), c.get<Instrument>("i"),
                                                    c.get<Instrument>("j"), c.tol);
          return computed(measured_joint_observable(cert));
        }}},
      {"measurement_instrument",
       {{"model"}, {}, [](const TaskCtx& c) {
          return computed(measurement_instrument(c.get<ModelValue>("model").model));
        }}},
      {"measured_instrument",
       {{"model"}, {}, [](const TaskCtx& c) { return computed(measured_instrument(c.get<ModelValue>("model").model)); }}},
      {"sequential_model_product",
       {{"first", "second"}, {}, [](const TaskCtx& c) {
          return computed(ModelValue{sequential_model_product(c.get<ModelValue>("first").model,
                                                              c.get<ModelValue>("second").model, c.tol),
                                     "", ""});
        }}},
      // Verification tasks.
      {"equal",
       {{"a", "b"}, {}, [](const TaskCtx& c) {
          return residual_check(value_distance(c.ref("a"), c.ref("b")), c.threshold());
        }}},
      {"verify_joint_instrument",
       {{"joint", "i", "j"}, {}, [](const TaskCtx& c) {
          const auto cert = verify_joint_instrument(c.get<BiInstrument>("joint"), c.get<Instrument>("i"),
                                                    c.get<Instrument>("j"), c.tol);
          Outcome o = residual_check(cert.residual(), c.threshold());
          o.outputs = Json{{"residual_1", cert.residual_1}, {"residual_2", cert.residual_2}};
          if (!c.flag("expect", true)) o.pass = !o.pass;
          return o;
        }}},
      {"verify_joint_biobservable",
       {{"joint", "a", "b"}, {}, [](const TaskCtx& c) {
          const auto rep = verify_joint_biobservable(c.get<BiObservable>("joint"), c.get<Observable>("a"),
                                                     c.get<Observable>("b"), c.tol);
          Outcome o = residual_check(rep.residual(), c.threshold());
          o.outputs = Json{{"residual_1", rep.residual_1}, {"residual_2", rep.residual_2}};
          if (!c.flag("expect", true)) o.pass = !o.pass;
          return o;
        }}},
      {"detect_holevo",
       {{"instrument"}, {}, [](const TaskCtx& c) {
          const auto& i = c.get<Instrument>("instrument");
          Outcome o;
          o.residual = holevo_defect(i, c.tol);
          const auto spec = detect_holevo(i, c.tol);
          o.outputs["holevo"] = spec.has_value();
          if (spec) {
            o.outputs["observable"] = to_json(spec->observable);
            Json states = Json::array();
            for (const auto& s : spec->states) states.push_back(to_json(s));
            o.outputs["states"] = std::move(states);
          }
          o.pass = spec.has_value() == c.flag("expect", true);
          return o;
        }}},
      {"detect_kraus",
       {{"instrument"}, {}, [](const TaskCtx& c) {
          const auto& i = c.get<Instrument>("instrument");
          Outcome o;
          o.residual = kraus_defect(i, c.tol);
          const auto spec = detect_kraus(i, c.tol);
          o.outputs["kraus"] = spec.has_value();
          if (spec) {
            Json ops = Json::array();
            for (std::size_t x = 0; x < spec->ops.size(); ++x)
              ops.push_back(Json{{"label", spec->labels[x]}, {"operator", to_json(spec->ops[x])}});
            o.outputs["operators"] = std::move(ops);
          }
          o.pass = spec.has_value() == c.flag("expect", true);
          return o;
        }}},
      {"is_channel",
       {{"of"}, {}, [](const TaskCtx& c) -> Outcome {
          const Value& v = c.ref("of");
          double r = 0.0;
          if (auto* op = std::get_if<Operation>(&v)) r = channel_residual(*op);
          else if (auto* i = std::get_if<Instrument>(&v)) r = channel_residual(i->channel());
          else if (auto* k = std::get_if<BiInstrument>(&v)) r = channel_residual(k->channel());
          else bad_ref(c.where + "/of: expected an operation or instrument, got " + type_name(v));
          Outcome o = residual_check(r, c.threshold());
          if (!c.flag("expect", true)) o.pass = !o.pass;
          return o;
        }}},
      {"is_sharp",
       {{"observable"}, {}, [](const TaskCtx& c) {
          const double r = sharpness_residual(c.get<Observable>("observable"));
          Outcome o = residual_check(r, c.threshold());
          if (!c.flag("expect", true)) o.pass = !o.pass;
          return o;
        }}},
  };
  return table;
}

Value expected_value(const Json& expect, const Value& got, const TaskCtx& c) {
  const std::string where = c.where + "/expect";
  if (expect.is_string()) return c.env.at(expect.get<std::string>());
  if (auto* d = std::get_if<Distribution>(&got)) {
    if (expect.is_array()) {
      Distribution e{d->labels, {}};
      for (const auto& p : expect) {
        if (!p.is_number()) bad_input(where, "expected probabilities");
        e.probabilities.push_back(p.get<double>());
      }
      if (e.probabilities.size() != d->labels.size()) bad_input(where, "need one probability per outcome");
      return e;
    }
    return distribution_from_json(expect, where);
  }
  Json typed = expect;
  if (typed.is_object() && !typed.contains("type")) typed["type"] = type_name(got);
  return load_object(typed, where, c.tol, c.env);
}

void check_task_shape(const Json& task, const std::string& where, std::set<std::string>& names,
                      std::set<std::string>& task_names) {
  if (!task.is_object()) bad_input(where, "task must be an object");
  if (!task.contains("name") || !task["name"].is_string()) bad_input(where, "task needs a string 'name'");
  if (!task_names.insert(task["name"].get<std::string>()).second)
    bad_input(where + "/name", "duplicate task name '" + task["name"].get<std::string>() + "'");
  if (!task.contains("op") || !task["op"].is_string()) bad_input(where, "task needs a string 'op'");
  const std::string op = task["op"].get<std::string>();
  auto it = op_table().find(op);
  if (it == op_table().end()) bad_input(where + "/op", "unknown op '" + op + "'");
  const auto need = [&](const std::string& name, const std::string& w) {
    if (!names.count(name)) bad_ref(w + ": unknown object '" + name + "'");
  };
  for (const char* key : it->second.refs) {
    if (!task.contains(key)) bad_input(where, std::string("missing field '") + key + "'");
    if (!task[key].is_string()) bad_input(where + "/" + key, "expected an object name");
    need(task[key].get<std::string>(), where + "/" + key);
  }
  for (const char* key : it->second.ref_lists) {
    if (!task.contains(key) || !task[key].is_array()) bad_input(where, std::string("missing array '") + key + "'");
    for (const auto& n : task[key]) {
      if (!n.is_string()) bad_input(where + "/" + key, "expected object names");
      need(n.get<std::string>(), where + "/" + key);
    }
  }
  if (task.contains("expect") && task["expect"].is_string()) need(task["expect"].get<std::string>(), where + "/expect");
  if (task.contains("as")) {
    if (!task["as"].is_string()) bad_input(where + "/as", "expected a name");
    names.insert(task["as"].get<std::string>());
  }
}

}  // namespace

std::string type_name(const Value& v) { return std::visit(TypeVisitor{}, v); }

Json to_json(const Value& v) {
  if (auto* m = std::get_if<ModelValue>(&v)) {
    Json j{{"type", "model"}, {"base_dim", m->model.base_dim()}, {"aux_dim", m->model.aux_dim()}};
    j["interaction"] = m->interaction_ref.empty() ? to_json(m->model.interaction()) : Json(m->interaction_ref);
    j["probe"] = m->probe_ref.empty() ? to_json(m->model.probe()) : Json(m->probe_ref);
    return j;
  }
  return std::visit([](const auto& x) -> Json {
    if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ModelValue>) return Json();
    else return qinst::to_json(x);
  }, v);
}

const Value* Scenario::find(const std::string& name) const {
  for (const auto& o : objects)
    if (o.name == name) return &o.value;
  return nullptr;
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const Json root = parse_json(text, source);
  if (!root.is_object()) bad_input(source, "scenario must be a JSON object");
  for (auto it = root.begin(); it != root.end(); ++it)
    if (it.key() != "tolerances" && it.key() != "objects" && it.key() != "tasks")
      bad_input(source + ":/" + it.key(), "unknown top-level field");
  Scenario s;
  if (root.contains("tolerances")) {
    s.tolerances = tolerances_from_json(root["tolerances"], source + ":/tolerances");
    s.has_tolerances = true;
  }
  Env env;
  std::set<std::string> names;
  if (root.contains("objects")) {
    const Json& objs = root["objects"];
    if (!objs.is_object()) bad_input(source + ":/objects", "expected an object mapping names to objects");
    // Models refer to other objects, so they load after everything else.
    for (int pass = 0; pass < 2; ++pass) {
      for (auto it = objs.begin(); it != objs.end(); ++it) {
        const std::string where = source + ":/objects/" + it.key();
        const bool is_model = it.value().is_object() && it.value().value("type", "") == "model";
        if (is_model != (pass == 1)) continue;
        Value v = [&]() -> Value {
          if (!is_model) return load_object(it.value(), where, s.tolerances, env);
          std::string iref, pref;
          MeasurementModel m = model_from_json(it.value(), where, s.tolerances, env, &iref, &pref);
          return ModelValue{std::move(m), iref, pref};
        }();
        env.put(it.key(), v);
        names.insert(it.key());
      }
    }
    // Keep file order in the object list.
    for (auto it = objs.begin(); it != objs.end(); ++it) s.objects.push_back({it.key(), env.at(it.key())});
  }
  if (root.contains("tasks")) {
    if (!root["tasks"].is_array()) bad_input(source + ":/tasks", "expected an array");
    s.tasks = root["tasks"];
    std::set<std::string> task_names;
    for (std::size_t n = 0; n < s.tasks.size(); ++n)
      check_task_shape(s.tasks[n], source + ":/tasks/" + std::to_string(n), names, task_names);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

Json serialize_scenario(const Scenario& s) {
  Json root = Json::object();
  if (s.has_tolerances) root["tolerances"] = to_json(s.tolerances);
  Json objs = Json::object();
  for (const auto& o : s.objects) objs[o.name] = to_json(o.value);
  root["objects"] = std::move(objs);
  root["tasks"] = s.tasks;
  return root;
}

double scenario_distance(const Scenario& a, const Scenario& b) {
  if (a.objects.size() != b.objects.size() || a.tasks != b.tasks) return kInf;
  double d = 0.0;
  for (std::size_t n = 0; n < a.objects.size(); ++n) {
    if (a.objects[n].name != b.objects[n].name) return kInf;
    d = std::max(d, value_distance(a.objects[n].value, b.objects[n].value));
  }
  return d;
}

bool Report::pass() const {
  for (const auto& t : tasks)
    if (!t.pass) return false;
  return true;
}

Report run_scenario(const Scenario& s) {
  Env env;
  for (const auto& o : s.objects) env.put(o.name, o.value);
  Report report;
  for (std::size_t n = 0; n < s.tasks.size(); ++n) {
    const Json& task = s.tasks[n];
    const std::string where = "tasks/" + std::to_string(n);
    const TaskCtx ctx{task, where, env, s.tolerances};
    TaskResult r;
    r.name = task["name"].get<std::string>();
    const std::string expect_error = task.value("expect_error", "");
    try {
      Outcome o = op_table().at(task["op"].get<std::string>()).run(ctx);
      r.pass = o.pass;
      r.residual = o.residual;
      r.outputs = std::move(o.outputs);
      if (o.value) {
        if (task.contains("expect")) {
          const double d = value_distance(*o.value, expected_value(task["expect"], *o.value, ctx));
          r.residual = d;
          r.pass = d < ctx.threshold();
        }
        r.outputs["result"] = to_json(*o.value);
        if (task.contains("as")) env.put(task["as"].get<std::string>(), std::move(*o.value));
      }
      if (!expect_error.empty()) {
        r.pass = false;
        r.outputs["error"] = "expected " + expect_error + " but the task succeeded";
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ReferenceError) throw;
      r.pass = !expect_error.empty() && expect_error == to_string(e.kind());
      r.outputs["error"] = e.what();
    }
    report.tasks.push_back(std::move(r));
  }
  return report;
}

Json report_to_json(const Report& r) {
  Json tasks = Json::array();
  for (const auto& t : r.tasks) {
    Json residual = t.residual ? Json(*t.residual) : Json(nullptr);
    tasks.push_back(Json{{"name", t.name}, {"status", t.pass ? "pass" : "fail"}, {"residual", residual},
                         {"outputs", t.outputs}});
  }
  return Json{{"tasks", std::move(tasks)}};
}

Report report_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("tasks") || !j["tasks"].is_array())
    throw Error(ErrorKind::ParseError, "report: expected {tasks: [...]}");
  Report r;
  for (std::size_t n = 0; n < j["tasks"].size(); ++n) {
    const Json& t = j["tasks"][n];
    const std::string where = "report:/tasks/" + std::to_string(n);
    if (!t.is_object() || !t.contains("name") || !t.contains("status") || !t["name"].is_string() ||
        !t["status"].is_string())
      throw Error(ErrorKind::ParseError, where + ": task needs name and status");
    TaskResult tr;
    tr.name = t["name"].get<std::string>();
    const std::string status = t["status"].get<std::string>();
    if (status != "pass" && status != "fail") throw Error(ErrorKind::ParseError, where + "/status: expected pass or fail");
    tr.pass = status == "pass";
    if (t.contains("residual") && t["residual"].is_number()) tr.residual = t["residual"].get<double>();
    if (t.contains("outputs")) tr.outputs = t["outputs"];
    r.tasks.push_back(std::move(tr));
  }
  return r;
}

std::string report_to_text(const Report& r) {
  std::string out;
  std::size_t passed = 0;
  for (const auto& t : r.tasks) {
    char buf[64] = "-";
    if (t.residual) std::snprintf(buf, sizeof buf, "%.3e", *t.residual);
    out += (t.pass ? "PASS  " : "FAIL  ") + t.name + "  residual=" + buf;
    if (t.outputs.contains("error")) out += "  error: " + t.outputs["error"].get<std::string>();
    out += '\n';
    passed += t.pass;
  }
  out += std::to_string(passed) + "/" + std::to_string(r.tasks.size()) + " tasks passed\n";
  return out;
}

}  // namespace qinst
