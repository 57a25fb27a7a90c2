#include "qinst/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace qinst {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

Index dim_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer() || v.get<long long>() < 1) fail(where + "/" + key, "expected a positive integer");
  return static_cast<Index>(v.get<long long>());
}

std::string string_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) fail(where + "/" + key, "expected a string");
  return v.get<std::string>();
}

const Json& array_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_array()) fail(where + "/" + key, "expected an array");
  return v;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "number is not finite");
  return v;
}

Labels labels_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of labels");
  Labels out;
  for (std::size_t n = 0; n < j.size(); ++n) {
    if (!j[n].is_string()) fail(where + "/" + std::to_string(n), "expected a string label");
    out.push_back(j[n].get<std::string>());
  }
  return out;
}

std::vector<Matrix> kraus_list(const Json& j, Index rows, Index cols, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of Kraus matrices");
  std::vector<Matrix> out;
  for (std::size_t n = 0; n < j.size(); ++n) {
    const std::string w = where + "/" + std::to_string(n);
    Matrix k = matrix_from_json(j[n], w);
    if (k.rows() != rows || k.cols() != cols)
      fail(w, "Kraus matrix is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) + ", expected " +
                  std::to_string(rows) + "x" + std::to_string(cols));
    out.push_back(std::move(k));
  }
  return out;
}

Json kraus_json(const Operation& op) {
  Json out = Json::array();
  for (const auto& k : op.kraus()) out.push_back(to_json(k));
  return out;
}

void write_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write(std::string& out, const Json& j, int indent, int level) {
  const auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line so matrices read row by row.
      bool flat = true;
      for (const auto& e : j)
        if (e.is_structured() && !(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())) flat = false;
      out += '[';
      for (std::size_t n = 0; n < j.size(); ++n) {
        if (n) out += flat && indent >= 0 ? ", " : ",";
        if (!flat) newline(level + 1);
        write(out, j[n], flat ? -1 : indent, level + 1);
      }
      if (!flat) newline(level);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t n = 0; n + 1 < e.byte && n < text.size(); ++n) {
      if (text[n] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::ParseError,
                source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" + e.what() + ")");
  }
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  out += '\n';
  return out;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const State& s) { return Json{{"type", "state"}, {"matrix", to_json(s.mat())}}; }

Json to_json(const Observable& a) {
  Json outcomes = Json::array();
  for (std::size_t x = 0; x < a.size(); ++x)
    outcomes.push_back(Json{{"label", a.labels()[x]}, {"effect", to_json(a.effect(x))}});
  return Json{{"type", "observable"}, {"dim", a.dim()}, {"outcomes", std::move(outcomes)}};
}

Json to_json(const BiObservable& c) {
  Json grid = Json::array();
  for (std::size_t x = 0; x < c.labels1().size(); ++x) {
    Json row = Json::array();
    for (std::size_t y = 0; y < c.labels2().size(); ++y) row.push_back(to_json(c.at(x, y)));
    grid.push_back(std::move(row));
  }
  return Json{{"type", "bi_observable"}, {"dim", c.dim()},   {"labels1", c.labels1()},
              {"labels2", c.labels2()},  {"grid", std::move(grid)}};
}

Json to_json(const Operation& op) {
  return Json{{"type", "operation"}, {"dim_in", op.dim_in()}, {"dim_out", op.dim_out()}, {"kraus", kraus_json(op)}};
}

Json to_json(const Instrument& i) {
  Json outcomes = Json::array();
  for (std::size_t x = 0; x < i.size(); ++x)
    outcomes.push_back(Json{{"label", i.labels()[x]}, {"kraus", kraus_json(i.operation(x))}});
  return Json{{"type", "instrument"}, {"dim_in", i.dim_in()}, {"dim_out", i.dim_out()}, {"outcomes", std::move(outcomes)}};
}

Json to_json(const BiInstrument& k) {
  Json grid = Json::array();
  for (std::size_t x = 0; x < k.labels1().size(); ++x) {
    Json row = Json::array();
    for (std::size_t y = 0; y < k.labels2().size(); ++y) row.push_back(kraus_json(k.at(x, y)));
    grid.push_back(std::move(row));
  }
  return Json{{"type", "bi_instrument"}, {"dim_in", k.dim_in()},   {"dim_out", k.dim_out()},
              {"labels1", k.labels1()},  {"labels2", k.labels2()}, {"grid", std::move(grid)}};
}

Json to_json(const Distribution& d) {
  return Json{{"type", "distribution"}, {"labels", d.labels}, {"probabilities", d.probabilities}};
}

Json to_json(const Tolerances& t) {
  return Json{{"hermitian", t.hermitian}, {"psd", t.psd}, {"trace", t.trace}, {"eq", t.eq}};
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string wr = where + "/" + std::to_string(r);
    const Json& row = j[r];
    if (!row.is_array() || row.empty()) fail(wr, "expected a nonempty row");
    if (r == 0) {
      cols = row.size();
      m.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    } else if (row.size() != cols) {
      fail(wr, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string wc = wr + "/" + std::to_string(c);
      const Json& e = row[c];
      if (!e.is_array() || e.size() != 2) fail(wc, "complex entry must be [re, im]");
      m(static_cast<Index>(r), static_cast<Index>(c)) = Complex(number(e[0], wc + "/0"), number(e[1], wc + "/1"));
    }
  }
  return m;
}

Eigen::MatrixXd real_matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string wr = where + "/" + std::to_string(r);
    if (!j[r].is_array() || j[r].empty()) fail(wr, "expected a nonempty row");
    if (r == 0) m.resize(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
    if (static_cast<Index>(j[r].size()) != m.cols()) fail(wr, "ragged row");
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = number(j[r][c], wr + "/" + std::to_string(c));
  }
  return m;
}

State state_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
  return State::create(matrix_from_json(field(j, "matrix", where), where + "/matrix"), tol);
}

Observable observable_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
  const Json& outcomes = array_field(j, "outcomes", where);
  if (outcomes.empty()) fail(where + "/outcomes", "observable needs at least one outcome");
  Labels labels;
  std::vector<Matrix> effects;
  for (std::size_t n = 0; n < outcomes.size(); ++n) {
    const std::string w = where + "/outcomes/" + std::to_string(n);
    labels.push_back(string_field(outcomes[n], "label", w));
    effects.push_back(matrix_from_json(field(outcomes[n], "effect", w), w + "/effect"));
  }
  return Observable::create(std::move(labels), std::move(effects), tol);
}

BiObservable biobservable_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
  Labels l1 = labels_from_json(field(j, "labels1", where), where + "/labels1");
  Labels l2 = labels_from_json(field(j, "labels2", where), where + "/labels2");
  const Json& grid = array_field(j, "grid", where);
  if (grid.size() != l1.size()) fail(where + "/grid", "grid needs one row per entry of labels1");
  std::vector<Matrix> effects;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const std::string wx = where + "/grid/" + std::to_string(x);
    if (!grid[x].is_array() || grid[x].size() != l2.size()) fail(wx, "row needs one entry per entry of labels2");
    for (std::size_t y = 0; y < grid[x].size(); ++y)
      effects.push_back(matrix_from_json(grid[x][y], wx + "/" + std::to_string(y)));
  }
  return BiObservable::create(std::move(l1), std::move(l2), std::move(effects), tol);
}

Operation operation_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
  const Index din = dim_field(j, "dim_in", where);
  const Index dout = dim_field(j, "dim_out", where);
  return Operation::create(din, dout, kraus_list(field(j, "kraus", where), dout, din, where + "/kraus"), tol);
}

Instrument instrument_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
  const Index din = dim_field(j, "dim_in", where);
  const Index dout = dim_field(j, "dim_out", where);
  const Json& outcomes = array_field(j, "outcomes", where);
  if (outcomes.empty()) fail(where + "/outcomes", "instrument needs at least one outcome");
  Labels labels;
  std::vector<Operation> ops;
  for (std::size_t n = 0; n < outcomes.size(); ++n) {
    const std::string w = where + "/outcomes/" + std::to_string(n);
    labels.push_back(string_field(outcomes[n], "label", w));
    ops.push_back(Operation::unchecked(din, dout, kraus_list(field(outcomes[n], "kraus", w), dout, din, w + "/kraus")));
  }
  return Instrument::create(std::move(labels), std::move(ops), tol);
}

BiInstrument biinstrument_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
  const Index din = dim_field(j, "dim_in", where);
  const Index dout = dim_field(j, "dim_out", where);
  Labels l1 = labels_from_json(field(j, "labels1", where), where + "/labels1");
  Labels l2 = labels_from_json(field(j, "labels2", where), where + "/labels2");
  const Json& grid = array_field(j, "grid", where);
  if (grid.size() != l1.size()) fail(where + "/grid", "grid needs one row per entry of labels1");
  std::vector<Operation> ops;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const std::string wx = where + "/grid/" + std::to_string(x);
    if (!grid[x].is_array() || grid[x].size() != l2.size()) fail(wx, "row needs one entry per entry of labels2");
    for (std::size_t y = 0; y < grid[x].size(); ++y)
      ops.push_back(Operation::unchecked(din, dout, kraus_list(grid[x][y], dout, din, wx + "/" + std::to_string(y))));
  }
  return BiInstrument::create(std::move(l1), std::move(l2), std::move(ops), tol);
}

Distribution distribution_from_json(const Json& j, const std::string& where) {
  Distribution d;
  d.labels = labels_from_json(field(j, "labels", where), where + "/labels");
  const Json& p = array_field(j, "probabilities", where);
  if (p.size() != d.labels.size()) fail(where + "/probabilities", "need one probability per label");
  for (std::size_t n = 0; n < p.size(); ++n) d.probabilities.push_back(number(p[n], where + "/probabilities/" + std::to_string(n)));
  return d;
}

Tolerances tolerances_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  Tolerances t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const double v = number(it.value(), where + "/" + it.key());
    if (it.key() == "hermitian") t.hermitian = v;
    else if (it.key() == "psd") t.psd = v;
    else if (it.key() == "trace") t.trace = v;
    else if (it.key() == "eq") t.eq = v;
    else fail(where + "/" + it.key(), "unknown tolerance");
  }
  t.validate();
  return t;
}

}  // namespace qinst
