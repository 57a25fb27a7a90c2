#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "qinst/scenario.hpp"

using namespace qinst;

namespace {
std::string slurp(const std::string& name) {
  std::ifstream in(std::string(QINST_SCENARIO_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kLueders = R"({
  "objects": {
    "z": {"type": "observable", "outcomes": [
      {"label": "0", "effect": [[[1,0],[0,0]], [[0,0],[0,0]]]},
      {"label": "1", "effect": [[[0,0],[0,0]], [[0,0],[1,0]]]}]},
    "plus": {"type": "state", "matrix": [[[0.5,0],[0.5,0]], [[0.5,0],[0.5,0]]]}
  },
  "tasks": [
    {"name": "lz", "op": "lueders", "observable": "z", "as": "lz"},
    {"name": "odds", "op": "born_distribution", "instrument": "lz", "state": "plus", "expect": [0.5, 0.5]}
  ]
})";

std::string error_message(const std::function<void()>& f, ErrorKind kind) {
  try {
    f();
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
    return e.what();
  }
  FAIL("no error thrown");
  return "";
}
}  // namespace

TEST_CASE("Z Lueders on plus gives a fair distribution") {
  const Report r = run_scenario(parse_scenario(kLueders));
  REQUIRE(r.tasks.size() == 2);
  CHECK(r.pass());
  const Json out = r.tasks[1].outputs["result"];
  CHECK(out["probabilities"][0].get<double>() == doctest::Approx(0.5));
  CHECK(out["probabilities"][1].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("malformed complex entry is a located parse error") {
  std::string text = kLueders;
  text.replace(text.find("[[0.5,0],[0.5,0]]"), 17, "[[0.5],[0.5,0]]");
  const std::string msg = error_message([&] { parse_scenario(text, "case.json"); }, ErrorKind::ParseError);
  CHECK(msg.find("case.json:/objects/plus/matrix/0/0") != std::string::npos);
}

TEST_CASE("JSON syntax errors report line and column") {
  const std::string msg = error_message([] { parse_scenario("{\n  \"objects\": {,}\n}", "bad.json"); },
                                        ErrorKind::ParseError);
  CHECK(msg.find("bad.json:2:") != std::string::npos);
}

TEST_CASE("reference errors") {
  SUBCASE("unknown object") {
    error_message([] { parse_scenario(R"({"tasks": [{"name": "t", "op": "lueders", "observable": "nope"}]})"); },
                  ErrorKind::ReferenceError);
  }
  SUBCASE("names created by as are visible to later tasks only") {
    std::string text = kLueders;
    text.replace(text.find("\"as\": \"lz\""), 10, "\"as\": \"other\"");
    error_message([&] { parse_scenario(text); }, ErrorKind::ReferenceError);
  }
  SUBCASE("model probe must be an observable") {
    error_message(
        [] {
          parse_scenario(R"({"objects": {
            "s": {"type": "state", "matrix": [[[1,0]]]},
            "i": {"type": "instrument", "dim_in": 1, "dim_out": 1, "outcomes": [{"label": "a", "kraus": [[[[1,0]]]]}]},
            "m": {"type": "model", "base_dim": 1, "aux_dim": 1, "interaction": "i", "probe": "s"}}})");
        },
        ErrorKind::ReferenceError);
  }
}

TEST_CASE("task shape errors") {
  error_message([] { parse_scenario(R"({"tasks": [{"name": "t", "op": "frobnicate"}]})"); }, ErrorKind::ParseError);
  error_message([] { parse_scenario(R"({"tasks": [{"op": "channel"}]})"); }, ErrorKind::ParseError);
  error_message([] { parse_scenario(R"({"extra": 1})"); }, ErrorKind::ParseError);
  std::string dup = kLueders;
  dup.replace(dup.find("\"name\": \"odds\""), 14, "\"name\": \"lz\"");
  error_message([&] { parse_scenario(dup); }, ErrorKind::ParseError);
}

TEST_CASE("invalid objects fail at load with their invariant") {
  const std::string msg = error_message(
      [] { parse_scenario(R"({"objects": {"s": {"type": "state", "matrix": [[[0.5,0]]]}}})"); },
      ErrorKind::InvariantViolation);
  CHECK(msg.find("trace") != std::string::npos);
}

TEST_CASE("domain errors become failed tasks unless expected") {
  const char* text = R"({
    "objects": {
      "z": {"type": "observable", "outcomes": [
        {"label": "0", "effect": [[[1,0],[0,0]], [[0,0],[0,0]]]},
        {"label": "1", "effect": [[[0,0],[0,0]], [[0,0],[1,0]]]}]},
      "x": {"type": "observable", "outcomes": [
        {"label": "+", "effect": [[[0.5,0],[0.5,0]], [[0.5,0],[0.5,0]]]},
        {"label": "-", "effect": [[[0.5,0],[-0.5,0]], [[-0.5,0],[0.5,0]]]}]}
    },
    "tasks": [
      {"name": "expected", "op": "commuting_joint", "a": "z", "b": "x", "expect_error": "NonCommuting"},
      {"name": "unexpected", "op": "commuting_joint", "a": "z", "b": "x"},
      {"name": "wrong kind", "op": "commuting_joint", "a": "z", "b": "x", "expect_error": "DimMismatch"},
      {"name": "no error", "op": "commuting_joint", "a": "z", "b": "z", "expect_error": "NonCommuting"}
    ]})";
  const Report r = run_scenario(parse_scenario(text));
  CHECK(r.tasks[0].pass);
  CHECK_FALSE(r.tasks[1].pass);
  CHECK(r.tasks[1].outputs["error"].get<std::string>().find("NonCommuting") != std::string::npos);
  CHECK_FALSE(r.tasks[2].pass);
  CHECK_FALSE(r.tasks[3].pass);
  CHECK_FALSE(r.pass());
}

TEST_CASE("tolerance override applies to checks") {
  std::string text = kLueders;
  text.replace(text.find("[0.5, 0.5]"), 10, "[0.5000001, 0.4999999]");
  CHECK_FALSE(run_scenario(parse_scenario(text)).pass());
  text.insert(1, R"("tolerances": {"hermitian": 1e-9, "psd": 1e-9, "trace": 1e-9, "eq": 1e-6},)");
  CHECK(run_scenario(parse_scenario(text)).pass());
}

TEST_CASE("serialize then parse preserves every object") {
  for (const char* name : {"qubit_lueders.json", "trivial_partner_joint.json", "holevo_mixture_not_holevo.json",
                           "kraus_mixture_not_kraus.json", "qubit_probe_model.json"}) {
    CAPTURE(name);
    const Scenario s = parse_scenario(slurp(name), name);
    const Scenario back = parse_scenario(dump_json(serialize_scenario(s)), name);
    CHECK(scenario_distance(s, back) <= 1e-12);
    CHECK(dump_json(serialize_scenario(back)) == dump_json(serialize_scenario(s)));
  }
}

TEST_CASE("shipped scenarios pass") {
  for (const char* name : {"qubit_lueders.json", "trivial_partner_joint.json", "holevo_mixture_not_holevo.json",
                           "kraus_mixture_not_kraus.json", "qubit_probe_model.json"}) {
    CAPTURE(name);
    CHECK(run_scenario(parse_scenario(slurp(name), name)).pass());
  }
}

TEST_CASE("report JSON round-trip") {
  const Report r = run_scenario(parse_scenario(kLueders));
  const Json j = report_to_json(r);
  CHECK(j["tasks"][1]["status"] == "pass");
  const Report back = report_from_json(parse_json(dump_json(j), "report"));
  CHECK(dump_json(report_to_json(back)) == dump_json(j));
  CHECK(report_to_text(back) == report_to_text(r));
  error_message([] { report_from_json(parse_json(R"({"tasks": [{"name": "a", "status": "maybe"}]})", "report")); },
                ErrorKind::ParseError);
}

TEST_CASE("numbers keep 17 significant digits") {
  const Json j = Json::array({0.1, 1.0 / 3.0});
  const std::string s = dump_json(j);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(parse_json(s, "numbers")[1].get<double>() == 1.0 / 3.0);
}
