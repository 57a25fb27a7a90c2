#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qinst/scenario.hpp"
#include "qinst/selftest.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qinst::Error(qinst::ErrorKind::ParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw qinst::Error(qinst::ErrorKind::ParseError, out_path + ": cannot write file");
  out << text;
}

std::vector<qinst::Index> parse_dims(const std::string& s) {
  std::vector<qinst::Index> dims;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      dims.push_back(v);
    } catch (const std::exception&) {
      throw qinst::Error(qinst::ErrorKind::ParseError, "--dims: not an integer list: " + s);
    }
  }
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qinst: finite-dimensional quantum instrument calculus"};
  app.require_subcommand(1);

  std::string file, out_path, format = "json";
  bool canonical = false;

  auto* validate = app.add_subcommand("validate", "Load a scenario and check every object and reference");
  validate->add_option("file", file, "Scenario JSON")->required();
  validate->add_flag("--canonical", canonical, "Print the scenario re-serialized");
  validate->add_option("-o,--output", out_path, "Write output here instead of stdout");

  auto* run = app.add_subcommand("run", "Run a scenario's tasks and print the report");
  run->add_option("file", file, "Scenario JSON")->required();
  run->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  run->add_option("-o,--output", out_path, "Write the report here instead of stdout");

  qinst::SelftestOptions st;
  std::string dims = "2,3";
  double tol = 0.0;
  auto* selftest = app.add_subcommand("selftest", "Run the seeded property suite");
  selftest->add_option("--seed", st.seed, "Generator seed");
  selftest->add_option("--trials", st.trials, "Trials per property")->check(CLI::PositiveNumber);
  selftest->add_option("--dims", dims, "Comma-separated dimensions");
  selftest->add_option("--tol", tol, "Use this value for every tolerance")->check(CLI::PositiveNumber);
  selftest->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  selftest->add_option("-o,--output", out_path, "Write the report here instead of stdout");

  auto* report = app.add_subcommand("report", "Re-render a saved run report");
  report->add_option("file", file, "Report JSON from `run`")->required();
  report->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  report->add_option("-o,--output", out_path, "Write output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  using qinst::ErrorKind;
  try {
    if (*validate) {
      const qinst::Scenario s = qinst::load_scenario(file);
      if (canonical) {
        emit(qinst::dump_json(qinst::serialize_scenario(s)) + "\n", out_path);
      } else {
        emit(file + ": ok (" + std::to_string(s.objects.size()) + " objects, " + std::to_string(s.tasks.size()) +
                 " tasks)\n",
             out_path);
      }
      return kPass;
    }
    if (*run) {
      const qinst::Report r = qinst::run_scenario(qinst::load_scenario(file));
      emit(format == "text" ? qinst::report_to_text(r) : qinst::dump_json(qinst::report_to_json(r)) + "\n", out_path);
      return r.pass() ? kPass : kFail;
    }
    if (*selftest) {
      st.dims = parse_dims(dims);
      if (tol > 0.0) st.tol = qinst::Tolerances::uniform(tol);
      const qinst::SelftestReport r = qinst::run_selftest(st);
      emit(format == "text" ? qinst::selftest_to_text(r) : qinst::dump_json(qinst::selftest_to_json(r)) + "\n",
           out_path);
      return r.pass() ? kPass : kFail;
    }
    if (*report) {
      const qinst::Report r = qinst::report_from_json(qinst::parse_json(read_file(file), file));
      emit(format == "text" ? qinst::report_to_text(r) : qinst::dump_json(qinst::report_to_json(r)) + "\n", out_path);
      return r.pass() ? kPass : kFail;
    }
  } catch (const qinst::Error& e) {
    std::cerr << "qinst: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
