#pragma once

#include <string>

#include <json.hpp>

#include "qinst/instruments.hpp"
#include "qinst/measurement_models.hpp"

namespace qinst {

using Json = nlohmann::ordered_json;

/// Parses JSON text; ParseError carries source, line and column.
Json parse_json(const std::string& text, const std::string& source);

/// Writes JSON with every floating value at 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);

// Complex scalars are [re, im]; matrices are row-major nested arrays.
Json to_json(const Matrix& m);
Json to_json(const State& s);
Json to_json(const Observable& a);
Json to_json(const BiObservable& c);
Json to_json(const Operation& op);
Json to_json(const Instrument& i);
Json to_json(const BiInstrument& k);
Json to_json(const Distribution& d);
Json to_json(const Tolerances& t);

// `where` is a JSON-pointer-like location used in ParseError messages.
Matrix matrix_from_json(const Json& j, const std::string& where);
Eigen::MatrixXd real_matrix_from_json(const Json& j, const std::string& where);
State state_from_json(const Json& j, const std::string& where, const Tolerances& tol = {});
Observable observable_from_json(const Json& j, const std::string& where, const Tolerances& tol = {});
BiObservable biobservable_from_json(const Json& j, const std::string& where, const Tolerances& tol = {});
Operation operation_from_json(const Json& j, const std::string& where, const Tolerances& tol = {});
Instrument instrument_from_json(const Json& j, const std::string& where, const Tolerances& tol = {});
BiInstrument biinstrument_from_json(const Json& j, const std::string& where, const Tolerances& tol = {});
Distribution distribution_from_json(const Json& j, const std::string& where);
Tolerances tolerances_from_json(const Json& j, const std::string& where);

}  // namespace qinst
