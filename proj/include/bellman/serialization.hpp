#pragma once

// JSON and CSV encodings of the library's value types.  Numbers are written
// in shortest round-trip decimal form.

#include <string>
#include <string_view>

#include <json.hpp>

#include "bellman/extremizers.hpp"
#include "bellman/infimum_oracle.hpp"
#include "bellman/tree_lab.hpp"

namespace bellman::io {

using json = nlohmann::json;

std::string format_number(double value);

/// {"N": int, "depth": int, "leaves": [numbers]}
json to_json(const tree::StepFunction<double>& phi);
tree::StepFunction<double> step_function_from_json(const json& j);

/// "N,depth,v0,v1,..."
std::string to_csv_row(const tree::StepFunction<double>& phi);
tree::StepFunction<double> step_function_from_csv_row(std::string_view row);

/// [[value, measure], ...] in descending value order.
json to_json(const tree::LayerCake<double>& cake);

json to_json(const extremal::ExtremizerReport& report);

json to_json(const oracle::SandwichResult& result);
std::string sandwich_csv_header();
std::string to_csv_row(const oracle::SandwichResult& result);

}  // namespace bellman::io
