#include "bellman/serialization.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bellman::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

json to_json(const tree::StepFunction<double>& phi) {
  return json{{"N", phi.params().branching()},
              {"depth", phi.params().depth()},
              {"leaves", phi.leaf_vector()}};
}

tree::StepFunction<double> step_function_from_json(const json& j) {
  const tree::TreeParams params(j.at("N").get<int>(), j.at("depth").get<int>());
  return tree::StepFunction<double>(params, j.at("leaves").get<std::vector<double>>());
}

std::string to_csv_row(const tree::StepFunction<double>& phi) {
  std::string row = std::to_string(phi.params().branching()) + "," + std::to_string(phi.params().depth());
  for (double v : phi.leaves()) {
    row += ',';
    row += format_number(v);
  }
  return row;
}

tree::StepFunction<double> step_function_from_csv_row(std::string_view row) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in{std::string(row)};
  while (std::getline(in, field, ',')) fields.push_back(field);
  require(fields.size() >= 3, "step function CSV row needs N, depth and at least one leaf");
  try {
    const tree::TreeParams params(std::stoi(fields[0]), std::stoi(fields[1]));
    std::vector<double> leaves;
    for (std::size_t i = 2; i < fields.size(); ++i) leaves.push_back(std::stod(fields[i]));
    return tree::StepFunction<double>(params, std::move(leaves));
  } catch (const std::invalid_argument&) {
    throw std::domain_error("malformed step function CSV row");
  } catch (const std::out_of_range&) {
    throw std::domain_error("malformed step function CSV row");
  }
}

json to_json(const tree::LayerCake<double>& cake) {
  json out = json::array();
  for (const auto& atom : cake.atoms) out.push_back({atom.value, atom.measure});
  return out;
}

json to_json(const extremal::ExtremizerReport& report) {
  return json{{"target_value", report.target_value},   {"achieved_value", report.achieved_value},
              {"achieved_f", report.achieved_f},       {"achieved_F", report.achieved_F},
              {"depth", report.depth},                 {"relative_gap", report.relative_gap}};
}

json to_json(const oracle::SandwichResult& r) {
  return json{{"kind", oracle::to_string(r.spec.kind)},
              {"N", r.N},
              {"m", r.depth},
              {"p", r.spec.p},
              {"q", r.spec.q},
              {"kappa", r.spec.kappa},
              {"L", r.spec.L},
              {"F", r.F},
              {"f", r.f},
              {"lower", r.lower},
              {"upper", r.upper},
              {"gap", r.gap},
              {"evaluations", r.evaluations},
              {"seed", r.seed},
              {"start", r.start_label},
              {"argmin", to_json(r.argmin)}};
}

std::string sandwich_csv_header() { return "kind,N,m,p,q,kappa,L,F,f,lower,upper,gap,evaluations,seed"; }

std::string to_csv_row(const oracle::SandwichResult& r) {
  std::ostringstream out;
  out << oracle::to_string(r.spec.kind) << ',' << r.N << ',' << r.depth << ',' << format_number(r.spec.p)
      << ',' << format_number(r.spec.q) << ',' << format_number(r.spec.kappa) << ','
      << format_number(r.spec.L) << ',' << format_number(r.F) << ',' << format_number(r.f) << ','
      << format_number(r.lower) << ',' << format_number(r.upper) << ',' << format_number(r.gap) << ','
      << r.evaluations << ',' << r.seed;
  return out.str();
}

}  // namespace bellman::io
