#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "bellman/bellman_forms.hpp"
#include "bellman/extremizers.hpp"
#include "bellman/infimum_oracle.hpp"
#include "bellman/sampling.hpp"
#include "bellman/serialization.hpp"
#include "bellman/tree_lab.hpp"

namespace bellman::cli {

namespace {

using io::format_number;
using io::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double need(const std::optional<double>& value, const char* flag) {
  if (!value) throw UsageError(std::string("missing required flag ") + flag);
  return *value;
}

// Writes to --out when given, else to the provided stream.
void emit(const RunConfig& config, std::ostream& fallback, const std::string& text) {
  if (config.out.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(config.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file " + config.out);
  file << text;
}

void check_format(const RunConfig& config) {
  if (config.format != "csv" && config.format != "json") throw UsageError("--format must be csv or json");
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) throw UsageError("empty grid");
  try {
    if (text.find(':') != std::string::npos) {
      std::istringstream in(text);
      std::string a, b, c;
      std::getline(in, a, ':');
      std::getline(in, b, ':');
      std::getline(in, c, ':');
      const double start = std::stod(a);
      const double stop = std::stod(b);
      const int count = std::stoi(c);
      if (count < 1) throw UsageError("grid count must be positive");
      for (int i = 0; i < count; ++i) {
        out.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
      }
      return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (!item.empty()) out.push_back(std::stod(item));
    }
  } catch (const std::invalid_argument&) {
    throw UsageError("malformed grid: " + text);
  } catch (const std::out_of_range&) {
    throw UsageError("malformed grid: " + text);
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_grid(text)) {
    if (v != std::floor(v)) throw UsageError("expected integers in list: " + text);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const std::string& formula = c.formula;
  double value = 0.0;
  if (formula == "lp") {
    value = forms::lp_lower(need(c.F, "--F"), c.f, c.N, c.p);
  } else if (formula == "dp") {
    const double F = need(c.F, "--F");
    const double kappa = need(c.kappa, "--kappa");
    const double piecewise = forms::dp_piecewise(F, c.f, kappa, c.N, c.p);
    const double min_form = forms::dp_min_form(F, c.f, kappa, c.N, c.p);
    out << format_number(piecewise) << '\n'
        << "piecewise " << format_number(piecewise) << '\n'
        << "min_form " << format_number(min_form) << '\n'
        << "difference " << format_number(piecewise - min_form) << '\n';
    return kSuccess;
  } else if (formula == "weak") {
    value = forms::weak_lower(need(c.F, "--F"), c.f, c.N, c.p, need(c.q, "--q"));
  } else if (formula == "bpq") {
    value = forms::bpq_lower(need(c.F, "--F"), c.f, c.N, c.p, need(c.q, "--q"));
  } else if (formula == "blq") {
    value = forms::blq_lower(need(c.F, "--F"), c.f, need(c.L, "--L"), c.N, c.p, need(c.q, "--q"));
  } else if (formula == "chain") {
    value = forms::bpq_chain_value(c.f, c.N, c.m, c.p, need(c.q, "--q"));
  } else if (formula == "bq_less") {
    value = forms::bq_less_p(c.f, need(c.q, "--q"));
  } else {
    throw UsageError("--formula must be one of lp, dp, weak, bpq, blq, chain, bq_less");
  }
  out << format_number(value) << '\n';
  return kSuccess;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  check_format(c);
  std::vector<double> F_values = c.F_grid.empty() ? std::vector<double>{} : parse_grid(c.F_grid);
  if (F_values.empty() && c.F) F_values.push_back(*c.F);
  std::vector<double> kappa_values = c.kappa_grid.empty() ? std::vector<double>{} : parse_grid(c.kappa_grid);
  if (kappa_values.empty() && c.kappa) kappa_values.push_back(*c.kappa);
  if (F_values.empty() || kappa_values.empty()) throw UsageError("sweep needs a nonempty F grid and kappa grid");

  std::string text;
  json rows = json::array();
  if (c.format == "csv") text = "N,p,q,F,f,kappa,L,lp,dp_piecewise,dp_min_form,u_star,weak,bpq,blq\n";
  for (double F : F_values) {
    for (double kappa : kappa_values) {
      const double lp = forms::lp_lower(F, c.f, c.N, c.p);
      const double dp = forms::dp_piecewise(F, c.f, kappa, c.N, c.p);
      const double dp_min = forms::dp_min_form(F, c.f, kappa, c.N, c.p);
      const double u = forms::u_star(F, c.f, kappa, c.N, c.p);
      std::optional<double> weak, bpq, blq;
      if (c.q && *c.q > c.p) {
        weak = forms::weak_lower(F, c.f, c.N, c.p, *c.q);
        bpq = forms::bpq_lower(F, c.f, c.N, c.p, *c.q);
        if (c.L) blq = forms::blq_lower(F, c.f, *c.L, c.N, c.p, *c.q);
      }
      if (c.format == "csv") {
        std::ostringstream row;
        row << c.N << ',' << format_number(c.p) << ',' << csv_cell(c.q) << ',' << format_number(F) << ','
            << format_number(c.f) << ',' << format_number(kappa) << ',' << csv_cell(c.L) << ','
            << format_number(lp) << ',' << format_number(dp) << ',' << format_number(dp_min) << ','
            << format_number(u) << ',' << csv_cell(weak) << ',' << csv_cell(bpq) << ',' << csv_cell(blq)
            << '\n';
        text += row.str();
      } else {
        rows.push_back(json{{"N", c.N},
                            {"p", c.p},
                            {"q", nullable(c.q)},
                            {"F", F},
                            {"f", c.f},
                            {"kappa", kappa},
                            {"L", nullable(c.L)},
                            {"lp", lp},
                            {"dp_piecewise", dp},
                            {"dp_min_form", dp_min},
                            {"u_star", u},
                            {"weak", nullable(weak)},
                            {"bpq", nullable(bpq)},
                            {"blq", nullable(blq)}});
      }
    }
  }
  if (c.format == "json") text = rows.dump(2) + "\n";
  emit(c, out, text);
  return kSuccess;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_format(c);
  if (c.samples < 1) throw UsageError("--samples must be at least 1");
  const double q = need(c.q, "--q");
  std::vector<double> kappa_grid = parse_grid(c.kappa_grid.empty() ? "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,1"
                                                                    : c.kappa_grid);
  const std::vector<double> L_grid = parse_grid(c.L_grid);
  const tree::TreeParams params(c.N, c.depth);

  std::mt19937_64 rng(c.seed);
  int failures = 0;
  int violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::string text = c.format == "csv" ? "sample,f,F,min_slack,violations\n" : "";
  json samples = json::array();

  for (int i = 0; i < c.samples; ++i) {
    const auto raw = log_uniform_leaves(params.leaf_count(), rng);
    double target_F = 0.0;
    if (c.F) {
      target_F = *c.F;
    } else {
      double mean = 0.0, moment = 0.0;
      for (double v : raw) mean += v;
      mean /= static_cast<double>(raw.size());
      for (double v : raw) moment += std::pow(v * c.f / mean, c.p);
      target_F = std::max(moment / static_cast<double>(raw.size()), std::pow(c.f, c.p));
    }
    std::optional<tree::StepFunction<double>> phi;
    try {
      phi = oracle::feasible_project(params, raw, c.f, target_F, c.p);
    } catch (const oracle::ProjectionError&) {
      ++failures;
      continue;
    }
    const auto report = extremal::verify_bounds(*phi, c.p, q, kappa_grid, L_grid, c.tol, c.inflate_bounds);
    min_slack = std::min(min_slack, report.min_slack);
    violations += static_cast<int>(report.violations.size());
    for (const auto& v : report.violations) err << "sample " << i << ": " << v << '\n';
    if (c.format == "csv") {
      text += std::to_string(i) + ',' + format_number(report.f) + ',' + format_number(report.F) + ',' +
              format_number(report.min_slack) + ',' + std::to_string(report.violations.size()) + '\n';
    } else {
      samples.push_back(json{{"sample", i},
                             {"f", report.f},
                             {"F", report.F},
                             {"min_slack", report.min_slack},
                             {"violations", report.violations}});
    }
  }
  if (c.format == "json") {
    json doc{{"N", c.N},
             {"depth", c.depth},
             {"p", c.p},
             {"q", q},
             {"seed", c.seed},
             {"samples", samples},
             {"min_slack", min_slack},
             {"violations", violations},
             {"projection_failures", failures}};
    text = doc.dump(2) + "\n";
  }
  if (!c.out.empty()) emit(c, out, text);
  out << "samples " << c.samples << " min_slack " << format_number(min_slack) << " violations " << violations
      << " projection_failures " << failures << '\n';
  if (violations > 0) return kViolation;
  if (failures * 100 > c.samples) {
    err << "projection failures exceed the 1% budget\n";
    return kInternal;
  }
  return kSuccess;
}

int cmd_oracle(const RunConfig& c, std::ostream& out) {
  check_format(c);
  forms::BellmanQuery query{c.N, c.p, c.q.value_or(c.p), need(c.F, "--F"), c.f, c.kappa, c.L};
  oracle::ObjectiveSpec spec;
  spec.kind = oracle::parse_objective_kind(c.kind);
  spec.p = c.p;
  spec.q = c.q.value_or(c.p);
  if (spec.kind == oracle::ObjectiveKind::top_kappa_p) spec.kappa = need(c.kappa, "--kappa");
  if (spec.kind == oracle::ObjectiveKind::max_with_L) spec.L = need(c.L, "--L");

  oracle::LocalSearchOptions options;
  options.seeds.clear();
  for (int i = 0; i < std::max(1, c.starts); ++i) options.seeds.push_back(c.seed + static_cast<std::uint64_t>(i));
  options.iteration_budget = c.budget;
  const auto depths = parse_int_list(c.depth_list);
  if (depths.empty()) throw UsageError("--depth-list must not be empty");

  const auto results = oracle::sandwich(query, spec, depths, options);
  std::string text;
  if (c.format == "csv") {
    text = io::sandwich_csv_header() + "\n";
    for (const auto& r : results) text += io::to_csv_row(r) + "\n";
  } else {
    json doc = json::array();
    for (const auto& r : results) doc.push_back(io::to_json(r));
    text = doc.dump(2) + "\n";
  }
  if (!c.out.empty()) emit(c, out, text);
  for (const auto& r : results) {
    out << "depth " << r.depth << " lower " << format_number(r.lower) << " upper " << format_number(r.upper)
        << " gap " << format_number(r.gap) << '\n';
  }
  if (c.out.empty()) out << text;
  return kSuccess;
}

int cmd_extremal(const RunConfig& c, std::ostream& out) {
  json doc;
  if (c.construction == "chain") {
    const double q = c.q.value_or(c.p);
    const auto phi = extremal::chain_function<double>(c.N, c.m, c.f);
    doc["step_function"] = io::to_json(phi);
    doc["report"] = io::to_json(extremal::chain_report(c.N, c.m, c.f, c.p, q));
  } else if (c.construction == "concentrated") {
    const double q = c.q.value_or(0.5 * (1.0 + c.p));
    const int extension = c.depth_extension >= 0 ? c.depth_extension : c.m;
    auto [phi, report] = extremal::concentrated_function(c.N, c.m, c.f, need(c.F, "--F"), c.p, q, extension);
    doc["step_function"] = io::to_json(phi);
    doc["report"] = io::to_json(report);
  } else if (c.construction == "dp") {
    auto [phi, report] =
        extremal::dp_near_extremizer(need(c.F, "--F"), c.f, need(c.kappa, "--kappa"), c.N, c.p, c.depth);
    doc["step_function"] = io::to_json(phi);
    doc["report"] = io::to_json(report);
  } else {
    throw UsageError("--construction must be one of chain, concentrated, dp");
  }
  emit(c, out, doc.dump(2) + "\n");
  return kSuccess;
}

namespace {

void add_query_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--N", c.N, "Branching factor N >= 2");
  app->add_option("--p", c.p, "Exponent p > 1");
  app->add_option("--q", c.q, "Second exponent q");
  app->add_option("--F", c.F, "p-moment F");
  app->add_option("--f", c.f, "Mean f");
  app->add_option("--kappa", c.kappa, "Measure kappa in (0, 1]");
  app->add_option("--L", c.L, "Floor L >= f");
}

void add_output_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--format", c.format, "csv or json");
  app->add_option("--out", c.out, "Output path (default stdout)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"bellctl: lower bounds for dyadic-type maximal operators on homogeneous trees"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Evaluate a closed-form bound");
  add_query_flags(eval, c);
  eval->add_option("--m", c.m, "Chain depth");
  eval->add_option("--formula", c.formula, "lp, dp, weak, bpq, blq, chain, bq_less")->required();

  auto* sweep = app.add_subcommand("sweep", "Tabulate closed forms over grids");
  add_query_flags(sweep, c);
  add_output_flags(sweep, c);
  sweep->add_option("--kappa-grid", c.kappa_grid, "List a,b,c or start:stop:count");
  sweep->add_option("--F-grid", c.F_grid, "List a,b,c or start:stop:count");

  auto* verify = app.add_subcommand("verify", "Check every bound on random step functions");
  add_query_flags(verify, c);
  add_output_flags(verify, c);
  verify->add_option("--depth", c.depth, "Tree depth");
  verify->add_option("--samples", c.samples, "Number of random step functions");
  verify->add_option("--seed", c.seed, "RNG seed");
  verify->add_option("--tol", c.tol, "Allowed negative slack");
  verify->add_option("--kappa-grid", c.kappa_grid, "kappa values to test");
  verify->add_option("--L-grid", c.L_grid, "L values as multiples of f (>= 1)");
  verify->add_option("--inflate-bounds", c.inflate_bounds, "Multiply every bound (failure-path testing)")
      ->group("");

  auto* oracle_cmd = app.add_subcommand("oracle", "Bracket a Bellman value between bound and search");
  add_query_flags(oracle_cmd, c);
  add_output_flags(oracle_cmd, c);
  oracle_cmd->add_option("--kind", c.kind, "strong_q, top_kappa_p or max_with_L");
  oracle_cmd->add_option("--depth-list", c.depth_list, "Depths to search, e.g. 1,2,3,4");
  oracle_cmd->add_option("--samples", c.starts, "Number of random starts");
  oracle_cmd->add_option("--seed", c.seed, "First random seed");
  oracle_cmd->add_option("--budget", c.budget, "Objective evaluations per start");

  auto* extremal_cmd = app.add_subcommand("extremal", "Build an extremal step function");
  add_query_flags(extremal_cmd, c);
  extremal_cmd->add_option("--out", c.out, "Output path (default stdout)");
  extremal_cmd->add_option("--construction", c.construction, "chain, concentrated or dp")->required();
  extremal_cmd->add_option("--m", c.m, "Chain / host cell level");
  extremal_cmd->add_option("--depth", c.depth, "Tree depth (dp)");
  extremal_cmd->add_option("--depth-extension", c.depth_extension, "Extra levels below the host cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*eval) return cmd_eval(c, out);
    if (*sweep) return cmd_sweep(c, out);
    if (*verify) return cmd_verify(c, out, err);
    if (*oracle_cmd) return cmd_oracle(c, out);
    if (*extremal_cmd) return cmd_extremal(c, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace bellman::cli
