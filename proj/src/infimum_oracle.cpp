#include "bellman/infimum_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <optional>

#include "bellman/extremizers.hpp"
#include "bellman/sampling.hpp"

namespace bellman::oracle {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::strong_q:
      return "strong_q";
    case ObjectiveKind::top_kappa_p:
      return "top_kappa_p";
    case ObjectiveKind::max_with_L:
      return "max_with_L";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "strong_q") return ObjectiveKind::strong_q;
  if (name == "top_kappa_p") return ObjectiveKind::top_kappa_p;
  if (name == "max_with_L") return ObjectiveKind::max_with_L;
  throw std::domain_error("unknown objective kind: " + std::string(name));
}

void ObjectiveSpec::validate() const {
  require(p > 1.0, "objective requires p > 1");
  switch (kind) {
    case ObjectiveKind::strong_q:
      require(q > 0.0, "strong_q requires q > 0");
      break;
    case ObjectiveKind::top_kappa_p:
      require(kappa > 0.0 && kappa <= 1.0, "top_kappa_p requires kappa in (0, 1]");
      break;
    case ObjectiveKind::max_with_L:
      require(q > p, "max_with_L requires q > p");
      require(L > 0.0, "max_with_L requires L > 0");
      break;
  }
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double moment_of(std::span<const double> v, double p) {
  double acc = 0.0;
  for (double x : v) acc += std::pow(x, p);
  return acc / static_cast<double>(v.size());
}

bool within(double value, double target, double tol) {
  return std::abs(value - target) <= tol * std::max(1.0, std::abs(target));
}

}  // namespace

bool moments_within(const StepFunction<double>& phi, double f, double F, double p, double tol) {
  return within(mean_of(phi.leaves()), f, tol) && within(moment_of(phi.leaves(), p), F, tol);
}

StepFunction<double> feasible_project(const TreeParams& params, std::span<const double> values, double f,
                                      double F, double p) {
  forms::detail::check_moments(F, f, p);
  require(values.size() == params.leaf_count(), "leaf vector length does not match the tree");
  for (double v : values) require(std::isfinite(v) && v >= 0.0, "leaf values must be finite and >= 0");

  std::vector<double> w(values.begin(), values.end());
  if (within(mean_of(w), f, kFeasibilityTol) && within(moment_of(w, p), F, kFeasibilityTol)) {
    return StepFunction<double>(params, std::move(w));
  }
  if (F <= std::pow(f, p) * (1.0 + 1e-14)) return StepFunction<double>::constant(params, f);

  constexpr int kMaxRounds = 64;
  for (int round = 0; round < kMaxRounds; ++round) {
    const double mean = mean_of(w);
    if (!(mean > 0.0)) throw ProjectionError("cannot project the zero vector");
    const double scale = f / mean;
    for (double& x : w) x *= scale;

    const double lowest = *std::min_element(w.begin(), w.end());
    auto blend = [&](double t) {
      std::vector<double> out(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::max(0.0, (1.0 - t) * f + t * w[i]);
      return out;
    };
    auto excess = [&](double t) { return moment_of(blend(t), p) - F; };

    double hi = 1.0;
    if (excess(1.0) < 0.0) {
      if (lowest >= f * (1.0 - 1e-15)) throw ProjectionError("constant vector cannot reach the p-moment");
      hi = f / (f - lowest);
      if (excess(hi) < 0.0) {
        // Sharpen: square the profile (normalized by its peak) and retry.
        const double peak = *std::max_element(w.begin(), w.end());
        for (double& x : w) x = (x / peak) * (x / peak);
        continue;
      }
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (excess(mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    auto out = blend(0.5 * (lo + hi));
    if (!within(mean_of(out), f, kFeasibilityTol) || !within(moment_of(out, p), F, kFeasibilityTol)) {
      throw ProjectionError("projection did not reach the moment tolerance");
    }
    return StepFunction<double>(params, std::move(out));
  }
  throw ProjectionError("projection iteration cap reached");
}

double evaluate_objective(const StepFunction<double>& phi, const ObjectiveSpec& spec) {
  const auto M = tree::maximal(phi);
  switch (spec.kind) {
    case ObjectiveKind::strong_q:
      return tree::integral_power(M, spec.q);
    case ObjectiveKind::top_kappa_p:
      return tree::top_measure_integral(M, spec.kappa, spec.p);
    case ObjectiveKind::max_with_L: {
      double acc = 0.0;
      for (const auto& atom : tree::distribution(M).atoms) {
        acc += atom.measure * std::pow(std::max(atom.value, spec.L), spec.q);
      }
      return acc;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double closed_form_lower(const BellmanQuery& query, const ObjectiveSpec& spec) {
  query.validate();
  spec.validate();
  const double F = query.F;
  const double f = query.f;
  switch (spec.kind) {
    case ObjectiveKind::strong_q:
      if (spec.q < spec.p) return forms::bq_less_p(f, spec.q);
      if (spec.q == spec.p) return forms::lp_lower(F, f, query.N, spec.p);
      return forms::bpq_lower(F, f, query.N, spec.p, spec.q);
    case ObjectiveKind::top_kappa_p:
      return forms::dp_piecewise(F, f, spec.kappa, query.N, spec.p);
    case ObjectiveKind::max_with_L:
      return forms::blq_lower(F, f, spec.L, query.N, spec.p, spec.q);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool is_canonical(const TreeParams& params, std::span<const long long> leaves) {
  require(leaves.size() == params.leaf_count(), "leaf vector length does not match the tree");
  const auto n = static_cast<std::size_t>(params.branching());
  for (int s = 0; s < params.depth(); ++s) {
    const std::size_t child_width = params.leaves_per_cell(s + 1);
    for (std::size_t cell = 0; cell < params.cells_at(s); ++cell) {
      const std::size_t start = cell * child_width * n;
      for (std::size_t d = 0; d + 1 < n; ++d) {
        const auto a = leaves.subspan(start + d * child_width, child_width);
        const auto b = leaves.subspan(start + (d + 1) * child_width, child_width);
        if (std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())) return false;
      }
    }
  }
  return true;
}

namespace {

double compute_gap(double upper, double lower) {
  return (upper - lower) / std::max(lower, 1e-12);
}

SandwichResult make_result(int n, int m, double f, double F, double p, const ObjectiveSpec& spec) {
  SandwichResult r;
  r.spec = spec;
  r.N = n;
  r.depth = m;
  r.F = F;
  r.f = f;
  r.lower = closed_form_lower(BellmanQuery{n, p, spec.q, F, f, std::nullopt, std::nullopt}, spec);
  r.upper = std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace

SandwichResult exhaustive_search(int n, int m, double f, double F, double p, const ObjectiveSpec& spec,
                                 int resolution) {
  const TreeParams params(n, m);
  require(m <= 2, "exhaustive_search supports at most N^2 leaves");
  require(resolution >= 16, "exhaustive_search requires resolution >= 16");
  spec.validate();
  SandwichResult result = make_result(n, m, f, F, p, spec);

  const std::size_t count = params.leaf_count();
  std::vector<long long> parts(count, 0);
  std::vector<double> values(count);
  long long candidate = 0;
  bool found = false;

  // Compositions of `resolution` into `count` parts, in lexicographic order.
  std::function<void(std::size_t, long long)> enumerate = [&](std::size_t i, long long remaining) {
    if (i + 1 == count) {
      parts[i] = remaining;
      if (!is_canonical(params, parts)) return;
      for (std::size_t j = 0; j < count; ++j) {
        values[j] = static_cast<double>(parts[j]) / resolution;
      }
      const long long index = candidate++;
      try {
        const auto phi = feasible_project(params, values, f, F, p);
        const double value = evaluate_objective(phi, spec);
        ++result.evaluations;
        if (!found || value < result.upper) {
          result.upper = value;
          result.argmin = phi;
          result.seed = index;
          found = true;
        }
      } catch (const ProjectionError&) {
      }
      return;
    }
    for (long long k = remaining; k >= 0; --k) {
      parts[i] = k;
      enumerate(i + 1, remaining - k);
    }
  };
  enumerate(0, resolution);

  if (!found) throw InfeasibleError("exhaustive_search: no grid point projects to the moment constraints");
  result.start_label = "grid";
  result.gap = compute_gap(result.upper, result.lower);
  return result;
}

namespace {

struct Start {
  std::string label;
  std::vector<double> leaves;
};

struct Outcome {
  double value = std::numeric_limits<double>::infinity();
  std::optional<StepFunction<double>> argmin;
  long long evaluations = 0;
};

Outcome descend(const TreeParams& params, double f, double F, double p, const ObjectiveSpec& spec,
                const std::vector<double>& start, long long budget) {
  Outcome out;
  std::optional<StepFunction<double>> projected;
  try {
    projected = feasible_project(params, start, f, F, p);
  } catch (const ProjectionError&) {
    return out;
  }
  StepFunction<double> current = std::move(*projected);

  double value = evaluate_objective(current, spec);
  long long evals = 1;
  double step = 0.5 * f;
  while (evals < budget && step > 1e-7 * f) {
    bool improved = false;
    for (std::size_t i = 0; i < current.size() && evals < budget; ++i) {
      for (double direction : {1.0, -1.0}) {
        std::vector<double> trial = current.leaf_vector();
        trial[i] = std::max(0.0, trial[i] + direction * step);
        if (trial[i] == current[i]) continue;
        try {
          auto candidate = feasible_project(params, trial, f, F, p);
          const double v = evaluate_objective(candidate, spec);
          ++evals;
          if (v < value - 1e-15 * std::max(1.0, std::abs(value))) {
            value = v;
            current = std::move(candidate);
            improved = true;
            break;
          }
        } catch (const ProjectionError&) {
        }
        if (evals >= budget) break;
      }
    }
    if (!improved) step *= 0.5;
  }
  out.value = value;
  out.argmin = std::move(current);
  out.evaluations = evals;
  return out;
}

}  // namespace

SandwichResult local_search(int n, int m, double f, double F, double p, const ObjectiveSpec& spec,
                            const LocalSearchOptions& options) {
  const TreeParams params(n, m);
  require(params.leaf_count() <= options.leaf_cap, "local_search depth exceeds the configured leaf cap");
  require(options.iteration_budget >= 1, "iteration budget must be positive");
  spec.validate();
  SandwichResult result = make_result(n, m, f, F, p, spec);

  std::vector<Start> starts;
  starts.push_back({"chain", extremal::chain_function<double>(n, m, f).leaf_vector()});
  if (m >= 1) {
    const int host = (m + 1) / 2;
    try {
      auto built = extremal::concentrated_function(n, host, f, F, p, spec.q, m - host);
      starts.push_back({"concentrated", built.first.leaf_vector()});
    } catch (const std::exception&) {
    }
  }
  if (spec.kind == ObjectiveKind::top_kappa_p) {
    try {
      auto built = extremal::dp_near_extremizer(F, f, spec.kappa, n, p, m);
      starts.push_back({"dp", built.first.leaf_vector()});
    } catch (const std::exception&) {
    }
  }
  for (const auto& extra : options.extra_starts) {
    require(extra.size() == params.leaf_count(), "extra start has the wrong leaf count");
    starts.push_back({"embedded", extra});
  }
  for (std::uint64_t seed : options.seeds) {
    starts.push_back({"random:" + std::to_string(seed), log_uniform_leaves(params.leaf_count(), seed)});
  }

  std::vector<std::future<Outcome>> jobs;
  jobs.reserve(starts.size());
  for (const auto& start : starts) {
    jobs.push_back(std::async(std::launch::async, [&, leaves = start.leaves] {
      return descend(params, f, F, p, spec, leaves, options.iteration_budget);
    }));
  }
  // Deterministic reduction: smallest value, ties to the earliest start.
  bool found = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Outcome outcome = jobs[i].get();
    result.evaluations += outcome.evaluations;
    if (outcome.argmin && (!found || outcome.value < result.upper)) {
      result.upper = outcome.value;
      result.argmin = std::move(*outcome.argmin);
      result.seed = static_cast<long long>(i);
      result.start_label = starts[i].label;
      found = true;
    }
  }
  if (!found) throw InfeasibleError("local_search: no start could be projected to the moment constraints");
  result.gap = compute_gap(result.upper, result.lower);
  return result;
}

std::vector<double> refine_leaves(int n, std::span<const double> leaves, int from_depth, int to_depth) {
  require(to_depth >= from_depth, "refinement must not decrease depth");
  const std::size_t repeat = TreeParams(n, to_depth - from_depth).leaf_count();
  std::vector<double> out;
  out.reserve(leaves.size() * repeat);
  for (double v : leaves) out.insert(out.end(), repeat, v);
  return out;
}

std::vector<SandwichResult> sandwich(const BellmanQuery& query, const ObjectiveSpec& spec,
                                     const std::vector<int>& depths, const LocalSearchOptions& options,
                                     int exhaustive_resolution) {
  query.validate();
  spec.validate();
  require(spec.p == query.p, "objective p must match the query p");
  require(!depths.empty(), "depth list must not be empty");

  std::vector<SandwichResult> results;
  std::optional<SandwichResult> previous;
  for (int depth : depths) {
    // Mean f caps the p-moment at depth m by f^p N^(m(p-1)); such depths
    // have no feasible point and report an infinite upper bound.
    const double cap = std::pow(query.f, query.p) * std::pow(static_cast<double>(query.N), depth * (query.p - 1.0));
    if (query.F > cap * (1.0 + kFeasibilityTol)) {
      SandwichResult empty = make_result(query.N, depth, query.f, query.F, query.p, spec);
      empty.upper = std::numeric_limits<double>::infinity();
      empty.gap = std::numeric_limits<double>::infinity();
      empty.argmin = StepFunction<double>::constant(TreeParams(query.N, depth), query.f);
      empty.start_label = "infeasible";
      results.push_back(std::move(empty));
      continue;
    }
    LocalSearchOptions local = options;
    if (previous && previous->depth <= depth) {
      local.extra_starts.push_back(
          refine_leaves(query.N, previous->argmin.leaves(), previous->depth, depth));
    }
    SandwichResult best = local_search(query.N, depth, query.f, query.F, query.p, spec, local);
    if (depth <= 2) {
      try {
        auto grid = exhaustive_search(query.N, depth, query.f, query.F, query.p, spec, exhaustive_resolution);
        grid.evaluations += best.evaluations;
        if (grid.upper < best.upper) {
          best = std::move(grid);
        } else {
          best.evaluations = grid.evaluations;
        }
      } catch (const InfeasibleError&) {
      }
    }
    best.gap = compute_gap(best.upper, best.lower);
    previous = best;
    results.push_back(std::move(best));
  }
  return results;
}

}  // namespace bellman::oracle
