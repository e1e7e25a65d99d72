#pragma once

// Feasible-point upper bounds for the Bellman infima.  Every value returned
// here is attained by an explicit step function satisfying the moment
// constraints, so it brackets the closed-form lower bound from above.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bellman/bellman_forms.hpp"
#include "bellman/tree_lab.hpp"

namespace bellman::oracle {

using forms::BellmanQuery;
using tree::StepFunction;
using tree::TreeParams;

enum class ObjectiveKind { strong_q, top_kappa_p, max_with_L };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(std::string_view name);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::strong_q;
  double p = 2.0;
  double q = 2.0;      // strong_q, max_with_L
  double kappa = 1.0;  // top_kappa_p
  double L = 0.0;      // max_with_L

  static ObjectiveSpec strong(double p, double q) { return {ObjectiveKind::strong_q, p, q, 1.0, 0.0}; }
  static ObjectiveSpec top_kappa(double p, double kappa) {
    return {ObjectiveKind::top_kappa_p, p, p, kappa, 0.0};
  }
  static ObjectiveSpec max_with(double p, double q, double L) {
    return {ObjectiveKind::max_with_L, p, q, 1.0, L};
  }

  void validate() const;
};

struct SandwichResult {
  ObjectiveSpec spec;
  int N = 2;
  int depth = 0;
  double F = 0.0;
  double f = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  StepFunction<double> argmin = StepFunction<double>::constant(TreeParams(2, 0), 0.0);
  double gap = 0.0;
  long long evaluations = 0;
  /// Index of the winning start in the start list (structured starts first,
  /// then caller-supplied starts, then one per random seed).
  long long seed = 0;
  std::string start_label;
};

/// Moment constraint tolerance (relative, floored at 1).
inline constexpr double kFeasibilityTol = 1e-10;
/// Tolerance for objective comparisons.
inline constexpr double kObjectiveTol = 1e-9;
/// Largest leaf count local_search accepts by default (N = 2, depth 6).
inline constexpr std::size_t kDefaultLeafCap = 64;

class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool moments_within(const StepFunction<double>& phi, double f, double F, double p,
                    double tol = kFeasibilityTol);

/// Maps a nonnegative leaf vector to one with mean f and p-moment F.  Scales
/// to the right mean, then moves along (1-t) f + t w; when even the
/// nonnegative extreme of that segment falls short, w is sharpened and the
/// search repeats.  Throws ProjectionError when no feasible point is reached.
StepFunction<double> feasible_project(const TreeParams& params, std::span<const double> values, double f,
                                      double F, double p);

double evaluate_objective(const StepFunction<double>& phi, const ObjectiveSpec& spec);

/// Closed-form lower bound matching the objective.
double closed_form_lower(const BellmanQuery& query, const ObjectiveSpec& spec);

/// True when `leaves` is the canonical representative of its orbit under
/// permutations of sibling subtrees: at every cell the children blocks are
/// lexicographically nonincreasing.
bool is_canonical(const TreeParams& params, std::span<const long long> leaves);

/// Grid search over canonical leaf vectors with entries k/resolution,
/// projected to feasibility.  Only for leaf counts <= N^2.
SandwichResult exhaustive_search(int n, int m, double f, double F, double p, const ObjectiveSpec& spec,
                                 int resolution);

struct LocalSearchOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  long long iteration_budget = 4000;
  std::size_t leaf_cap = kDefaultLeafCap;
  /// Additional starting points (leaf vectors at the search depth).
  std::vector<std::vector<double>> extra_starts;
};

/// Multi-start coordinate descent with re-projection after every move.
SandwichResult local_search(int n, int m, double f, double F, double p, const ObjectiveSpec& spec,
                            const LocalSearchOptions& options);

/// Upper bounds at each depth paired with the closed-form lower bound.  Each
/// depth is also started from the previous depth's argmin, refined.
std::vector<SandwichResult> sandwich(const BellmanQuery& query, const ObjectiveSpec& spec,
                                     const std::vector<int>& depths, const LocalSearchOptions& options,
                                     int exhaustive_resolution = 16);

/// Repeats every leaf N^(to_depth - from_depth) times.
std::vector<double> refine_leaves(int n, std::span<const double> leaves, int from_depth, int to_depth);

}  // namespace bellman::oracle
