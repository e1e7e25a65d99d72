#pragma once

// Explicit extremal and near-extremal step functions for the lower bounds in
// bellman_forms, with reports comparing the achieved functional against the
// closed form.

#include <utility>
#include <vector>

#include "bellman/bellman_forms.hpp"
#include "bellman/tree_lab.hpp"

namespace bellman::extremal {

using tree::LayerCake;
using tree::StepFunction;
using tree::TreeParams;

struct ExtremizerReport {
  double target_value = 0.0;
  double achieved_value = 0.0;
  double achieved_f = 0.0;
  double achieved_F = 0.0;
  int depth = 0;
  double relative_gap = 0.0;
};

/// f N^m on the all-zeros leaf, zero elsewhere.
template <Scalar T>
StepFunction<T> chain_function(int n, int m, const T& f) {
  require(f > 0, "f must be positive");
  const TreeParams params(n, m);
  std::vector<T> leaves(params.leaf_count(), T(0));
  leaves[0] = f * power(T(n), static_cast<long long>(m));
  return StepFunction<T>(params, std::move(leaves));
}

/// Distribution of the maximal function of chain_function(n, m, f), written
/// down directly: f N^s on I_s \ I_{s+1} and f N^m on the deepest cell.
template <Scalar T>
LayerCake<T> chain_profile(int n, int m, const T& f) {
  require(n >= 2 && m >= 0, "chain_profile requires N >= 2 and m >= 0");
  require(f > 0, "f must be positive");
  const T N(n);
  LayerCake<T> cake;
  cake.atoms.push_back({f * power(N, static_cast<long long>(m)), power(N, -static_cast<long long>(m))});
  for (int s = m - 1; s >= 0; --s) {
    cake.atoms.push_back({f * power(N, static_cast<long long>(s)),
                          (1 - 1 / N) * power(N, -static_cast<long long>(s))});
  }
  return cake;
}

/// Report for the chain: target is the q-bound at its own moments.
ExtremizerReport chain_report(int n, int m, double f, double p, double q);

/// phi = a chi_C on the all-zeros level-m cell I, f elsewhere, with C a
/// leftmost run of leaves at depth m + depth_extension.  The mean is kept
/// exact; the p-moment absorbs the rounding of mu(C).  The report measures
/// int (M phi)^q against f^q.
std::pair<StepFunction<double>, ExtremizerReport> concentrated_function(int n, int m, double f, double F,
                                                                        double p, double q,
                                                                        int depth_extension);

/// Near-extremal block for the Lp lower bound on a subtree of the given
/// depth: mean `mean`, normalized p-moment `p_moment`.  Candidates are a
/// single spike over a constant base, and full chains of depth k on some of
/// the level-l cells (all cells keeping mean `mean`) with one spike cell
/// absorbing the remainder; the candidate with the smallest functional wins.
struct LpBlock {
  std::vector<double> leaves;
  /// Normalized integral of (M block)^p over the subtree.
  double functional = 0.0;
  /// Normalized p-moment actually realized (below target when unreachable).
  double p_moment = 0.0;
};

LpBlock lp_near_extremal_block(int n, int depth, double mean, double p_moment, double p);

/// Near-extremizer for D_p(F, f, kappa) at the given depth.  kappa must be a
/// multiple of N^-depth.
std::pair<StepFunction<double>, ExtremizerReport> dp_near_extremizer(double F, double f, double kappa,
                                                                     int n, double p, int depth);

struct VerifyReport {
  double f = 0.0;
  double F = 0.0;
  double min_slack = 0.0;
  int checks = 0;
  std::vector<std::string> violations;
};

/// Evaluates every lower bound on phi and records the smallest relative
/// slack (value - bound) / max(1, |bound|).  `bound_scale` multiplies each
/// bound before comparison; values other than 1 exist to exercise the
/// violation path.
VerifyReport verify_bounds(const StepFunction<double>& phi, double p, double q,
                           const std::vector<double>& kappa_grid, const std::vector<double>& L_grid,
                           double tol = 1e-9, double bound_scale = 1.0);

}  // namespace bellman::extremal
