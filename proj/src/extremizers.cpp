#include "bellman/extremizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bellman::extremal {

namespace {

double relative_gap(double achieved, double target) {
  return (achieved - target) / std::max(std::abs(target), std::numeric_limits<double>::min());
}

ExtremizerReport make_report(const StepFunction<double>& phi, double p, double target, double achieved) {
  ExtremizerReport report;
  report.target_value = target;
  report.achieved_value = achieved;
  report.achieved_f = tree::integral(phi);
  report.achieved_F = tree::integral_power(phi, p);
  report.depth = phi.params().depth();
  report.relative_gap = relative_gap(achieved, target);
  return report;
}

// Functional of a spike block at level s >= 1 with peak x and base y.
double spike_functional(int n, int s, double x, double y, double p) {
  const double N = n;
  double total = std::pow(N, -s) * std::pow(x, p);
  for (int t = 0; t < s; ++t) {
    const double share = std::pow(N, t - s);
    const double avg = x * share + y * (1.0 - share);
    total += (1.0 - 1.0 / N) * std::pow(N, -t) * std::pow(avg, p);
  }
  return total;
}

}  // namespace

ExtremizerReport chain_report(int n, int m, double f, double p, double q) {
  const auto phi = chain_function<double>(n, m, f);
  const double F = std::pow(static_cast<double>(n), m * (p - 1.0)) * std::pow(f, p);
  const double target = forms::bpq_lower(F, f, n, p, q);
  const double achieved = tree::integral_power(tree::maximal(phi), q);
  return make_report(phi, p, target, achieved);
}

std::pair<StepFunction<double>, ExtremizerReport> concentrated_function(int n, int m, double f, double F,
                                                                        double p, double q,
                                                                        int depth_extension) {
  forms::detail::check_moments(F, f, p);
  require(m >= 1, "concentrated_function requires m >= 1");
  require(depth_extension >= 0, "depth_extension must be nonnegative");
  const TreeParams params(n, m + depth_extension);
  const double cell = std::pow(static_cast<double>(n), -m);
  const double excess = std::max(0.0, F - std::pow(f, p) * (1.0 - cell));
  const double height = std::pow(excess / (f * cell), 1.0 / (p - 1.0));
  const double support = f * cell / height;
  if (support > cell * (1.0 + 1e-12)) {
    throw InfeasibleError("concentrated_function: support measure exceeds the host cell");
  }

  const std::size_t host_leaves = params.leaves_per_cell(m);
  const double leaf = 1.0 / static_cast<double>(params.leaf_count());
  auto count = static_cast<std::size_t>(std::llround(support / leaf));
  count = std::clamp<std::size_t>(count, 1, host_leaves);
  // Keep the mean exact on the host cell; F absorbs the rounding.
  const double value = f * cell / (static_cast<double>(count) * leaf);

  std::vector<double> leaves(params.leaf_count(), f);
  std::fill(leaves.begin(), leaves.begin() + static_cast<std::ptrdiff_t>(host_leaves), 0.0);
  std::fill(leaves.begin(), leaves.begin() + static_cast<std::ptrdiff_t>(count), value);
  StepFunction<double> phi(params, std::move(leaves));

  const double achieved = tree::integral_power(tree::maximal(phi), q);
  auto report = make_report(phi, p, forms::bq_less_p(f, q), achieved);
  return {std::move(phi), report};
}

namespace {

struct SpikeBlock {
  int spike_level = 0;
  double peak = 0.0;
  double base = 0.0;
  double functional = 0.0;
  double p_moment = 0.0;
};

SpikeBlock best_spike_block(int n, int max_level, double mean, double p_moment, double p) {
  const double floor_moment = std::pow(mean, p);
  SpikeBlock constant{0, mean, mean, floor_moment, floor_moment};
  if (p_moment <= floor_moment * (1.0 + 1e-14) || max_level == 0) return constant;

  bool found = false;
  SpikeBlock best;
  for (int s = 1; s <= max_level; ++s) {
    const double eps = std::pow(static_cast<double>(n), -s);
    const double cap = floor_moment * std::pow(static_cast<double>(n), s * (p - 1.0));
    if (cap < p_moment) continue;
    auto peak_of = [&](double base) { return (mean - base * (1.0 - eps)) / eps; };
    auto moment_of = [&](double base) {
      return std::pow(peak_of(base), p) * eps + std::pow(base, p) * (1.0 - eps);
    };
    // moment_of decreases from cap (base 0) to mean^p (base mean).
    double lo = 0.0;
    double hi = mean;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (moment_of(mid) > p_moment) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double base = 0.5 * (lo + hi);
    const double peak = peak_of(base);
    const SpikeBlock block{s, peak, base, spike_functional(n, s, peak, base, p), moment_of(base)};
    if (!found || block.functional < best.functional) {
      best = block;
      found = true;
    }
  }
  if (found) return best;

  // Unreachable p-moment at this depth: the deepest full spike is the best we can do.
  const double eps = std::pow(static_cast<double>(n), -max_level);
  const double peak = mean / eps;
  return {max_level, peak, 0.0, spike_functional(n, max_level, peak, 0.0, p),
          floor_moment * std::pow(static_cast<double>(n), max_level * (p - 1.0))};
}

void write_spike(std::vector<double>& leaves, std::size_t offset, int n, int depth, const SpikeBlock& block) {
  const TreeParams params(n, depth);
  const std::size_t width = params.leaf_count();
  const std::size_t spike_width = params.leaves_per_cell(block.spike_level);
  std::fill_n(leaves.begin() + static_cast<std::ptrdiff_t>(offset), width, block.base);
  std::fill_n(leaves.begin() + static_cast<std::ptrdiff_t>(offset), spike_width, block.peak);
}

}  // namespace

LpBlock lp_near_extremal_block(int n, int depth, double mean, double p_moment, double p) {
  require(n >= 2, "branching must be at least 2");
  require(mean > 0.0, "block mean must be positive");
  require(depth >= 0, "block depth must be nonnegative");
  require(p > 1.0, "p must exceed 1");
  const TreeParams params(n, depth);
  const double N = n;
  const double floor_moment = std::pow(mean, p);

  // Candidate 1: one spike over a constant base.
  const SpikeBlock spike = best_spike_block(n, depth, mean, p_moment, p);
  double best_functional = spike.functional;
  double best_moment = spike.p_moment;
  int best_stop = -1;
  int best_chain = 0;
  std::size_t best_full = 0;
  SpikeBlock best_rest;
  bool best_has_rest = false;

  // Candidate 2: c full chains of depth k on level-l cells, one spike cell
  // for the remainder, mean everywhere else.  Every level-l cell has mean
  // `mean`, so the maximal function is `mean` off the chain and spike cells.
  const double ratio = p_moment / floor_moment - 1.0;
  if (ratio > 1e-14) {
    for (int l = 0; l < depth; ++l) {
      const double cells = std::pow(N, l);
      for (int k = 1; l + k <= depth; ++k) {
        const double growth = std::pow(N, k * (p - 1.0)) - 1.0;
        const double wanted = ratio / growth * cells;
        if (wanted > cells) continue;
        auto full = static_cast<std::size_t>(std::floor(wanted + 1e-12));
        double remainder = wanted - static_cast<double>(full);
        if (remainder < 1e-12) remainder = 0.0;
        // Functional of a depth-k chain with mean `mean`, normalized to its cell.
        double chain_value = std::pow(mean * std::pow(N, k), p) * std::pow(N, -k);
        for (int t = 0; t < k; ++t) {
          chain_value += (1.0 - 1.0 / N) * std::pow(N, -t) * std::pow(mean * std::pow(N, t), p);
        }
        const double weight = 1.0 / cells;
        double functional = floor_moment + static_cast<double>(full) * weight * (chain_value - floor_moment);
        double moment = floor_moment + static_cast<double>(full) * weight * floor_moment * growth;
        SpikeBlock rest;
        const bool has_rest = remainder > 0.0;
        if (has_rest) {
          rest = best_spike_block(n, depth - l, mean, floor_moment * (1.0 + remainder * growth), p);
          functional += weight * (rest.functional - floor_moment);
          moment += weight * (rest.p_moment - floor_moment);
        }
        // Prefer the realized moment closest to the target, then the smaller functional.
        const double miss = std::abs(moment - p_moment);
        const double best_miss = std::abs(best_moment - p_moment);
        const double slack = 1e-12 * p_moment;
        if (miss < best_miss - slack || (miss <= best_miss + slack && functional < best_functional)) {
          best_functional = functional;
          best_moment = moment;
          best_stop = l;
          best_chain = k;
          best_full = full;
          best_rest = rest;
          best_has_rest = has_rest;
        }
      }
    }
  }

  LpBlock block;
  block.leaves.assign(params.leaf_count(), 0.0);
  block.functional = best_functional;
  block.p_moment = best_moment;
  if (best_stop < 0) {
    write_spike(block.leaves, 0, n, depth, spike);
    return block;
  }
  std::fill(block.leaves.begin(), block.leaves.end(), mean);
  const std::size_t width = params.leaves_per_cell(best_stop);
  const std::size_t chain_width = TreeParams(n, depth - best_stop).leaves_per_cell(best_chain);
  const double peak = mean * std::pow(N, best_chain);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < best_full; ++c, cursor += width) {
    std::fill_n(block.leaves.begin() + static_cast<std::ptrdiff_t>(cursor), width, 0.0);
    std::fill_n(block.leaves.begin() + static_cast<std::ptrdiff_t>(cursor), chain_width, peak);
  }
  if (best_has_rest) write_spike(block.leaves, cursor, n, depth - best_stop, best_rest);
  return block;
}

std::pair<StepFunction<double>, ExtremizerReport> dp_near_extremizer(double F, double f, double kappa,
                                                                     int n, double p, int depth) {
  const double u0 = forms::u_star(F, f, kappa, n, p);
  const TreeParams params(n, depth);
  const std::size_t total = params.leaf_count();
  const double scaled = kappa * static_cast<double>(total);
  const auto k = static_cast<std::size_t>(std::llround(scaled));
  if (k == 0 || std::abs(scaled - static_cast<double>(k)) > 1e-9 * std::max(1.0, scaled)) {
    std::ostringstream msg;
    msg << "kappa = " << kappa << " is not an N-adic rational k/N^d with d <= depth (N = " << n
        << ", depth = " << depth << ")";
    throw std::domain_error(msg.str());
  }

  const double rest_mass = f - kappa * u0;
  const double rest_measure = rest_mass / u0;
  if (rest_measure < -1e-12 || rest_measure > 1.0 - kappa + 1e-12) {
    throw InfeasibleError("dp_near_extremizer: threshold leaves no admissible filler set");
  }

  // Each stopping cell carries mean u0 and the same normalized p-moment.
  const double cell_moment = std::pow(u0, p) + (F - std::pow(u0, p - 1.0) * f) / kappa;

  std::vector<double> leaves(total, 0.0);
  std::size_t cursor = 0;
  // Digits of k in base N, most significant first: c_s cells at level s.
  std::vector<std::size_t> digits(static_cast<std::size_t>(depth) + 1, 0);
  {
    std::size_t rest = k;
    for (int s = depth; s >= 0; --s) {
      const auto nn = static_cast<std::size_t>(n);
      digits[static_cast<std::size_t>(s)] = s == 0 ? rest : rest % nn;
      rest = s == 0 ? 0 : rest / nn;
    }
  }
  for (int s = 0; s <= depth; ++s) {
    const std::size_t width = params.leaves_per_cell(s);
    const int sub_depth = depth - s;
    for (std::size_t c = 0; c < digits[static_cast<std::size_t>(s)]; ++c) {
      const LpBlock block = lp_near_extremal_block(n, sub_depth, u0, cell_moment, p);
      std::copy(block.leaves.begin(), block.leaves.end(), leaves.begin() + static_cast<std::ptrdiff_t>(cursor));
      cursor += width;
    }
  }

  // Filler set P at level u0, then the residual mass spread evenly, capped at u0.
  const std::size_t free_leaves = total - cursor;
  const double leaf = 1.0 / static_cast<double>(total);
  auto filled = static_cast<std::size_t>(std::floor(std::max(0.0, rest_measure) / leaf + 1e-9));
  filled = std::min(filled, free_leaves);
  std::fill_n(leaves.begin() + static_cast<std::ptrdiff_t>(cursor), filled, u0);
  cursor += filled;
  const double residual = rest_mass - static_cast<double>(filled) * u0 * leaf;
  if (residual > 0.0 && cursor < total) {
    const double level = std::min(u0, residual / (static_cast<double>(total - cursor) * leaf));
    std::fill(leaves.begin() + static_cast<std::ptrdiff_t>(cursor), leaves.end(), level);
  }

  StepFunction<double> phi(params, std::move(leaves));
  const double achieved = tree::top_measure_integral(tree::maximal(phi), kappa, p);
  auto report = make_report(phi, p, forms::dp_piecewise(F, f, kappa, n, p), achieved);
  return {std::move(phi), report};
}

VerifyReport verify_bounds(const StepFunction<double>& phi, double p, double q,
                           const std::vector<double>& kappa_grid, const std::vector<double>& L_grid,
                           double tol, double bound_scale) {
  require(q > p && p > 1.0, "verify_bounds requires q > p > 1");
  const int n = phi.params().branching();
  VerifyReport report;
  report.f = tree::integral(phi);
  report.F = tree::integral_power(phi, p);
  report.min_slack = std::numeric_limits<double>::infinity();
  if (!(report.f > 0.0)) {
    // phi == 0: every functional and every bound vanishes.
    report.min_slack = 0.0;
    return report;
  }
  const double f = report.f;
  // Guard against the last-ulp case F < f^p for near-constant phi.
  const double F = std::max(report.F, std::pow(f, p));

  const auto M = tree::maximal(phi);
  const auto cake = tree::distribution(M);

  auto record = [&](const char* what, double extra, double value, double bound) {
    bound *= bound_scale;
    const double slack = (value - bound) / std::max(1.0, std::abs(bound));
    report.min_slack = std::min(report.min_slack, slack);
    ++report.checks;
    if (slack < -tol) {
      std::ostringstream msg;
      msg << what << " (" << extra << "): value " << value << " < bound " << bound;
      report.violations.push_back(msg.str());
    }
  };

  for (double kappa : kappa_grid) {
    record("top-kappa", kappa, tree::top_measure_integral(cake, kappa, p),
           forms::dp_piecewise(F, f, kappa, n, p));
  }
  record("strong-q", q, tree::integral_power(M, q), forms::bpq_lower(F, f, n, p, q));
  for (double factor : L_grid) {
    require(factor >= 1.0, "L grid entries are multiples of f and must be >= 1");
    const double L = factor * f;
    double value = 0.0;
    for (const auto& atom : cake.atoms) value += atom.measure * std::pow(std::max(atom.value, L), q);
    record("max-with-L", L, value, forms::blq_lower(F, f, L, n, p, q));
  }
  record("weak", q, tree::weak_norm(cake, p, q), forms::weak_lower(F, f, n, p, q));
  return report;
}

}  // namespace bellman::extremal
