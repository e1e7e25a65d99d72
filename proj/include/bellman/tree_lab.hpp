#pragma once

// Finite-depth model of an N-homogeneous tree-like family on a probability
// space.  Cells at level s have measure N^-s; functions are constant on the
// N^m leaf cells of a depth-m tree and are stored leaf by leaf in
// lexicographic order of their digit paths.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellman/scalar.hpp"

namespace bellman::tree {

class TreeParams {
 public:
  /// Largest supported leaf count; keeps index arithmetic in range.
  static constexpr std::size_t kMaxLeaves = std::size_t{1} << 26;

  TreeParams(int branching, int depth);

  int branching() const { return branching_; }
  int depth() const { return depth_; }
  std::size_t leaf_count() const { return cells_at(depth_); }
  /// Number of cells at `level`, i.e. N^level.
  std::size_t cells_at(int level) const;
  /// Number of leaves below one cell at `level`, i.e. N^(depth-level).
  std::size_t leaves_per_cell(int level) const { return cells_at(depth_ - level); }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;

 private:
  int branching_;
  int depth_;
};

/// A cell addressed by its digit path from the root; the empty path is X.
struct CellIndex {
  std::vector<int> digits;

  int level() const { return static_cast<int>(digits.size()); }
  CellIndex child(int digit) const;
  std::string to_string() const;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Half-open range of leaf positions covered by a cell.
struct LeafRange {
  std::size_t begin;
  std::size_t end;
  std::size_t size() const { return end - begin; }
};

/// Throws std::domain_error if the path is too long or has a digit outside [0, N).
LeafRange leaf_range(const TreeParams& params, const CellIndex& cell);

/// Cell at `level` with linear position `position` among the N^level cells.
CellIndex cell_at(const TreeParams& params, int level, std::size_t position);

template <Scalar T>
T cell_measure(const TreeParams& params, int level) {
  return T(1) / T(static_cast<long long>(params.cells_at(level)));
}

template <Scalar T>
class StepFunction {
 public:
  StepFunction(TreeParams params, std::vector<T> leaves)
      : params_(params), leaves_(std::move(leaves)) {
    require(leaves_.size() == params_.leaf_count(),
            "leaf vector length " + std::to_string(leaves_.size()) + " does not match N^depth = " +
                std::to_string(params_.leaf_count()));
    for (const T& v : leaves_) {
      require(is_finite_value(v) && !(v < 0), "step function values must be finite and nonnegative");
    }
  }

  static StepFunction constant(TreeParams params, const T& value) {
    return StepFunction(params, std::vector<T>(params.leaf_count(), value));
  }

  const TreeParams& params() const { return params_; }
  std::span<const T> leaves() const { return leaves_; }
  const std::vector<T>& leaf_vector() const { return leaves_; }
  std::size_t size() const { return leaves_.size(); }
  const T& operator[](std::size_t i) const { return leaves_[i]; }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  TreeParams params_;
  std::vector<T> leaves_;
};

template <Scalar T>
struct Atom {
  T value;
  T measure;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Distribution of a step function: distinct values, strictly descending,
/// with the measure of each level set.
template <Scalar T>
struct LayerCake {
  std::vector<Atom<T>> atoms;

  T total_measure() const {
    T total(0);
    for (const auto& a : atoms) total += a.measure;
    return total;
  }
  friend bool operator==(const LayerCake&, const LayerCake&) = default;
};

template <Scalar T>
struct StoppingCell {
  CellIndex index;
  T lambda;  // measure of the cell
  T beta;    // average of phi over the cell
  T alpha;   // integral of phi^p over the cell
};

/// Maximal cells on which the average of phi exceeds a threshold u,
/// together with their aggregate moments.
template <Scalar T>
struct MaximalDecomposition {
  T threshold;
  T p;
  std::vector<StoppingCell<T>> cells;
  T kappa1;  // sum of lambda
  T A;       // sum of alpha
  T B;       // sum of lambda * beta
};

namespace detail {

template <Scalar T>
T range_sum(std::span<const T> values, LeafRange range) {
  T sum(0);
  for (std::size_t i = range.begin; i < range.end; ++i) sum += values[i];
  return sum;
}

}  // namespace detail

/// Integral of phi, i.e. the average over the root.
template <Scalar T>
T integral(const StepFunction<T>& phi) {
  return detail::range_sum(phi.leaves(), LeafRange{0, phi.size()}) /
         T(static_cast<long long>(phi.size()));
}

template <Scalar T>
T cell_average(const StepFunction<T>& phi, const CellIndex& cell) {
  const LeafRange range = leaf_range(phi.params(), cell);
  return detail::range_sum(phi.leaves(), range) / T(static_cast<long long>(range.size()));
}

/// Level-k conditional expectation, re-expressed at full depth.
template <Scalar T>
StepFunction<T> condexp(const StepFunction<T>& phi, int level) {
  const TreeParams& params = phi.params();
  require(level >= 0 && level <= params.depth(), "conditional expectation level out of range");
  const std::size_t block = params.leaves_per_cell(level);
  std::vector<T> out(phi.size());
  for (std::size_t start = 0; start < phi.size(); start += block) {
    const T avg = detail::range_sum(phi.leaves(), LeafRange{start, start + block}) /
                  T(static_cast<long long>(block));
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(start),
              out.begin() + static_cast<std::ptrdiff_t>(start + block), avg);
  }
  return StepFunction<T>(params, std::move(out));
}

/// Per-level cell sums, index [level][position].  Level depth holds the leaves.
template <Scalar T>
std::vector<std::vector<T>> level_sums(const StepFunction<T>& phi) {
  const TreeParams& params = phi.params();
  const int m = params.depth();
  const auto n = static_cast<std::size_t>(params.branching());
  std::vector<std::vector<T>> sums(static_cast<std::size_t>(m) + 1);
  sums[m] = phi.leaf_vector();
  for (int s = m - 1; s >= 0; --s) {
    const auto& below = sums[s + 1];
    auto& here = sums[s];
    here.assign(params.cells_at(s), T(0));
    for (std::size_t c = 0; c < here.size(); ++c) {
      T acc(0);
      for (std::size_t d = 0; d < n; ++d) acc += below[c * n + d];
      here[c] = acc;
    }
  }
  return sums;
}

/// Dyadic-type maximal function: on each leaf, the largest average over all
/// cells containing it.
template <Scalar T>
StepFunction<T> maximal(const StepFunction<T>& phi) {
  const TreeParams& params = phi.params();
  const int m = params.depth();
  const auto n = static_cast<std::size_t>(params.branching());
  const auto sums = level_sums(phi);
  std::vector<T> running{sums[0][0] / T(static_cast<long long>(params.leaf_count()))};
  for (int s = 1; s <= m; ++s) {
    const T count(static_cast<long long>(params.leaves_per_cell(s)));
    std::vector<T> next(params.cells_at(s));
    for (std::size_t c = 0; c < next.size(); ++c) {
      next[c] = max_of(running[c / n], sums[s][c] / count);
    }
    running = std::move(next);
  }
  return StepFunction<T>(params, std::move(running));
}

/// N^-m * sum of leaf^s.
template <Scalar T>
T integral_power(const StepFunction<T>& phi, const T& s) {
  require(s > 0, "integral_power exponent must be positive");
  T acc(0);
  for (const T& v : phi.leaves()) acc += power(v, s);
  return acc / T(static_cast<long long>(phi.size()));
}

template <Scalar T>
LayerCake<T> distribution(const StepFunction<T>& psi) {
  std::vector<T> sorted = psi.leaf_vector();
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const T total(static_cast<long long>(sorted.size()));
  LayerCake<T> cake;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    cake.atoms.push_back({sorted[i], T(static_cast<long long>(j - i)) / total});
    i = j;
  }
  return cake;
}

/// sup over sets E of measure kappa of the integral of psi^s over E,
/// taking whole atoms from the top and a fraction of the threshold atom.
template <Scalar T>
T top_measure_integral(const LayerCake<T>& cake, const T& kappa, const T& s) {
  require(kappa > 0 && tolerant_le(kappa, T(1)), "kappa must lie in (0, 1]");
  T acc(0);
  T used(0);
  for (const auto& atom : cake.atoms) {
    const T room = kappa - used;
    if (!(room > 0)) break;
    const T take = min_of(room, atom.measure);
    acc += take * power(atom.value, s);
    used += take;
  }
  return acc;
}

template <Scalar T>
T top_measure_integral(const StepFunction<T>& psi, const T& kappa, const T& s) {
  return top_measure_integral(distribution(psi), kappa, s);
}

/// Attained value u of the cake with mu{> u} <= kappa <= mu{>= u}.  When kappa
/// sits exactly on a breakpoint the larger of the two candidates is returned.
template <Scalar T>
T select_threshold(const LayerCake<T>& cake, const T& kappa) {
  require(kappa > 0 && tolerant_le(kappa, T(1)), "kappa must lie in (0, 1]");
  require(!cake.atoms.empty(), "empty distribution");
  T above(0);
  for (const auto& atom : cake.atoms) {
    const T at_least = above + atom.measure;
    if (tolerant_le(kappa, at_least)) return atom.value;
    above = at_least;
  }
  return cake.atoms.back().value;
}

/// Threshold for phi: the kappa-quantile of its maximal function.
template <Scalar T>
T select_threshold(const StepFunction<T>& phi, const T& kappa) {
  return select_threshold(distribution(maximal(phi)), kappa);
}

/// Maximal cells with average > u, found shallowest-first in digit order.
template <Scalar T>
MaximalDecomposition<T> stopping_decomposition(const StepFunction<T>& phi, const T& u, const T& p) {
  require(tolerant_le(integral(phi), u), "threshold must be at least the integral of phi");
  const TreeParams& params = phi.params();
  MaximalDecomposition<T> out{u, p, {}, T(0), T(0), T(0)};

  std::function<void(const CellIndex&)> visit = [&](const CellIndex& cell) {
    const LeafRange range = leaf_range(params, cell);
    const T count(static_cast<long long>(range.size()));
    const T avg = detail::range_sum(phi.leaves(), range) / count;
    if (avg > u) {
      T alpha(0);
      for (std::size_t i = range.begin; i < range.end; ++i) alpha += power(phi[i], p);
      alpha /= T(static_cast<long long>(params.leaf_count()));
      const T lambda = cell_measure<T>(params, cell.level());
      out.cells.push_back({cell, lambda, avg, alpha});
      out.kappa1 += lambda;
      out.A += alpha;
      out.B += lambda * avg;
      return;
    }
    if (cell.level() == params.depth()) return;
    for (int d = 0; d < params.branching(); ++d) visit(cell.child(d));
  };

  if (params.depth() > 0) {
    const CellIndex root{};
    for (int d = 0; d < params.branching(); ++d) visit(root.child(d));
  }
  return out;
}

/// Equivalent weak-L^q norm sup_E mu(E)^(-1/p+1/q) (int_E psi^p)^(1/p).
/// Exact for step functions: the supremum is taken over every breakpoint of
/// the distribution and the interior optimum of each linear piece.
double weak_norm(const LayerCake<double>& cake, double p, double q);
double weak_norm(const StepFunction<double>& psi, double p, double q);

}  // namespace bellman::tree
