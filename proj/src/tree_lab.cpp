#include "bellman/tree_lab.hpp"

#include <cmath>

namespace bellman::tree {

TreeParams::TreeParams(int branching, int depth) : branching_(branching), depth_(depth) {
  require(branching >= 2, "branching factor N must be at least 2");
  require(depth >= 0, "depth must be nonnegative");
  std::size_t leaves = 1;
  for (int s = 0; s < depth; ++s) {
    leaves *= static_cast<std::size_t>(branching);
    require(leaves <= kMaxLeaves, "tree too large: N^depth exceeds the supported leaf count");
  }
}

std::size_t TreeParams::cells_at(int level) const {
  require(level >= 0 && level <= depth_, "level out of range");
  std::size_t count = 1;
  for (int s = 0; s < level; ++s) count *= static_cast<std::size_t>(branching_);
  return count;
}

CellIndex CellIndex::child(int digit) const {
  CellIndex out = *this;
  out.digits.push_back(digit);
  return out;
}

std::string CellIndex::to_string() const {
  if (digits.empty()) return "root";
  std::string s;
  for (int d : digits) {
    if (!s.empty()) s += '.';
    s += std::to_string(d);
  }
  return s;
}

LeafRange leaf_range(const TreeParams& params, const CellIndex& cell) {
  require(cell.level() <= params.depth(), "cell path longer than tree depth");
  std::size_t position = 0;
  for (int d : cell.digits) {
    require(d >= 0 && d < params.branching(), "cell digit out of range");
    position = position * static_cast<std::size_t>(params.branching()) + static_cast<std::size_t>(d);
  }
  const std::size_t width = params.leaves_per_cell(cell.level());
  return {position * width, (position + 1) * width};
}

CellIndex cell_at(const TreeParams& params, int level, std::size_t position) {
  require(position < params.cells_at(level), "cell position out of range");
  CellIndex cell;
  cell.digits.assign(static_cast<std::size_t>(level), 0);
  const auto n = static_cast<std::size_t>(params.branching());
  for (int s = level - 1; s >= 0; --s) {
    cell.digits[static_cast<std::size_t>(s)] = static_cast<int>(position % n);
    position /= n;
  }
  return cell;
}

double weak_norm(const LayerCake<double>& cake, double p, double q) {
  require(p > 1.0, "weak norm requires p > 1");
  require(q > p, "weak norm requires q > p");
  const double theta = 1.0 / p - 1.0 / q;
  auto objective = [&](double kappa, double mass) {
    return std::pow(kappa, -theta) * std::pow(mass, 1.0 / p);
  };

  double best = 0.0;
  double left = 0.0;  // cumulative measure before the current atom
  double mass = 0.0;  // integral of psi^p over the top `left` measure
  for (const auto& atom : cake.atoms) {
    const double slope = std::pow(atom.value, p);
    const double right = std::min(1.0, left + atom.measure);
    // On [left, right] the mass is intercept + slope * kappa.
    const double intercept = mass - left * slope;
    if (intercept > 0.0 && slope > 0.0) {
      const double interior = (q - p) * intercept / (p * slope);
      if (interior > left && interior < right) {
        best = std::max(best, objective(interior, intercept + slope * interior));
      }
    }
    mass += (right - left) * slope;
    left = right;
    if (left > 0.0) best = std::max(best, objective(left, mass));
  }
  return best;
}

double weak_norm(const StepFunction<double>& psi, double p, double q) {
  return weak_norm(distribution(psi), p, q);
}

}  // namespace bellman::tree
