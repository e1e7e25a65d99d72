#include "bellman/bellman_forms.hpp"

#include <algorithm>
#include <cmath>

namespace bellman::forms {

double weak_lower(double F, double f, int n, double p, double q) {
  detail::check_moments(F, f, p);
  require(q > p, "weak_lower requires q > p");
  const double c = c_np(n, p);
  const double global = std::pow(lp_lower(F, f, n, p), 1.0 / p);
  const double rho = (q - 1.0) / (q - p) * std::pow(f, p) / F;

  double interior = 0.0;
  if (rho < 1.0) {
    // kappa^(-1+p/q) D_p(kappa) evaluated at its interior maximizer kappa0,
    // where D_p(kappa0) = c F q/(q-1).
    const double moment = std::pow(F, (q - 1.0) / (p - 1.0)) / std::pow(f, (q - p) / (p - 1.0));
    interior = std::pow(c, 1.0 / q) * std::pow(q / (q - 1.0), 1.0 / p) *
               std::pow((q - p) / (q - 1.0), (q - p) / (p * q * (p - 1.0))) *
               std::pow(moment, 1.0 / q);
  } else {
    // Maximizer pinned at kappa = c(N,p).
    interior = std::pow(c, 1.0 / q) * std::pow(p / (p - 1.0), 1.0 / p) *
               std::pow(F - std::pow(f, p) / p, 1.0 / p);
  }
  return std::max(interior, global);
}

void BellmanQuery::validate() const {
  detail::check_branching(N);
  detail::check_moments(F, f, p);
  if (kappa) detail::check_kappa(*kappa);
  if (L) require(tolerant_le(f, *L), "L must be at least f");
}

}  // namespace bellman::forms
