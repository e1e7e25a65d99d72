#pragma once

// Closed-form evaluators for the Bellman-type functions of the localized
// maximal operator on an N-homogeneous tree, given the moments
//   f = int phi,   F = int phi^p,   f^p <= F.
//
// Every template works in both scalar modes.  Rational mode needs integer
// exponents wherever a power is taken (in practice p = 2 and integer q).

#include <optional>

#include "bellman/scalar.hpp"

namespace bellman::forms {

namespace detail {

inline void check_branching(int n) { require(n >= 2, "branching factor N must be an integer >= 2"); }

template <Scalar T>
void check_moments(const T& F, const T& f, const T& p) {
  require(p > 1, "p must exceed 1");
  require(f > 0 && F > 0, "moments f and F must be positive");
  require(tolerant_le(power(f, p), F), "moments must satisfy f^p <= F");
}

template <Scalar T>
void check_kappa(const T& kappa) {
  require(kappa > 0 && tolerant_le(kappa, T(1)), "kappa must lie in (0, 1]");
}

template <Scalar T>
T N_to(int n, const T& s) {
  return power(T(n), s);
}

/// F^r / f^(r-1) with r = (q-1)/(p-1); the effective q-moment of the bound.
template <Scalar T>
T moment_q_term(const T& F, const T& f, const T& p, const T& q) {
  const T r = (q - 1) / (p - 1);
  return power(F, r) / power(f, r - 1);
}

}  // namespace detail

/// (N^s - 1) / (N^s - N); strictly greater than 1 for s > 1.
template <Scalar T>
T ratio_const(int n, const T& s) {
  detail::check_branching(n);
  require(s > 1, "ratio_const requires s > 1");
  const T ns = detail::N_to(n, s);
  return (ns - 1) / (ns - T(n));
}

/// c(N,p) = (p-1)/p * ratio_const(N,p), always in (0,1).
template <Scalar T>
T c_np(int n, const T& p) {
  return (p - 1) / p * ratio_const(n, p);
}

/// Sharp lower bound for int (M phi)^p.
template <Scalar T>
T lp_lower(const T& F, const T& f, int n, const T& p) {
  detail::check_moments(F, f, p);
  const T fp = power(f, p);
  return fp + ratio_const(n, p) * (F - fp);
}

template <Scalar T>
T g_of_u(const T& u, const T& F, const T& f, const T& kappa, int n, const T& p) {
  require(u > 0, "g_of_u requires u > 0");
  return kappa * power(u, p) + ratio_const(n, p) * (F - power(u, p - 1) * f);
}

/// Right end of the admissible threshold interval: min((F/f)^(1/(p-1)), f/kappa).
template <Scalar T>
T admissible_u_max(const T& F, const T& f, const T& kappa, const T& p) {
  const T moment_cap = power(F / f, 1 / (p - 1));
  return max_of(f, min_of(moment_cap, f / kappa));
}

/// Lower edge of the middle branch: c(N,p) (f^p/F)^(1/(p-1)).
template <Scalar T>
T lower_branch_point(const T& F, const T& f, int n, const T& p) {
  return c_np(n, p) * power(power(f, p) / F, 1 / (p - 1));
}

/// Minimizer of g over the admissible interval, by the branch rule.  A kappa
/// sitting exactly on a branch point takes the middle branch.
template <Scalar T>
T u_star(const T& F, const T& f, const T& kappa, int n, const T& p) {
  detail::check_moments(F, f, p);
  detail::check_kappa(kappa);
  const T c = c_np(n, p);
  if (kappa > c) return f;
  if (!(kappa < lower_branch_point(F, f, n, p))) return c * f / kappa;
  return power(F / f, 1 / (p - 1));
}

/// D_p as the minimum of g over the admissible interval.  Evaluated on the
/// candidate set {endpoints, interior stationary point}; g(t^(1/(p-1))) is
/// convex in t so one of them is the minimizer.
template <Scalar T>
T dp_min_form(const T& F, const T& f, const T& kappa, int n, const T& p) {
  detail::check_moments(F, f, p);
  detail::check_kappa(kappa);
  const T lo = f;
  const T hi = admissible_u_max(F, f, kappa, p);
  T best = min_of(g_of_u(lo, F, f, kappa, n, p), g_of_u(hi, F, f, kappa, n, p));
  const T stationary = c_np(n, p) * f / kappa;
  if (lo < stationary && stationary < hi) best = min_of(best, g_of_u(stationary, F, f, kappa, n, p));
  return best;
}

/// D_p by its three-branch closed form.
template <Scalar T>
T dp_piecewise(const T& F, const T& f, const T& kappa, int n, const T& p) {
  detail::check_moments(F, f, p);
  detail::check_kappa(kappa);
  const T c = c_np(n, p);
  const T ratio = ratio_const(n, p);
  const T fp = power(f, p);
  if (kappa > c) return kappa * fp + ratio * (F - fp);
  if (!(kappa < lower_branch_point(F, f, n, p))) {
    return ratio * (F - power(c, p - 1) * fp / (p * power(kappa, p - 1)));
  }
  return kappa * power(F / f, p / (p - 1));
}

/// Interior maximizer of kappa^(-1+p/q) D_p(kappa), present only when
/// (q-1)/(q-p) f^p/F < 1.
template <Scalar T>
std::optional<T> kappa0(const T& F, const T& f, int n, const T& p, const T& q) {
  detail::check_moments(F, f, p);
  require(q > p, "kappa0 requires q > p");
  const T rho = (q - 1) / (q - p) * power(f, p) / F;
  if (!(rho < 1)) return std::nullopt;
  return power(rho, 1 / (p - 1)) * c_np(n, p);
}

/// Lower bound for the weak-L^q norm of M phi (q > p).
double weak_lower(double F, double f, int n, double p, double q);

/// Lower bound for int (M phi)^q, q >= p.  q == p reproduces lp_lower.
template <Scalar T>
T bpq_lower(const T& F, const T& f, int n, const T& p, const T& q) {
  detail::check_moments(F, f, p);
  require(!(q < p), "bpq_lower requires q >= p");
  const T fq = power(f, q);
  return fq + ratio_const(n, q) * (detail::moment_q_term(F, f, p, q) - fq);
}

/// Value of the q-functional on the chain extremizer with F = N^(m(p-1)) f^p.
template <Scalar T>
T bpq_chain_value(const T& f, int n, int m, const T& p, const T& q) {
  detail::check_branching(n);
  require(m >= 0, "chain depth must be nonnegative");
  require(p > 1 && !(q < p), "bpq_chain_value requires q >= p > 1");
  require(f > 0, "f must be positive");
  return power(f, q) * (1 + ratio_const(n, q) * (power(T(n), T(m) * (q - 1)) - 1));
}

/// Lower bound for int max(M phi, L)^q.
template <Scalar T>
T blq_lower(const T& F, const T& f, const T& L, int n, const T& p, const T& q) {
  detail::check_moments(F, f, p);
  require(q > p, "blq_lower requires q > p");
  require(tolerant_le(f, L), "blq_lower requires f <= L");
  return power(L, q) +
         ratio_const(n, q) * positive_part(detail::moment_q_term(F, f, p, q) - power(L, q - 1) * f);
}

/// Infimum of int (M phi)^q for q < p: the constant-function value f^q.
template <Scalar T>
T bq_less_p(const T& f, const T& q) {
  require(f > 0, "f must be positive");
  require(!(q < 1), "bq_less_p requires q >= 1");
  return power(f, q);
}

/// h(t) = 1 - ratio_const(N,s) t + (N-1)/(N^s-N) t^s; vanishes at 1 and N.
template <Scalar T>
T h_convex_test(const T& t, int n, const T& s) {
  require(t > 0, "h_convex_test requires t > 0");
  const T ns = detail::N_to(n, s);
  return 1 - ratio_const(n, s) * t + T(n - 1) / (ns - T(n)) * power(t, s);
}

/// Double-valued query record used by the oracle and the CLI.
struct BellmanQuery {
  int N = 2;
  double p = 2.0;
  double q = 2.0;
  double F = 1.0;
  double f = 1.0;
  std::optional<double> kappa;
  std::optional<double> L;

  /// Throws std::domain_error on violated invariants.
  void validate() const;
};

}  // namespace bellman::forms
