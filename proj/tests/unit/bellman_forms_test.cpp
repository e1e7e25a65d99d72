#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bellman/bellman_forms.hpp"
#include "test_support.hpp"

namespace bellman::forms {
namespace {

using Q = Rational;
using testing::random_real;

TEST(RatioConst, HandValues) {
  EXPECT_EQ(ratio_const(2, Q(2)), Q(3, 2));
  EXPECT_EQ(ratio_const(2, Q(3)), Q(7, 6));
  EXPECT_THROW(ratio_const(2, Q(1)), std::domain_error);
  EXPECT_THROW(ratio_const(1, 2.0), std::domain_error);
  for (double s : {1.01, 1.5, 2.0, 3.7}) EXPECT_GT(ratio_const(3, s), 1.0);
}

TEST(CNp, HandValuesAndRange) {
  EXPECT_EQ(c_np(2, Q(2)), Q(3, 4));
  EXPECT_EQ(c_np(3, Q(2)), Q(2, 3));
  for (int n = 2; n <= 6; ++n) {
    for (double p : {1.001, 1.3, 2.0, 3.5, 8.0}) {
      const double c = c_np(n, p);
      EXPECT_GT(c, 0.0);
      EXPECT_LT(c, 1.0);
    }
  }
}

TEST(LpLower, HandValues) {
  EXPECT_EQ(lp_lower(Q(1), Q(1), 2, Q(2)), Q(1));
  EXPECT_EQ(lp_lower(Q(2), Q(1), 2, Q(2)), Q(5, 2));
  EXPECT_EQ(lp_lower(Q(4), Q(1), 2, Q(2)), Q(11, 2));
  EXPECT_EQ(lp_lower(Q(2), Q(1), 2, Q(2)), bpq_chain_value(Q(1), 2, 1, Q(2), Q(2)));
  EXPECT_THROW(lp_lower(0.5, 1.0, 2, 2.0), std::domain_error);
}

TEST(GOfU, HandValues) {
  EXPECT_EQ(g_of_u(Q(3, 2), Q(2), Q(1), Q(1, 2), 2, Q(2)), Q(15, 8));
  EXPECT_EQ(g_of_u(Q(1), Q(2), Q(1), Q(1), 2, Q(2)), lp_lower(Q(2), Q(1), 2, Q(2)));
  EXPECT_EQ(g_of_u(Q(2), Q(2), Q(1), Q(1, 3), 2, Q(2)), Q(1, 3) * 4);
}

TEST(UStar, Branches) {
  EXPECT_EQ(u_star(Q(2), Q(1), Q(1), 2, Q(2)), Q(1));
  EXPECT_EQ(u_star(Q(2), Q(1), Q(1, 2), 2, Q(2)), Q(3, 2));
  EXPECT_EQ(u_star(Q(2), Q(1), Q(1, 4), 2, Q(2)), Q(2));
  EXPECT_THROW(u_star(Q(2), Q(1), Q(0), 2, Q(2)), std::domain_error);
  EXPECT_THROW(u_star(Q(1, 2), Q(1), Q(1, 2), 2, Q(2)), std::domain_error);
}

TEST(Dp, HandValues) {
  EXPECT_EQ(dp_piecewise(Q(2), Q(1), Q(1, 2), 2, Q(2)), Q(15, 8));
  EXPECT_EQ(dp_min_form(Q(2), Q(1), Q(1, 2), 2, Q(2)), Q(15, 8));
  EXPECT_EQ(dp_piecewise(Q(2), Q(1), Q(1, 4), 2, Q(2)), Q(1));
  EXPECT_EQ(dp_min_form(Q(2), Q(1), Q(1, 4), 2, Q(2)), Q(1));
  EXPECT_EQ(dp_piecewise(Q(2), Q(1), Q(1), 2, Q(2)), lp_lower(Q(2), Q(1), 2, Q(2)));
  EXPECT_EQ(dp_min_form(Q(2), Q(1), Q(1), 2, Q(2)), lp_lower(Q(2), Q(1), 2, Q(2)));
  for (const Q& kappa : {Q(1, 7), Q(1, 2), Q(9, 10)}) {
    EXPECT_EQ(dp_piecewise(Q(9, 4), Q(3, 2), kappa, 3, Q(2)), kappa * Q(9, 4));
    EXPECT_EQ(dp_min_form(Q(9, 4), Q(3, 2), kappa, 3, Q(2)), kappa * Q(9, 4));
  }
}

TEST(Dp, BoundaryIdentitiesExact) {
  // branch points at kappa = 3/4 and kappa = 3/8 for (F, f, N, p) = (2, 1, 2, 2)
  EXPECT_EQ(c_np(2, Q(2)), Q(3, 4));
  EXPECT_EQ(lower_branch_point(Q(2), Q(1), 2, Q(2)), Q(3, 8));
  for (const Q& kappa : {Q(3, 4), Q(3, 8)}) {
    EXPECT_EQ(dp_piecewise(Q(2), Q(1), kappa, 2, Q(2)), dp_min_form(Q(2), Q(1), kappa, 2, Q(2)));
  }
  // adjacent branch formulas agree at the boundaries
  EXPECT_EQ(dp_piecewise(Q(2), Q(1), Q(3, 4), 2, Q(2)), Q(3, 4) + Q(3, 2) * (Q(2) - 1));
  EXPECT_EQ(dp_piecewise(Q(2), Q(1), Q(3, 8), 2, Q(2)), Q(3, 8) * 4);
}

TEST(Dp, FormsAgreeAndMinimizeG) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + trial % 3;
    const double p = random_real(rng, 1.05, 4.0);
    const double f = std::exp(random_real(rng, -1.0, 1.0));
    const double F = std::pow(f, p) * random_real(rng, 1.0, 10.0);
    const double kappa = random_real(rng, 0.01, 1.0);
    const double a = dp_piecewise(F, f, kappa, n, p);
    const double b = dp_min_form(F, f, kappa, n, p);
    ASSERT_NEAR(a, b, 1e-9 * std::max(1.0, a)) << "N=" << n << " p=" << p << " F=" << F << " f=" << f
                                                << " kappa=" << kappa;
    const double hi = admissible_u_max(F, f, kappa, p);
    double best = g_of_u(f, F, f, kappa, n, p);
    for (int i = 0; i <= 400; ++i) best = std::min(best, g_of_u(f + (hi - f) * i / 400.0, F, f, kappa, n, p));
    EXPECT_LE(b, best * (1.0 + 1e-12));
    EXPECT_GE(a, kappa * std::pow(f, p) * (1.0 - 1e-12));
  }
}

TEST(Dp, MonotoneAndHomogeneous) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 3;
    const double p = random_real(rng, 1.1, 4.0);
    const double f = std::exp(random_real(rng, -1.0, 1.0));
    const double F = std::pow(f, p) * random_real(rng, 1.0, 6.0);
    const double kappa = random_real(rng, 0.02, 0.98);
    const double t = std::exp(random_real(rng, -1.5, 1.5));
    const double base = dp_piecewise(F, f, kappa, n, p);
    EXPECT_LE(base, dp_piecewise(F, f, kappa + 0.01, n, p) * (1.0 + 1e-12));
    EXPECT_LE(base, dp_piecewise(F * 1.05, f, kappa, n, p) * (1.0 + 1e-12));
    EXPECT_NEAR(dp_piecewise(std::pow(t, p) * F, t * f, kappa, n, p), std::pow(t, p) * base, 1e-10 * std::pow(t, p) * base);
    const double q = p + random_real(rng, 0.2, 3.0);
    const double bq = bpq_lower(F, f, n, p, q);
    EXPECT_LE(bq, bpq_lower(F * 1.05, f, n, p, q) * (1.0 + 1e-12));
    EXPECT_NEAR(bpq_lower(std::pow(t, p) * F, t * f, n, p, q), std::pow(t, q) * bq, 1e-10 * std::pow(t, q) * bq);
    const double w = weak_lower(F, f, n, p, q);
    EXPECT_NEAR(weak_lower(std::pow(t, p) * F, t * f, n, p, q), t * w, 1e-10 * t * w);
  }
}

TEST(Dp, ContinuousAcrossBranchPoints) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    const double p = random_real(rng, 1.2, 4.0);
    const double F = random_real(rng, 1.2, 8.0);
    for (double point : {c_np(n, p), lower_branch_point(F, 1.0, n, p)}) {
      const double h = 1e-9 * point;
      const double left = dp_piecewise(F, 1.0, point - h, n, p);
      const double right = dp_piecewise(F, 1.0, point + h, n, p);
      EXPECT_NEAR(left, right, 1e-7 * std::max(1.0, left));
    }
  }
}

TEST(Dp, FloorEqualityOnlyAtConstant) {
  EXPECT_DOUBLE_EQ(dp_piecewise(1.0, 1.0, 0.3, 2, 2.0), 0.3);
  EXPECT_GT(dp_piecewise(1.0001, 1.0, 0.3, 2, 2.0), 0.3);
}

TEST(Kappa0, HandValues) {
  EXPECT_EQ(kappa0(Q(4), Q(1), 2, Q(2), Q(4)), std::optional<Q>(Q(9, 32)));
  EXPECT_FALSE(kappa0(Q(1), Q(1), 2, Q(2), Q(4)).has_value());
  EXPECT_FALSE(kappa0(Q(3, 2), Q(1), 2, Q(2), Q(4)).has_value());  // ratio exactly 1
  EXPECT_THROW(kappa0(Q(4), Q(1), 2, Q(2), Q(2)), std::domain_error);
}

double grid_sup(double F, double f, int n, double p, double q, int points) {
  double best = 0.0;
  for (int i = 1; i <= points; ++i) {
    const double kappa = static_cast<double>(i) / points;
    best = std::max(best, std::pow(std::pow(kappa, -1.0 + p / q) * dp_piecewise(F, f, kappa, n, p), 1.0 / p));
  }
  if (auto k0 = kappa0(F, f, n, p, q)) {
    best = std::max(best, std::pow(std::pow(*k0, -1.0 + p / q) * dp_piecewise(F, f, *k0, n, p), 1.0 / p));
  }
  return best;
}

TEST(WeakLower, HandValuesAndGridOracle) {
  // constant function: case (ii), floor at f
  EXPECT_GE(weak_lower(1.0, 1.0, 2, 2.0, 4.0), 1.0 - 1e-15);
  EXPECT_NEAR(weak_lower(1.0, 1.0, 2, 2.0, 4.0), grid_sup(1.0, 1.0, 2, 2.0, 4.0, 20000), 1e-6);
  // case (i)
  EXPECT_NEAR(weak_lower(4.0, 1.0, 2, 2.0, 4.0), grid_sup(4.0, 1.0, 2, 2.0, 4.0, 20000), 1e-6);
  EXPECT_GT(weak_lower(4.0, 1.0, 2, 2.0, 4.0), std::sqrt(lp_lower(4.0, 1.0, 2, 2.0)));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const double p = random_real(rng, 1.3, 3.5);
    const double q = p + random_real(rng, 0.3, 3.0);
    const double F = random_real(rng, 1.0, 12.0);
    EXPECT_NEAR(weak_lower(F, 1.0, n, p, q), grid_sup(F, 1.0, n, p, q, 20000), 1e-6);
  }
  EXPECT_THROW(weak_lower(2.0, 1.0, 2, 2.0, 2.0), std::domain_error);
}

TEST(Bpq, HandValues) {
  EXPECT_EQ(bpq_lower(Q(1), Q(1), 2, Q(2), Q(3)), Q(1));
  EXPECT_EQ(bpq_lower(Q(2), Q(1), 2, Q(2), Q(2)), Q(5, 2));
  EXPECT_EQ(bpq_lower(Q(2), Q(1), 2, Q(2), Q(3)), Q(9, 2));
  EXPECT_EQ(bpq_chain_value(Q(1), 2, 0, Q(2), Q(3)), Q(1));
  EXPECT_EQ(bpq_chain_value(Q(1), 2, 1, Q(2), Q(2)), Q(5, 2));
  EXPECT_EQ(bpq_chain_value(Q(1), 2, 1, Q(2), Q(3)), Q(9, 2));
  EXPECT_THROW(bpq_lower(Q(2), Q(1), 2, Q(3), Q(2)), std::domain_error);
}

TEST(Bpq, ChainIdentityExact) {
  for (int n : {2, 3, 5}) {
    for (int m = 0; m <= 5; ++m) {
      for (const Q& f : {Q(1), Q(3, 2), Q(2, 7)}) {
        for (int q : {2, 3, 4, 6}) {
          const Q p(2);
          const Q F = power(Q(n), static_cast<long long>(m)) * f * f;
          EXPECT_EQ(bpq_lower(F, f, n, p, Q(q)), bpq_chain_value(f, n, m, p, Q(q)));
        }
      }
    }
  }
}

TEST(Blq, HandValues) {
  EXPECT_EQ(blq_lower(Q(2), Q(1), Q(3, 2), 2, Q(2), Q(3)), Q(65, 12));
  EXPECT_EQ(blq_lower(Q(2), Q(1), Q(1), 2, Q(2), Q(3)), bpq_lower(Q(2), Q(1), 2, Q(2), Q(3)));
  EXPECT_EQ(blq_lower(Q(2), Q(1), Q(5), 2, Q(2), Q(3)), Q(125));
  EXPECT_THROW(blq_lower(Q(2), Q(1), Q(1, 2), 2, Q(2), Q(3)), std::domain_error);
}

TEST(BqLessP, Values) {
  EXPECT_DOUBLE_EQ(bq_less_p(1.0, 1.5), 1.0);
  EXPECT_DOUBLE_EQ(bq_less_p(2.0, 1.5), std::pow(2.0, 1.5));
  EXPECT_THROW(bq_less_p(1.0, 0.5), std::domain_error);
}

TEST(HConvex, RootsAndSign) {
  for (int n : {2, 3, 4}) {
    EXPECT_EQ(h_convex_test(Q(1), n, Q(2)), 0);
    EXPECT_EQ(h_convex_test(Q(n), n, Q(3)), 0);
    EXPECT_LT(h_convex_test((1.0 + n) / 2.0, n, 2.5), 0.0);
    for (int i = 0; i <= 50; ++i) EXPECT_LE(h_convex_test(1.0 + (n - 1.0) * i / 50.0, n, 1.7), 1e-12);
  }
}

TEST(RationalMode, RejectsNonIntegerExponent) {
  EXPECT_THROW(lp_lower(Q(2), Q(1), 2, Q(3, 2)), std::domain_error);
}

TEST(BellmanQuery, Validation) {
  BellmanQuery ok{2, 2.0, 3.0, 2.0, 1.0, 0.5, 1.5};
  EXPECT_NO_THROW(ok.validate());
  BellmanQuery bad_n = ok;
  bad_n.N = 1;
  EXPECT_THROW(bad_n.validate(), std::domain_error);
  BellmanQuery bad_moments = ok;
  bad_moments.F = 0.5;
  EXPECT_THROW(bad_moments.validate(), std::domain_error);
  BellmanQuery bad_kappa = ok;
  bad_kappa.kappa = 1.5;
  EXPECT_THROW(bad_kappa.validate(), std::domain_error);
}

}  // namespace
}  // namespace bellman::forms
