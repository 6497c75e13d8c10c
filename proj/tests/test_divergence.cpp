// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace betanmf;
using Catch::Approx;

namespace {
const double kBetas[] = {-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
}

TEST_CASE("gamma exponent and regime classification", "[divergence]") {
  CHECK(BetaParams(0.5).gamma == Approx(2.0 / 3.0));
  CHECK(BetaParams(-1.0).gamma == Approx(1.0 / 3.0));
  CHECK(BetaParams(0.0).gamma == Approx(0.5));
  CHECK(BetaParams(1.0).gamma == 1.0);
  CHECK(BetaParams(1.5).gamma == 1.0);
  CHECK(BetaParams(2.0).gamma == 1.0);
  CHECK(BetaParams(3.0).gamma == Approx(0.5));

  CHECK(BetaParams(-0.5).regime == BetaRegime::BelowZero);
  CHECK(BetaParams(0.0).regime == BetaRegime::ZeroToOne);
  CHECK(BetaParams(0.99).regime == BetaRegime::ZeroToOne);
  CHECK(BetaParams(1.0).regime == BetaRegime::OneToTwo);
  CHECK(BetaParams(2.0).regime == BetaRegime::OneToTwo);
  CHECK(BetaParams(2.01).regime == BetaRegime::AboveTwo);

  // gamma(beta) <= 1 everywhere
  SeededRng rng(11);
  for (int i = 0; i < 200; ++i) CHECK(BetaParams(rng.uniform(-5.0, 8.0)).gamma <= 1.0);

  CHECK_THROWS_AS(BetaParams(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST_CASE("divergence point values", "[divergence]") {
  for (double b : kBetas) CHECK(beta_divergence(1.0, 1.0, BetaParams(b)) == Approx(0.0).margin(0));

  CHECK(beta_divergence(1.0, 2.0, BetaParams(2.0)) == Approx(0.5));                    // (x-y)^2/2
  CHECK(beta_divergence(1.0, 2.0, BetaParams(1.0)) == Approx(2.0 - 1.0 - std::log(2.0)));
  CHECK(beta_divergence(2.0, 1.0, BetaParams(0.0)) == Approx(2.0 - std::log(2.0) - 1.0));
}

TEST_CASE("divergence domain errors", "[divergence]") {
  CHECK_THROWS_AS(beta_divergence(1.0, 0.0, BetaParams(1.0)), std::domain_error);
  CHECK_THROWS_AS(beta_divergence(1.0, -1.0, BetaParams(2.0)), std::domain_error);
  CHECK_THROWS_AS(beta_divergence(-0.5, 1.0, BetaParams(2.0)), std::domain_error);
  CHECK_THROWS_AS(beta_divergence(0.0, 1.0, BetaParams(0.0)), std::domain_error);
  CHECK_THROWS_AS(beta_divergence(0.0, 1.0, BetaParams(-1.0)), std::domain_error);
  // x = 0 is fine for beta > 0
  CHECK(beta_divergence(0.0, 2.0, BetaParams(1.0)) == Approx(2.0));
  CHECK(beta_divergence(0.0, 2.0, BetaParams(0.5)) == Approx(std::pow(2.0, 0.5) / 0.5));
}

TEST_CASE("nonnegativity with unique minimum at x == y", "[divergence]") {
  SeededRng rng(101);
  for (double b : kBetas) {
    const BetaParams p(b);
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(0.01, 100.0);
      const double y = rng.uniform(0.01, 100.0);
      const double d = beta_divergence(x, y, p);
      CHECK(d >= 0.0);
      if (d == 0.0) CHECK(std::abs(x - y) < 1e-12);
      if (std::abs(x - y) < 1e-12) CHECK(d < 1e-12);
    }
  }
}

TEST_CASE("continuity in beta at the IS and KL limits", "[divergence]") {
  SeededRng rng(7);
  for (int i = 0; i < 50; ++i) {
    // ratio-separated pairs: near the limits the generic formula divides by
    // beta(beta-1) ~ 1e-6, so near-equal pairs would measure cancellation
    const double x = rng.uniform(0.1, 10.0);
    const double y = x * (rng.uniform() < 0.5 ? rng.uniform(1.25, 4.0) : rng.uniform(0.25, 0.8));
    const double d0 = beta_divergence(x, y, BetaParams(0.0));
    const double d1 = beta_divergence(x, y, BetaParams(1.0));
    for (double e : {1e-6, -1e-6}) {
      CHECK(beta_divergence(x, y, BetaParams(e)) == Approx(d0).epsilon(1e-4));
      CHECK(beta_divergence(x, y, BetaParams(1.0 + e)) == Approx(d1).epsilon(1e-4));
    }
  }
}

TEST_CASE("derivative values and finite-difference check", "[divergence]") {
  CHECK(beta_divergence_deriv(1.0, 1.0, BetaParams(1.5)).first == Approx(0.0).margin(0));
  {
    const auto [d1, d2] = beta_divergence_deriv(1.0, 2.0, BetaParams(2.0));
    CHECK(d1 == Approx(1.0));
    CHECK(d2 == Approx(1.0));
  }
  {
    const auto [d1, d2] = beta_divergence_deriv(1.0, 0.5, BetaParams(0.0));
    CHECK(d1 == Approx(-2.0));
    CHECK(d2 == Approx(12.0));
  }

  SeededRng rng(23);
  for (double b : kBetas) {
    const BetaParams p(b);
    for (int i = 0; i < 100; ++i) {
      const double x = rng.uniform(0.1, 10.0);
      const double y = rng.uniform(0.1, 10.0);
      const double step = 1e-5 * y;
      const double fd = testsupport::central_diff(
          [&](double yy) { return beta_divergence(x, yy, p); }, y, step);
      const auto [d1, d2] = beta_divergence_deriv(x, y, p);
      CHECK(d1 == Approx(fd).epsilon(1e-6).margin(1e-10));
      // sign of d1 follows sign of (y - x)
      if (std::abs(y - x) > 1e-6) CHECK(d1 * (y - x) > 0.0);
      // convexity interval
      if (b >= 1.0 && b <= 2.0) CHECK(d2 >= 0.0);
    }
  }
}

TEST_CASE("decomposition point values per regime", "[divergence]") {
  {
    const auto parts = decompose(1.0, 1.0, BetaParams(1.5));
    CHECK(parts.concave_val == 0.0);
    CHECK(parts.constant_val == 0.0);
    CHECK(parts.convex_val == Approx(0.0).margin(0));
  }
  {
    const auto parts = decompose(1.0, 2.0, BetaParams(0.0));
    CHECK(parts.convex_val == Approx(0.5));
    CHECK(parts.concave_val == Approx(std::log(2.0)));
    CHECK(parts.constant_val == Approx(-1.0));  // -(log 1 + 1)
  }
  {
    const auto parts = decompose(1.0, 2.0, BetaParams(3.0));
    CHECK(parts.convex_val == Approx(8.0 / 3.0));
    CHECK(parts.concave_val == Approx(-2.0));
    CHECK(parts.constant_val == Approx(1.0 / 6.0));
  }
}

TEST_CASE("decomposition sums back to the divergence", "[divergence]") {
  SeededRng rng(37);
  for (double b : kBetas) {
    const BetaParams p(b);
    for (int i = 0; i < 300; ++i) {
      const double x = rng.uniform(0.05, 20.0);
      const double y = rng.uniform(0.05, 20.0);
      const double d = beta_divergence(x, y, p);
      const auto parts = decompose(x, y, p);
      const double sum = parts.convex_val + parts.concave_val + parts.constant_val;
      CHECK(sum == Approx(d).epsilon(1e-12).margin(1e-12));
      const auto [d1, unused] = beta_divergence_deriv(x, y, p);
      (void)unused;
      CHECK(parts.convex_deriv + parts.concave_deriv == Approx(d1).epsilon(1e-10).margin(1e-12));
    }
  }
}

TEST_CASE("decomposition part derivatives match their finite differences", "[divergence]") {
  SeededRng rng(41);
  for (double b : kBetas) {
    const BetaParams p(b);
    for (int i = 0; i < 50; ++i) {
      const double x = rng.uniform(0.1, 10.0);
      const double y = rng.uniform(0.1, 10.0);
      const double step = 1e-6 * y;
      const double fd_convex = testsupport::central_diff(
          [&](double yy) { return decompose(x, yy, p).convex_val; }, y, step);
      const double fd_concave = testsupport::central_diff(
          [&](double yy) { return decompose(x, yy, p).concave_val; }, y, step);
      const auto parts = decompose(x, y, p);
      CHECK(parts.convex_deriv == Approx(fd_convex).epsilon(1e-5).margin(1e-9));
      CHECK(parts.concave_deriv == Approx(fd_concave).epsilon(1e-5).margin(1e-9));
    }
  }
}

TEST_CASE("scalar auxiliary: tightness and majorization", "[divergence]") {
  // tightness at y = yt
  CHECK(scalar_aux(2.0, 2.0, 1.0, BetaParams(0.5)) ==
        Approx(beta_divergence(1.0, 2.0, BetaParams(0.5))).epsilon(1e-12));
  // for beta in [1,2] the convex part is the full divergence, zero concave terms
  CHECK(scalar_aux(1.0, 2.0, 1.0, BetaParams(1.5)) == Approx(0.0).margin(1e-15));
  // direct evaluation at beta = 0
  CHECK(scalar_aux(3.0, 2.0, 1.0, BetaParams(0.0)) ==
        Approx(1.0 / 3.0 + std::log(2.0) + 0.5 - 1.0));

  SeededRng rng(53);
  for (double b : kBetas) {
    const BetaParams p(b);
    for (int i = 0; i < 300; ++i) {
      const double x = rng.uniform(0.05, 10.0);
      const double yt = rng.uniform(0.05, 10.0);
      const double y = rng.uniform(0.05, 10.0);
      CHECK(scalar_aux(y, yt, x, p) >= beta_divergence(x, y, p) - 1e-10);
      const double tight = scalar_aux(yt, yt, x, p);
      const double d = beta_divergence(x, yt, p);
      CHECK(tight == Approx(d).epsilon(1e-12).margin(1e-12));
    }
  }
}

TEST_CASE("auxiliary is convex in y", "[divergence]") {
  SeededRng rng(59);
  for (double b : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const BetaParams p(b);
    for (int i = 0; i < 20; ++i) {
      const double x = rng.uniform(0.2, 5.0);
      const double yt = rng.uniform(0.2, 5.0);
      const int grid = 200;
      std::vector<double> g(grid);
      const double lo = 0.05, hi = 8.0;
      for (int s = 0; s < grid; ++s)
        g[s] = scalar_aux(lo + (hi - lo) * s / (grid - 1), yt, x, p);
      for (int s = 1; s + 1 < grid; ++s)
        CHECK(g[s - 1] - 2.0 * g[s] + g[s + 1] >= -1e-9);
    }
  }
}

TEST_CASE("scale law", "[divergence]") {
  {
    const auto [lhs, rhs] = scale_check(1.0, 2.0, 1.0, BetaParams(0.7));
    CHECK(lhs == Approx(rhs).epsilon(1e-12));
  }
  {
    // IS divergence is scale-invariant
    const auto [lhs, rhs] = scale_check(1.0, 2.0, 3.0, BetaParams(0.0));
    CHECK(lhs == Approx(rhs).epsilon(1e-12));
    CHECK(lhs == Approx(beta_divergence(1.0, 2.0, BetaParams(0.0))).epsilon(1e-12));
  }
  {
    const auto [lhs, rhs] = scale_check(1.0, 2.0, 2.0, BetaParams(2.0));
    CHECK(lhs == Approx(rhs).epsilon(1e-12));
    CHECK(lhs == Approx(4.0 * beta_divergence(1.0, 2.0, BetaParams(2.0))).epsilon(1e-12));
  }
  SeededRng rng(61);
  for (double b : kBetas) {
    const BetaParams p(b);
    for (int i = 0; i < 200; ++i) {
      // keep x and y apart: near-equal pairs make d tiny against the formula's
      // terms and the comparison would measure cancellation, not the law
      const double x = rng.uniform(0.05, 10.0);
      const double ratio = rng.uniform() < 0.5 ? rng.uniform(1.25, 4.0) : rng.uniform(0.25, 0.8);
      const auto [lhs, rhs] = scale_check(x, x * ratio, rng.uniform(0.1, 10.0), p);
      CHECK(lhs == Approx(rhs).epsilon(1e-10).margin(1e-13));
    }
  }
}
