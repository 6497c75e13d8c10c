// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <utility>

#include "betanmf/types.hpp"

namespace betanmf {

// The beta-divergence d_beta(x|y) is a one-parameter family of scalar costs
// interpolating the Euclidean distance (beta=2), generalized Kullback-Leibler
// divergence (beta=1) and Itakura-Saito divergence (beta=0). This header is
// the scalar kernel the whole library is built on: value, derivatives, the
// convex-concave-constant split and the auxiliary function derived from it.

enum class BetaRegime {
  BelowZero,  // beta < 0
  ZeroToOne,  // 0 <= beta < 1 (includes the IS limit beta = 0)
  OneToTwo,   // 1 <= beta <= 2, where d_beta is convex in y
  AboveTwo,   // beta > 2
};

// beta together with its regime and the exponent gamma(beta) of the MM
// multiplicative update. gamma(beta) <= 1 for all beta.
struct BetaParams {
  double beta;
  BetaRegime regime;
  double gamma;

  explicit BetaParams(double b) : beta(b), regime(classify(b)), gamma(gamma_of(b)) {
    require(std::isfinite(b), "beta must be finite");
  }

  static BetaRegime classify(double b) {
    if (b < 0.0) return BetaRegime::BelowZero;
    if (b < 1.0) return BetaRegime::ZeroToOne;
    if (b <= 2.0) return BetaRegime::OneToTwo;
    return BetaRegime::AboveTwo;
  }

  static double gamma_of(double b) {
    if (b < 1.0) return 1.0 / (2.0 - b);
    if (b <= 2.0) return 1.0;
    return 1.0 / (b - 1.0);
  }

  bool convex_in_y() const { return regime == BetaRegime::OneToTwo; }
};

// The five-tuple (convex, convex', concave, concave', constant) of the
// differentiable convex-concave-constant split of d_beta(x|y), evaluated at a
// point. Values sum back to the divergence and the two derivative parts sum
// to d'_beta(x|y).
struct DecompositionParts {
  double convex_val;
  double convex_deriv;
  double concave_val;
  double concave_deriv;
  double constant_val;
};

namespace detail {

inline void check_div_domain(double x, double y, const BetaParams& p) {
  require_domain(y > 0.0, "beta_divergence: y must be > 0");
  require_domain(x >= 0.0, "beta_divergence: x must be >= 0");
  if (p.beta <= 0.0)
    require_domain(x > 0.0, "beta_divergence: x must be > 0 when beta <= 0");
}

}  // namespace detail

// d_beta(x|y). Nonnegative, zero iff x == y, continuous in beta (the beta->0
// and beta->1 limits agree with the explicit IS/KL formulas).
inline double beta_divergence(double x, double y, const BetaParams& p) {
  detail::check_div_domain(x, y, p);
  const double b = p.beta;
  if (b == 0.0) {
    const double r = x / y;
    return r - std::log(r) - 1.0;
  }
  if (b == 1.0) {
    // x log x -> 0 as x -> 0
    const double xlog = x > 0.0 ? x * std::log(x / y) : 0.0;
    return xlog - x + y;
  }
  return (std::pow(x, b) + (b - 1.0) * std::pow(y, b) - b * x * std::pow(y, b - 1.0)) /
         (b * (b - 1.0));
}

// First and second derivative of d_beta(x|y) w.r.t. y:
//   d1 = y^(beta-2) (y - x)
//   d2 = y^(beta-3) [(beta-1) y - (beta-2) x]
// Both are continuous in beta; d2 >= 0 on the convexity interval beta in [1,2].
inline std::pair<double, double> beta_divergence_deriv(double x, double y, const BetaParams& p) {
  detail::check_div_domain(x, y, p);
  const double b = p.beta;
  const double d1 = std::pow(y, b - 2.0) * (y - x);
  const double d2 = std::pow(y, b - 3.0) * ((b - 1.0) * y - (b - 2.0) * x);
  return {d1, d2};
}

// Convex-concave-constant split of d_beta(x|y) at (x, y), one closed form per
// regime. For beta in [1,2] the divergence is convex and the concave and
// constant parts are identically zero.
//
// The constant for beta = 0 is -(log x + 1); this is the unique constant for
// which the three parts sum back to the IS divergence.
inline DecompositionParts decompose(double x, double y, const BetaParams& p) {
  detail::check_div_domain(x, y, p);
  const double b = p.beta;
  DecompositionParts parts{};
  switch (p.regime) {
    case BetaRegime::BelowZero:
    case BetaRegime::ZeroToOne:
      if (b == 0.0) {
        parts.convex_val = x / y;
        parts.convex_deriv = -x / (y * y);
        parts.concave_val = std::log(y);
        parts.concave_deriv = 1.0 / y;
        parts.constant_val = -(std::log(x) + 1.0);
      } else {
        parts.convex_val = x * std::pow(y, b - 1.0) / (1.0 - b);
        parts.convex_deriv = -x * std::pow(y, b - 2.0);
        parts.concave_val = std::pow(y, b) / b;
        parts.concave_deriv = std::pow(y, b - 1.0);
        parts.constant_val = std::pow(x, b) / (b * (b - 1.0));
      }
      break;
    case BetaRegime::OneToTwo: {
      parts.convex_val = beta_divergence(x, y, p);
      parts.convex_deriv = beta_divergence_deriv(x, y, p).first;
      parts.concave_val = 0.0;
      parts.concave_deriv = 0.0;
      parts.constant_val = 0.0;
      break;
    }
    case BetaRegime::AboveTwo:
      parts.convex_val = std::pow(y, b) / b;
      parts.convex_deriv = std::pow(y, b - 1.0);
      parts.concave_val = -x * std::pow(y, b - 1.0) / (b - 1.0);
      parts.concave_deriv = -x * std::pow(y, b - 2.0);
      parts.constant_val = std::pow(x, b) / (b * (b - 1.0));
      break;
  }
  return parts;
}

// Scalar auxiliary function
//   g(y|yt;x) = convex(x|y) + concave(x|yt) + (y - yt) concave'(x|yt) + constant(x).
// Majorizes d_beta(x|y) in y and is tight at y = yt. Strictly convex in y.
inline double scalar_aux(double y, double y_tilde, double x, const BetaParams& p) {
  require_domain(y > 0.0 && y_tilde > 0.0, "scalar_aux: y and y_tilde must be > 0");
  const DecompositionParts at_y = decompose(x, y, p);
  const DecompositionParts at_t = decompose(x, y_tilde, p);
  return at_y.convex_val + at_t.concave_val + (y - y_tilde) * at_t.concave_deriv +
         at_t.constant_val;
}

// Both sides of the scale law d_beta(lambda x | lambda y) = lambda^beta d_beta(x|y),
// returned as (lhs, rhs) for property checks. The IS divergence (beta = 0) is
// the scale-invariant member of the family.
inline std::pair<double, double> scale_check(double x, double y, double lambda,
                                             const BetaParams& p) {
  require_domain(lambda > 0.0, "scale_check: lambda must be > 0");
  const double lhs = beta_divergence(lambda * x, lambda * y, p);
  const double rhs = std::pow(lambda, p.beta) * beta_divergence(x, y, p);
  return {lhs, rhs};
}

}  // namespace betanmf
