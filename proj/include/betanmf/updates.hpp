// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "betanmf/divergence.hpp"
#include "betanmf/types.hpp"

namespace betanmf {

// Per-coefficient update kernels. All three rules are functions of the ratio
// of the two nonnegative gradient parts,
//   grad_neg = W^T [(W h)^(beta-2) . v],   grad_pos = W^T (W h)^(beta-1),
// with grad_pos - grad_neg equal to the criterion gradient.

enum class RuleKind { MM, Heuristic, ME };

inline bool me_closed_form(double beta) {
  return beta == 0.0 || beta == 0.5 || beta == 1.5 || beta == 2.0;
}

// Algorithm selector. ME carries the mixture weight theta of the prolonged-ME
// update, optionally scheduled linearly from theta to theta_end over a run.
struct UpdateRule {
  RuleKind kind = RuleKind::MM;
  double theta = 0.95;
  std::optional<double> theta_end;

  static UpdateRule mm() { return UpdateRule{RuleKind::MM, 0.95, {}}; }
  static UpdateRule heuristic() { return UpdateRule{RuleKind::Heuristic, 0.95, {}}; }

  static UpdateRule me(const BetaParams& p, double theta = 0.95,
                       std::optional<double> theta_end = {}) {
    require(me_closed_form(p.beta),
            "ME update has a closed form only for beta in {0, 0.5, 1.5, 2}");
    require(theta >= 0.0 && theta < 1.0, "theta must lie in [0, 1)");
    if (theta_end) require(*theta_end >= 0.0 && *theta_end < 1.0, "theta_end must lie in [0, 1)");
    return UpdateRule{RuleKind::ME, theta, theta_end};
  }

  // Mixture weight at iteration i of a max_iter run (1-based).
  double theta_at(long iter, long max_iter) const {
    if (!theta_end || max_iter <= 1) return theta;
    const double t = static_cast<double>(iter - 1) / static_cast<double>(max_iter - 1);
    return theta + (*theta_end - theta) * t;
  }

  std::string name() const {
    switch (kind) {
      case RuleKind::MM: return "mm";
      case RuleKind::Heuristic: return "heur";
      case RuleKind::ME: return "me";
    }
    return "?";
  }
};

// Numerator/denominator gradient statistics for one factor update.
struct RatioStats {
  Matrix grad_neg;  // entrywise >= 0
  Matrix grad_pos;  // entrywise > 0 after flooring
};

namespace detail {

inline void check_update_args(double h_tilde, double neg, double pos) {
  require_domain(h_tilde > 0.0, "update: h_tilde must be > 0");
  require_domain(neg >= 0.0, "update: numerator statistic must be >= 0");
  require_domain(pos > 0.0, "update: denominator statistic must be > 0 (floor before calling)");
}

}  // namespace detail

// MM update h = h_tilde (neg/pos)^gamma(beta). Exactly minimizes the
// separable auxiliary function; fixed point iff neg == pos.
inline double mm_update(double h_tilde, double neg, double pos, const BetaParams& p) {
  detail::check_update_args(h_tilde, neg, pos);
  const double ratio = neg / pos;
  return h_tilde * (p.gamma == 1.0 ? ratio : std::pow(ratio, p.gamma));
}

// Heuristic update h = h_tilde (neg/pos), exponent 1 for all beta. Coincides
// with the MM update on the convexity interval beta in [1,2] and takes larger
// or equal steps everywhere else.
inline double heuristic_update(double h_tilde, double neg, double pos, const BetaParams& p) {
  (void)p;
  detail::check_update_args(h_tilde, neg, pos);
  return h_tilde * (neg / pos);
}

// Majorization-equalization update: jump to the far point of the auxiliary
// function's current level set. Closed form for beta in {0, 0.5, 1.5, 2}:
//   beta = 0    h^ME = h^H
//   beta = 0.5  h^ME = (h/4) (sqrt(1 + 8 h^H/h) - 1)^2        (always defined)
//   beta = 1.5  h^ME = (h/4) (sqrt(12 h^MM/h - 3) - 1)^2  if h < 3 h^MM
//   beta = 2    h^ME = 2 h^MM - h                         if h < 2 h^MM
// For beta in {1.5, 2} the root can fail to exist; the update is prolonged by
// zero there and mixed with MM: theta * h^pME + (1-theta) * h^MM, which stays
// positive for theta < 1.
inline double me_update(double h_tilde, double h_mm, double h_heur, const BetaParams& p,
                        double theta) {
  require_domain(h_tilde > 0.0 && h_mm > 0.0 && h_heur > 0.0,
                 "me_update: inputs must be > 0");
  require_domain(theta >= 0.0 && theta <= 1.0, "me_update: theta must lie in [0, 1]");
  const double b = p.beta;
  if (b == 0.0) return h_heur;
  if (b == 0.5) {
    const double s = std::sqrt(1.0 + 8.0 * h_heur / h_tilde) - 1.0;
    return 0.25 * h_tilde * s * s;
  }
  if (b == 1.5) {
    double pme = 0.0;
    if (h_tilde < 3.0 * h_mm) {
      const double s = std::sqrt(12.0 * h_mm / h_tilde - 3.0) - 1.0;
      pme = 0.25 * h_tilde * s * s;
    }
    return theta * pme + (1.0 - theta) * h_mm;
  }
  if (b == 2.0) {
    const double pme = h_tilde < 2.0 * h_mm ? 2.0 * h_mm - h_tilde : 0.0;
    return theta * pme + (1.0 - theta) * h_mm;
  }
  throw std::domain_error("me_update: closed form only for beta in {0, 0.5, 1.5, 2}");
}

// Gradient statistics of C(H) = D(V|WH) w.r.t. H at H_tilde (both K x N):
//   grad_neg = W^T [vt^(beta-2) . V],   grad_pos = W^T vt^(beta-1),
// with vt = max(W H_tilde, eps). With a mask, masked entries contribute to
// neither statistic (the statistics of the mask-weighted cost). For beta = 2
// the denominator regroups as (W^T W) H_tilde when no mask is present.
//
// eps <= 0 disables flooring; the reconstruction must then be entrywise
// positive.
inline RatioStats compute_ratio_stats_h(const Matrix& V, const Matrix& W, const Matrix& H_tilde,
                                        const BetaParams& p, const Matrix* mask = nullptr,
                                        double eps = kDefaultEpsFloor) {
  const Eigen::Index F = V.rows(), N = V.cols(), K = W.cols();
  check_shape(W, F, K, "W");
  check_shape(H_tilde, K, N, "H_tilde");
  if (mask) check_shape(*mask, F, N, "mask");

  if (!mask && p.beta == 2.0) {
    return {W.transpose() * V, (W.transpose() * W) * H_tilde};
  }

  Matrix vt = W * H_tilde;
  if (eps > 0.0) {
    vt = vt.cwiseMax(eps);
  } else if (vt.minCoeff() <= 0.0) {
    throw std::domain_error("ratio stats: reconstruction has a zero entry and flooring is off");
  }
  Eigen::ArrayXXd p2 = vt.array().pow(p.beta - 2.0);
  Eigen::ArrayXXd num = p2 * V.array();
  Eigen::ArrayXXd den = p2 * vt.array();  // vt^(beta-1)
  if (mask) {
    num *= mask->array();
    den *= mask->array();
  }
  return {W.transpose() * num.matrix(), W.transpose() * den.matrix()};
}

// Transpose-symmetric statistics for the W update (both F x K):
//   grad_neg = [vt^(beta-2) . V] H^T,   grad_pos = vt^(beta-1) H^T.
inline RatioStats compute_ratio_stats_w(const Matrix& V, const Matrix& W_tilde, const Matrix& H,
                                        const BetaParams& p, const Matrix* mask = nullptr,
                                        double eps = kDefaultEpsFloor) {
  const Eigen::Index F = V.rows(), N = V.cols(), K = W_tilde.cols();
  check_shape(W_tilde, F, K, "W_tilde");
  check_shape(H, K, N, "H");
  if (mask) check_shape(*mask, F, N, "mask");

  if (!mask && p.beta == 2.0) {
    return {V * H.transpose(), W_tilde * (H * H.transpose())};
  }

  Matrix vt = W_tilde * H;
  if (eps > 0.0) {
    vt = vt.cwiseMax(eps);
  } else if (vt.minCoeff() <= 0.0) {
    throw std::domain_error("ratio stats: reconstruction has a zero entry and flooring is off");
  }
  Eigen::ArrayXXd p2 = vt.array().pow(p.beta - 2.0);
  Eigen::ArrayXXd num = p2 * V.array();
  Eigen::ArrayXXd den = p2 * vt.array();
  if (mask) {
    num *= mask->array();
    den *= mask->array();
  }
  return {num.matrix() * H.transpose(), den.matrix() * H.transpose()};
}

// Entrywise application of a rule to a whole factor given its statistics.
// theta overrides the rule's constant weight (used by the theta schedule);
// pass rule.theta for the plain case.
inline Matrix apply_rule(const Matrix& factor_tilde, const RatioStats& stats,
                         const UpdateRule& rule, const BetaParams& p, double theta) {
  check_shape(stats.grad_neg, factor_tilde.rows(), factor_tilde.cols(), "grad_neg");
  check_shape(stats.grad_pos, factor_tilde.rows(), factor_tilde.cols(), "grad_pos");
  Matrix out(factor_tilde.rows(), factor_tilde.cols());
  for (Eigen::Index j = 0; j < factor_tilde.cols(); ++j) {
    for (Eigen::Index i = 0; i < factor_tilde.rows(); ++i) {
      const double h = factor_tilde(i, j);
      const double neg = stats.grad_neg(i, j);
      const double pos = stats.grad_pos(i, j);
      switch (rule.kind) {
        case RuleKind::MM:
          out(i, j) = mm_update(h, neg, pos, p);
          break;
        case RuleKind::Heuristic:
          out(i, j) = heuristic_update(h, neg, pos, p);
          break;
        case RuleKind::ME: {
          const double h_heur = heuristic_update(h, neg, pos, p);
          if (p.beta == 0.0) {
            out(i, j) = h_heur;  // ME coincides with the heuristic at beta = 0
          } else if (neg == 0.0) {
            out(i, j) = 0.0;  // empty numerator statistics send the coefficient to 0
          } else {
            const double h_mm = mm_update(h, neg, pos, p);
            out(i, j) = me_update(h, h_mm, h_heur, p, theta);
          }
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace betanmf
