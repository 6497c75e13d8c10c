// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "betanmf/diagnostics.hpp"
#include "betanmf/divergence.hpp"
#include "betanmf/synthetic.hpp"
#include "betanmf/types.hpp"
#include "betanmf/updates.hpp"

namespace betanmf {

// Current factor pair. W holds the dictionary for plain runs and the
// expansion coefficients L (M x K) for convex runs, where the effective
// dictionary is S L.
struct FactorState {
  Matrix W;
  Matrix H;
  long iter = 0;
  bool normalized = false;
};

enum class UpdateOrder { WThenH, HThenW };

// Full description of one factorization problem.
struct ProblemSpec {
  Matrix V;
  Eigen::Index rank;
  BetaParams beta;
  UpdateRule rule;

  double l1_weight = 0.0;           // l1 penalty weight on H (MM rule only)
  std::optional<Matrix> convex_s;   // fixed nonnegative basis S (F x M)
  std::optional<Matrix> mask;       // binary observation mask (F x N), 0 = missing
  long max_iter = 100;
  unsigned long long seed = 0;
  std::optional<double> tol;        // optional stop on relative cost change
  double eps_floor = kDefaultEpsFloor;
  long checkpoint_every = 10;       // fit-residual checkpoint stride, 0 = off
  bool update_w = true;             // false: left factor held fixed
  UpdateOrder order = UpdateOrder::WThenH;

  ProblemSpec(Matrix v, Eigen::Index k, BetaParams b, UpdateRule r)
      : V(std::move(v)), rank(k), beta(b), rule(std::move(r)) {}

  bool convex() const { return convex_s.has_value(); }
  const Matrix* mask_ptr() const { return mask ? &*mask : nullptr; }
};

struct RunResult {
  FactorState state;
  RunTrace trace;
};

// Rescale each column of the (effective) dictionary to unit l1 norm and the
// matching row of H by the reciprocal, leaving the product unchanged. Columns
// with zero norm are skipped and their indices returned.
inline std::vector<Eigen::Index> normalize(FactorState& state, const Matrix* S = nullptr) {
  std::vector<Eigen::Index> skipped;
  Matrix eff_storage;
  const Matrix& eff = S ? (eff_storage = *S * state.W) : state.W;
  for (Eigen::Index k = 0; k < state.W.cols(); ++k) {
    const double norm = eff.col(k).sum();
    if (norm <= 0.0) {
      skipped.push_back(k);
      continue;
    }
    state.W.col(k) /= norm;
    state.H.row(k) *= norm;
  }
  state.normalized = true;
  return skipped;
}

// One update of H given W, with the rule's constant theta.
inline Matrix update_h(const Matrix& V, const Matrix& W, const Matrix& H_tilde,
                       const BetaParams& p, const UpdateRule& rule, const Matrix* mask = nullptr,
                       double eps = kDefaultEpsFloor) {
  RatioStats st = compute_ratio_stats_h(V, W, H_tilde, p, mask, eps);
  if (eps > 0.0) st.grad_pos = st.grad_pos.cwiseMax(eps);
  return apply_rule(H_tilde, st, rule, p, rule.theta);
}

// One update of W given H.
inline Matrix update_w(const Matrix& V, const Matrix& W_tilde, const Matrix& H,
                       const BetaParams& p, const UpdateRule& rule, const Matrix* mask = nullptr,
                       double eps = kDefaultEpsFloor) {
  RatioStats st = compute_ratio_stats_w(V, W_tilde, H, p, mask, eps);
  if (eps > 0.0) st.grad_pos = st.grad_pos.cwiseMax(eps);
  return apply_rule(W_tilde, st, rule, p, rule.theta);
}

// l1-penalized MM update of H. For beta <= 1 the weight enters the
// denominator; for beta >= 2 it enters the numerator with opposite sign and
// the numerator is clamped at 0 (active nonnegativity constraint). No closed
// form exists for beta in (1, 2).
inline Matrix update_h_l1(const Matrix& V, const Matrix& W, const Matrix& H_tilde,
                          const BetaParams& p, double lambda, const Matrix* mask = nullptr,
                          double eps = kDefaultEpsFloor) {
  require_domain(lambda >= 0.0, "update_h_l1: lambda must be >= 0");
  if (lambda > 0.0 && p.beta > 1.0 && p.beta < 2.0)
    throw std::domain_error(
        "update_h_l1: the l1-penalized MM update has no closed form for beta in (1, 2)");
  RatioStats st = compute_ratio_stats_h(V, W, H_tilde, p, mask, eps);
  if (eps > 0.0) st.grad_pos = st.grad_pos.cwiseMax(eps);
  if (p.beta <= 1.0)
    st.grad_pos.array() += lambda;
  else
    st.grad_neg = (st.grad_neg.array() - lambda).cwiseMax(0.0).matrix();
  return apply_rule(H_tilde, st, UpdateRule::mm(), p, 0.0);
}

namespace detail {

// Gradient statistics for the expansion coefficients L of convex NMF
// (effective dictionary S L):
//   grad_neg = S^T [vt^(beta-2) . V] H^T,   grad_pos = S^T [vt^(beta-1)] H^T.
inline RatioStats compute_ratio_stats_l(const Matrix& V, const Matrix& S, const Matrix& L_tilde,
                                        const Matrix& H, const BetaParams& p,
                                        const Matrix* mask = nullptr,
                                        double eps = kDefaultEpsFloor) {
  const Eigen::Index F = V.rows(), N = V.cols(), M = S.cols(), K = L_tilde.cols();
  check_shape(S, F, M, "S");
  check_shape(L_tilde, M, K, "L_tilde");
  check_shape(H, K, N, "H");
  if (mask) check_shape(*mask, F, N, "mask");

  if (!mask && p.beta == 2.0) {
    return {S.transpose() * (V * H.transpose()),
            S.transpose() * (S * (L_tilde * (H * H.transpose())))};
  }

  Matrix vt = (S * L_tilde) * H;
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
  return {S.transpose() * (num.matrix() * H.transpose()),
          S.transpose() * (den.matrix() * H.transpose())};
}

}  // namespace detail

// One update of L given H for convex NMF. With S = I this is exactly the
// plain W update.
inline Matrix update_l_convex(const Matrix& V, const Matrix& S, const Matrix& L_tilde,
                              const Matrix& H, const BetaParams& p, const UpdateRule& rule,
                              const Matrix* mask = nullptr, double eps = kDefaultEpsFloor) {
  RatioStats st = detail::compute_ratio_stats_l(V, S, L_tilde, H, p, mask, eps);
  if (eps > 0.0) st.grad_pos = st.grad_pos.cwiseMax(eps);
  return apply_rule(L_tilde, st, rule, p, rule.theta);
}

// KKT residuals for the convex variant: the left residual is measured on L
// with gradient S^T [vt^(beta-2).(vt - V)] H^T.
inline std::pair<double, double> kkt_residuals_convex(const Matrix& V, const Matrix& S,
                                                      const Matrix& L, const Matrix& H,
                                                      const BetaParams& p,
                                                      const Matrix* mask = nullptr,
                                                      double eps = kDefaultEpsFloor) {
  const Matrix w_eff = S * L;
  Matrix vt = w_eff * H;
  if (eps > 0.0) vt = vt.cwiseMax(eps);
  Eigen::ArrayXXd core = vt.array().pow(p.beta - 2.0) * (vt - V).array();
  if (mask) core *= mask->array();
  const Matrix grad_l = S.transpose() * (core.matrix() * H.transpose());
  const Matrix grad_h = w_eff.transpose() * core.matrix();
  return {detail::kkt_norm(L, grad_l), detail::kkt_norm(H, grad_h)};
}

namespace detail {

inline void validate_spec(const ProblemSpec& spec) {
  require(spec.rank >= 1, "rank must be >= 1");
  require(spec.max_iter >= 0, "max_iter must be >= 0");
  require(spec.checkpoint_every >= 0, "checkpoint_every must be >= 0");
  require_domain(spec.l1_weight >= 0.0, "l1 weight must be >= 0");
  check_nonneg(spec.V, "V");
  if (spec.l1_weight > 0.0) {
    require(spec.rule.kind == RuleKind::MM, "l1 penalty is implemented for the MM rule");
    require(!(spec.beta.beta > 1.0 && spec.beta.beta < 2.0),
            "l1-penalized update has no closed form for beta in (1, 2)");
  }
  if (spec.mask) {
    check_shape(*spec.mask, spec.V.rows(), spec.V.cols(), "mask");
    check_binary(*spec.mask, "mask");
  }
  if (spec.convex_s) {
    require(spec.convex_s->rows() == spec.V.rows(), "S must have as many rows as V");
    check_nonneg(*spec.convex_s, "S");
  }
  if (spec.rule.kind == RuleKind::ME)
    require(me_closed_form(spec.beta.beta),
            "ME update has a closed form only for beta in {0, 0.5, 1.5, 2}");
}

}  // namespace detail

// Alternating driver. One iteration updates the left factor given H, then H
// given the new left factor (configurable order), then rescales; cost and KKT
// residuals are recorded per iteration, fit residuals are filled in post hoc
// at checkpointed iterations. The trace is returned even when the run aborts
// on a non-finite cost.
//
// Factors stay strictly positive throughout: reconstruction entries and
// denominator statistics are floored at eps_floor before negative powers, and
// updated factors are floored at eps_floor. Data entries are floored when
// beta <= 1 (where the divergence needs x > 0 or diverges as x -> 0).
inline RunResult run(const ProblemSpec& spec, const std::optional<FactorState>& init = {}) {
  detail::validate_spec(spec);
  const Eigen::Index F = spec.V.rows(), N = spec.V.cols(), K = spec.rank;
  const bool convex = spec.convex();
  const Matrix* S = convex ? &*spec.convex_s : nullptr;
  const Eigen::Index left_rows = convex ? S->cols() : F;
  const Matrix* mask = spec.mask_ptr();
  const double eps = spec.eps_floor;

  Matrix V = spec.V;
  if (eps > 0.0 && spec.beta.beta <= 1.0) V = V.cwiseMax(eps);

  FactorState state;
  if (init) {
    check_shape(init->W, left_rows, K, convex ? "init L" : "init W");
    check_shape(init->H, K, N, "init H");
    check_positive(init->W, convex ? "init L" : "init W");
    check_positive(init->H, "init H");
    state.W = init->W;
    state.H = init->H;
  } else {
    SeededRng rng(spec.seed);
    state.W = rng.uniform_matrix(left_rows, K, 0.1, 1.1);
    state.H = rng.uniform_matrix(K, N, 0.1, 1.1);
  }

  RunTrace trace;
  trace.seed = spec.seed;
  trace.rule = spec.rule.name();
  trace.beta = spec.beta.beta;

  const long observed = observed_count(F, N, mask);
  bool degenerate = false;
  if (mask) {
    degenerate = observed == 0 || (V.array() * mask->array()).maxCoeff() == 0.0;
  } else {
    degenerate = V.size() == 0 || V.maxCoeff() == 0.0;
  }
  if (degenerate)
    trace.warnings.push_back("degenerate problem: observed data are all zero");

  Matrix w_eff_storage;
  auto effective_w = [&]() -> const Matrix& {
    if (!convex) return state.W;
    w_eff_storage = *S * state.W;
    return w_eff_storage;
  };

  auto record = [&](long iter, double wall_ms) {
    const Matrix& w_eff = effective_w();
    const double c =
        observed == 0 ? 0.0
                      : cost(V, w_eff, state.H, spec.beta, mask, eps) / static_cast<double>(observed);
    const auto [kw, kh] =
        convex ? kkt_residuals_convex(V, *S, state.W, state.H, spec.beta, mask, eps)
               : kkt_residuals(V, state.W, state.H, spec.beta, mask, eps);
    trace.records.push_back(TraceRecord{iter, c, kw, kh, {}, {}, wall_ms});
    return c;
  };

  struct Checkpoint {
    long iter;
    Matrix W, H;
  };
  std::vector<Checkpoint> checkpoints;
  auto checkpoint = [&](long iter) {
    if (spec.checkpoint_every > 0 && iter % spec.checkpoint_every == 0)
      checkpoints.push_back({iter, state.W, state.H});
  };

  double prev_cost = record(0, 0.0);
  checkpoint(0);

  UpdateRule rule = spec.rule;
  bool warned_zero_column = false;
  for (long i = 1; i <= spec.max_iter; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    rule.theta = spec.rule.theta_at(i, spec.max_iter);

    auto do_left = [&]() {
      if (!spec.update_w) return;
      Matrix next = convex
                        ? update_l_convex(V, *S, state.W, state.H, spec.beta, rule, mask, eps)
                        : update_w(V, state.W, state.H, spec.beta, rule, mask, eps);
      state.W = eps > 0.0 ? next.cwiseMax(eps) : std::move(next);
    };
    auto do_h = [&]() {
      const Matrix& w_eff = effective_w();
      Matrix next = spec.l1_weight > 0.0
                        ? update_h_l1(V, w_eff, state.H, spec.beta, spec.l1_weight, mask, eps)
                        : update_h(V, w_eff, state.H, spec.beta, rule, mask, eps);
      state.H = eps > 0.0 ? next.cwiseMax(eps) : std::move(next);
    };

    if (spec.order == UpdateOrder::WThenH) {
      do_left();
      do_h();
    } else {
      do_h();
      do_left();
    }

    // Normalization removes the scale indeterminacy so that KKT residuals are
    // comparable across algorithms. Skipped when the left factor is fixed.
    if (spec.update_w) {
      const auto skipped = normalize(state, S);
      if (!skipped.empty() && !warned_zero_column) {
        trace.warnings.push_back("normalize: zero-norm dictionary column left unnormalized");
        warned_zero_column = true;
      }
    }

    state.iter = i;
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const double c = record(i, wall_ms);
    checkpoint(i);

    if (!std::isfinite(c)) {
      trace.error = "non-finite cost at iteration " + std::to_string(i);
      break;
    }
    if (spec.tol && std::abs(c - prev_cost) <=
                        *spec.tol * std::max(prev_cost, std::numeric_limits<double>::min()))
      break;
    prev_cost = c;
  }

  // fill fit residuals against the end-of-run factors
  for (const auto& cp : checkpoints) {
    if (cp.iter >= static_cast<long>(trace.records.size())) continue;
    const auto [fw, fh] = fit_residuals(cp.W, cp.H, state.W, state.H);
    trace.records[static_cast<size_t>(cp.iter)].fit_w = fw;
    trace.records[static_cast<size_t>(cp.iter)].fit_h = fh;
  }

  return RunResult{std::move(state), std::move(trace)};
}

}  // namespace betanmf
