// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "betanmf/divergence.hpp"
#include "betanmf/types.hpp"

namespace betanmf {

// One trace row. fit_w/fit_h are filled post hoc at checkpointed iterations
// only; wall_ms is the wall-clock time of the iteration that produced the row.
struct TraceRecord {
  long iter = 0;
  double cost = 0.0;  // divergence normalized by the number of observed entries
  double kkt_w = 0.0;
  double kkt_h = 0.0;
  std::optional<double> fit_w;
  std::optional<double> fit_h;
  double wall_ms = 0.0;
};

// Per-iteration convergence record of a run; row 0 is the initial state.
struct RunTrace {
  std::vector<TraceRecord> records;
  unsigned long long seed = 0;
  std::string rule;
  double beta = 0.0;
  std::vector<std::string> warnings;
  std::optional<std::string> error;  // set when a run aborts (non-finite cost)

  bool ok() const { return !error.has_value(); }
  const TraceRecord& back() const { return records.back(); }
};

// D(V|WH) summed over observed entries. Masked entries (mask == 0) contribute
// nothing. The reconstruction is floored at eps before evaluation.
inline double cost(const Matrix& V, const Matrix& W, const Matrix& H, const BetaParams& p,
                   const Matrix* mask = nullptr, double eps = kDefaultEpsFloor) {
  const Eigen::Index F = V.rows(), N = V.cols();
  check_shape(W, F, W.cols(), "W");
  check_shape(H, W.cols(), N, "H");
  if (mask) check_shape(*mask, F, N, "mask");
  Matrix vt = W * H;
  if (eps > 0.0) vt = vt.cwiseMax(eps);
  double total = 0.0;
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index f = 0; f < F; ++f) {
      if (mask && (*mask)(f, n) == 0.0) continue;
      total += beta_divergence(V(f, n), vt(f, n), p);
    }
  return total;
}

inline long observed_count(Eigen::Index F, Eigen::Index N, const Matrix* mask) {
  if (!mask) return static_cast<long>(F * N);
  return static_cast<long>(mask->sum());
}

// cost / (number of observed entries); D/FN in the unmasked case.
inline double normalized_cost(const Matrix& V, const Matrix& W, const Matrix& H,
                              const BetaParams& p, const Matrix* mask = nullptr,
                              double eps = kDefaultEpsFloor) {
  const long count = observed_count(V.rows(), V.cols(), mask);
  if (count == 0) return 0.0;
  return cost(V, W, H, p, mask, eps) / static_cast<double>(count);
}

namespace detail {

// ||min{factor, gradient}||_1 / size. Zero exactly at a first-order
// stationary point of the nonnegativity-constrained problem.
inline double kkt_norm(const Matrix& factor, const Matrix& grad) {
  return factor.cwiseMin(grad).cwiseAbs().sum() / static_cast<double>(factor.size());
}

}  // namespace detail

// Size-normalized KKT residuals
//   KKT(W) = ||min{W, [vt^(beta-2).(vt-V)] H^T}||_1 / FK
//   KKT(H) = ||min{H, W^T [vt^(beta-2).(vt-V)]}||_1 / KN
// with vt = max(WH, eps), mask-weighted like the update statistics so that
// diagnostics and dynamics see the same surrogate problem.
inline std::pair<double, double> kkt_residuals(const Matrix& V, const Matrix& W, const Matrix& H,
                                               const BetaParams& p, const Matrix* mask = nullptr,
                                               double eps = kDefaultEpsFloor) {
  const Eigen::Index F = V.rows(), N = V.cols();
  check_shape(W, F, W.cols(), "W");
  check_shape(H, W.cols(), N, "H");
  if (mask) check_shape(*mask, F, N, "mask");
  Matrix vt = W * H;
  if (eps > 0.0) vt = vt.cwiseMax(eps);
  Eigen::ArrayXXd core = vt.array().pow(p.beta - 2.0) * (vt - V).array();
  if (mask) core *= mask->array();
  const Matrix grad_w = core.matrix() * H.transpose();
  const Matrix grad_h = W.transpose() * core.matrix();
  return {detail::kkt_norm(W, grad_w), detail::kkt_norm(H, grad_h)};
}

// Size-normalized Frobenius distances ||A - A_ref||_F / size, used to measure
// closeness of checkpointed iterates to their end-of-run values.
inline std::pair<double, double> fit_residuals(const Matrix& W, const Matrix& H,
                                               const Matrix& W_ref, const Matrix& H_ref) {
  check_shape(W_ref, W.rows(), W.cols(), "W_ref");
  check_shape(H_ref, H.rows(), H.cols(), "H_ref");
  const double fw = (W - W_ref).norm() / static_cast<double>(W.size());
  const double fh = (H - H_ref).norm() / static_cast<double>(H.size());
  return {fw, fh};
}

// Peak signal-to-noise ratio in dB between a vectorized image and its
// reconstruction: 20 log10(F P / ||v - vhat||_2) with F the pixel count and P
// the peak pixel value. Note the F P numerator (not sqrt(F) P). Returns +inf
// when the two vectors are identical.
inline double psnr(const Vector& original, const Vector& reconstructed, double peak) {
  require(original.size() == reconstructed.size(), "psnr: length mismatch");
  require_domain(peak > 0.0, "psnr: peak must be > 0");
  const double err = (original - reconstructed).norm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(static_cast<double>(original.size()) * peak / err);
}

// Iterations where the cost increased beyond the relative slack. An empty
// list certifies a monotone run.
struct AuditReport {
  std::vector<std::pair<long, double>> violations;  // (iter, cost increase)
  bool monotone() const { return violations.empty(); }
};

inline AuditReport monotonicity_audit(const RunTrace& trace, double rel_slack = 1e-9) {
  AuditReport report;
  for (size_t i = 1; i < trace.records.size(); ++i) {
    const double prev = trace.records[i - 1].cost;
    const double cur = trace.records[i].cost;
    const double delta = cur - prev;
    // denormal-safe relative slack
    if (delta > rel_slack * (prev + std::numeric_limits<double>::min()))
      report.violations.emplace_back(trace.records[i].iter, delta);
  }
  return report;
}

namespace detail {

inline std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

}  // namespace detail

// CSV export: header iter,cost,kkt_w,kkt_h,fit_w,fit_h,wall_ms, one row per
// recorded iteration, 12 significant digits, empty cells where fit residuals
// were not checkpointed.
inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open trace file for writing: " + path);
  out << "iter,cost,kkt_w,kkt_h,fit_w,fit_h,wall_ms\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',' << detail::format_sig(r.cost, 12) << ','
        << detail::format_sig(r.kkt_w, 12) << ',' << detail::format_sig(r.kkt_h, 12) << ',';
    if (r.fit_w) out << detail::format_sig(*r.fit_w, 12);
    out << ',';
    if (r.fit_h) out << detail::format_sig(*r.fit_h, 12);
    out << ',' << detail::format_sig(r.wall_ms, 12) << '\n';
  }
}

}  // namespace betanmf
