// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "betanmf/betanmf.hpp"

namespace testsupport {

using betanmf::BetaParams;
using betanmf::Matrix;
using betanmf::Vector;

// central finite difference of a scalar function
inline double central_diff(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

// Auxiliary function G(h|ht) for the vector subproblem C(h) = sum_f d(v_f |
// [W h]_f), assembled from the convex-concave-constant parts:
//   G = sum_f [ sum_k (w_fk ht_k / vt_f) convex(v_f | vt_f h_k / ht_k) ]
//     + [ concave'(v_f|vt_f) sum_k w_fk (h_k - ht_k) + concave(v_f|vt_f) ]
//     + constant(v_f).
// Kept independent of the update kernels on purpose: it is the oracle they
// are checked against.
inline double aux_function(const Vector& v, const Matrix& W, const Vector& h, const Vector& ht,
                           const BetaParams& p) {
  const Eigen::Index F = W.rows(), K = W.cols();
  const Vector vt = W * ht;
  double total = 0.0;
  for (Eigen::Index f = 0; f < F; ++f) {
    const auto parts_t = betanmf::decompose(v(f), vt(f), p);
    double convex_sum = 0.0;
    double step_sum = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (W(f, k) != 0.0)
        convex_sum += W(f, k) * ht(k) / vt(f) *
                      betanmf::decompose(v(f), vt(f) * h(k) / ht(k), p).convex_val;
      step_sum += W(f, k) * (h(k) - ht(k));
    }
    total += convex_sum + parts_t.concave_deriv * step_sum + parts_t.concave_val +
             parts_t.constant_val;
  }
  return total;
}

// C(h) = D(v | W h) for the vector subproblem, via the scalar kernel.
inline double vector_cost(const Vector& v, const Matrix& W, const Vector& h,
                          const BetaParams& p) {
  const Vector vt = W * h;
  double total = 0.0;
  for (Eigen::Index f = 0; f < v.size(); ++f)
    total += betanmf::beta_divergence(v(f), vt(f), p);
  return total;
}

// rows of a trace CSV with the wall_ms column stripped (wall time is the one
// nondeterministic column)
inline std::vector<std::string> trace_rows_without_wall(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    rows.push_back(line.substr(0, cut));
  }
  return rows;
}

}  // namespace testsupport
