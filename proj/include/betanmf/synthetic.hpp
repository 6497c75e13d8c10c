// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include "betanmf/types.hpp"

namespace betanmf {

// Seeded generator with fully specified double derivation (mt19937_64 word
// stream + explicit conversions), so identical seeds reproduce identical
// matrices on any platform.
class SeededRng {
 public:
  explicit SeededRng(unsigned long long seed) : gen_(seed) {}

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (u1 kept away from 0)
  double normal() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // matrices are filled row by row
  Matrix abs_gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std::abs(normal());
    return m;
  }

  Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

 private:
  std::mt19937_64 gen_;
};

struct SyntheticProblem {
  Matrix V;       // F x N, exactly W_star * H_star
  Matrix W_star;  // F x K ground truth
  Matrix H_star;  // K x N ground truth
};

// Exactly factorizable test problem: ground-truth factors drawn as absolute
// values of standard Gaussians, V = W* H*.
inline SyntheticProblem gen_synthetic(Eigen::Index F, Eigen::Index N, Eigen::Index K,
                                      unsigned long long seed) {
  require(F >= 1 && N >= 1 && K >= 1, "gen_synthetic: dimensions must be >= 1");
  SeededRng rng(seed);
  SyntheticProblem out;
  out.W_star = rng.abs_gaussian_matrix(F, K);
  out.H_star = rng.abs_gaussian_matrix(K, N);
  out.V = out.W_star * out.H_star;
  return out;
}

// Binary observation mask: each entry is independently 0 (missing) with
// probability missing_fraction, 1 otherwise.
inline Matrix mask_gen(Eigen::Index F, Eigen::Index N, double missing_fraction,
                       unsigned long long seed) {
  require(missing_fraction >= 0.0 && missing_fraction <= 1.0,
          "mask_gen: missing fraction must lie in [0, 1]");
  SeededRng rng(seed);
  Matrix m(F, N);
  for (Eigen::Index i = 0; i < F; ++i)
    for (Eigen::Index j = 0; j < N; ++j) m(i, j) = rng.uniform() < missing_fraction ? 0.0 : 1.0;
  return m;
}

// Realized fraction of missing (zero) entries of a mask.
inline double missing_fraction(const Matrix& mask) {
  if (mask.size() == 0) return 0.0;
  return 1.0 - mask.sum() / static_cast<double>(mask.size());
}

}  // namespace betanmf
