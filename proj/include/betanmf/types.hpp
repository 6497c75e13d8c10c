// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace betanmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Floor applied to reconstruction entries and denominator statistics before
// powers with negative exponents. Overridable per run (ProblemSpec::eps_floor,
// env BETA_NMF_EPS_FLOOR in the CLI).
inline constexpr double kDefaultEpsFloor = 1e-12;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_domain(bool cond, const std::string& msg) {
  if (!cond) throw std::domain_error(msg);
}

inline void check_nonneg(const Matrix& m, const std::string& name) {
  if (m.size() > 0 && m.minCoeff() < 0.0)
    throw std::domain_error(name + " must be entrywise nonnegative");
}

inline void check_positive(const Matrix& m, const std::string& name) {
  if (m.size() == 0 || m.minCoeff() <= 0.0)
    throw std::domain_error(name + " must be entrywise positive");
}

inline void check_binary(const Matrix& m, const std::string& name) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (v != 0.0 && v != 1.0)
        throw std::domain_error(name + " must contain only 0/1 entries");
    }
}

inline void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                        const std::string& name) {
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument(name + " has shape " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                                "x" + std::to_string(cols));
}

}  // namespace betanmf
