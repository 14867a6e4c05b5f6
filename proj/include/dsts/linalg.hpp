#pragma once

#include <span>
#include <vector>

#include "dsts/tensor.hpp"

namespace dsts {

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Only the lower triangle of the input is read.
class Cholesky {
 public:
  // Throws kFactorizationFailed when a pivot is not strictly positive or finite.
  explicit Cholesky(const Matrix& spd);

  std::size_t size() const noexcept { return factor_.rows(); }
  const Matrix& factor() const noexcept { return factor_; }

  // Solves L y = b.
  std::vector<double> forward_solve(std::span<const double> rhs) const;
  // Solves L^T x = y.
  std::vector<double> backward_solve(std::span<const double> rhs) const;
  // Solves A x = b.
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  Matrix factor_;
};

// 2-norm condition estimate of the factored matrix: power iteration for the
// largest eigenvalue, inverse iteration through the factor for the smallest.
double condition_estimate(const Matrix& spd, const Cholesky& chol, int iterations = 60);

}  // namespace dsts
