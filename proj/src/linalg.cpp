#include "dsts/linalg.hpp"

#include <cmath>
#include <string>

#include "dsts/error.hpp"
#include "dsts/simd/kernels.hpp"

namespace dsts {

Cholesky::Cholesky(const Matrix& spd) : factor_(spd.rows(), spd.cols()) {
  const std::size_t n = spd.rows();
  if (spd.cols() != n) throw Error(ErrorCode::kDimensionMismatch, "Cholesky needs a square matrix");
  // Row-oriented (Cholesky-Crout): every update is a dot of two row prefixes.
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = factor_.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const auto lj = factor_.row(j);
      const double s = simd::dot(li.first(j), lj.first(j));
      li[j] = (spd(i, j) - s) / lj[j];
    }
    const double d = spd(i, i) - simd::dot(li.first(i), li.first(i));
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kFactorizationFailed,
                  "matrix is not positive definite (pivot " + std::to_string(i) + ")");
    }
    li[i] = std::sqrt(d);
  }
}

std::vector<double> Cholesky::forward_solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw Error(ErrorCode::kDimensionMismatch, "right-hand side length");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = factor_.row(i);
    y[i] = (rhs[i] - simd::dot(li.first(i), std::span<const double>(y).first(i))) / li[i];
  }
  return y;
}

std::vector<double> Cholesky::backward_solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw Error(ErrorCode::kDimensionMismatch, "right-hand side length");
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = n; i-- > 0;) {
    x[i] /= factor_(i, i);
    // Column i of L above the diagonal is row i of L^T; scatter into earlier unknowns.
    const auto li = factor_.row(i);
    simd::axpy(-x[i], li.first(i), std::span<double>(x).first(i));
  }
  return x;
}

std::vector<double> Cholesky::solve(std::span<const double> rhs) const {
  return backward_solve(forward_solve(rhs));
}

namespace {

double normalize(std::vector<double>& v) {
  const double norm = std::sqrt(simd::dot(v, v));
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return norm;
}

std::vector<double> multiply(const Matrix& a, const std::vector<double>& v) {
  std::vector<double> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = simd::dot(a.row(i), v);
  return out;
}

}  // namespace

double condition_estimate(const Matrix& spd, const Cholesky& chol, int iterations) {
  const std::size_t n = spd.rows();
  if (n == 0) return 1.0;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  normalize(v);
  double largest = 0.0;
  std::vector<double> u = v;
  for (int it = 0; it < iterations; ++it) {
    u = multiply(spd, u);
    largest = normalize(u);
  }
  double inverse_largest = 0.0;
  u = v;
  for (int it = 0; it < iterations; ++it) {
    u = chol.solve(u);
    inverse_largest = normalize(u);
  }
  return largest * inverse_largest;
}

}  // namespace dsts
