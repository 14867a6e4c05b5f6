#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the engine's numerical code; dense algebra goes through Eigen.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsts/image.hpp"
#include "dsts/tensor.hpp"

namespace dsts::testing {

Tensor random_tensor(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng,
                     double lo = -1.0, double hi = 1.0);
Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
// B B^T + 0.1 I for Gaussian B.
Matrix random_spd(std::size_t n, std::mt19937_64& rng);

Eigen::MatrixXd to_eigen(const Matrix& m);
Eigen::VectorXd to_eigen(std::span<const double> v);
Matrix from_eigen(const Eigen::MatrixXd& m);

// Normalized Gaussian over [-K,K] x [-L,L].
std::vector<std::vector<double>> oracle_window(int half_rows, int half_cols, double sigma);

// Windowed sums with explicit mirror padding, returned as (mean, deviation).
std::pair<Tensor, Tensor> oracle_local_moments(const Tensor& x, int half_rows, int half_cols,
                                               double sigma);

struct OracleGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Column mean and (X - 1 mu^T)^T (X - 1 mu^T) / (n - 1).
OracleGaussian oracle_fit(const Matrix& rows);

// sqrt(d^T inv(pooled) d) with an explicit inverse.
double oracle_mahalanobis(const Eigen::VectorXd& mean, const Eigen::VectorXd& sample,
                          const Eigen::MatrixXd& pooled);

// Weighted DSTS with every quantity recomputed from scratch: inner Gaussian
// from `inner_rows`, lambda on both covariances, explicit pooled inverse.
double oracle_dsts(const OracleGaussian& outer, const Matrix& inner_rows,
                   std::span<const double> weights, double lambda, bool normalize_weights);

// Rank by counting (ties get the average position), then Pearson on ranks.
double oracle_srcc(std::span<const double> x, std::span<const double> y);

// Scoped scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dsts::testing
