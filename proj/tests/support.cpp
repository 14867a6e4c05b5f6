#include "support.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace dsts::testing {

Tensor random_tensor(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng,
                     double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(c, h, w);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

Matrix random_spd(std::size_t n, std::mt19937_64& rng) {
  const Eigen::MatrixXd b = to_eigen(random_matrix(n, n, rng));
  return from_eigen(b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n));
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

std::vector<std::vector<double>> oracle_window(int half_rows, int half_cols, double sigma) {
  std::vector<std::vector<double>> w(2 * half_rows + 1, std::vector<double>(2 * half_cols + 1));
  double total = 0.0;
  for (int k = -half_rows; k <= half_rows; ++k)
    for (int l = -half_cols; l <= half_cols; ++l) {
      const double v = std::exp(-(k * k + l * l) / (2.0 * sigma * sigma));
      w[k + half_rows][l + half_cols] = v;
      total += v;
    }
  for (auto& row : w)
    for (double& v : row) v /= total;
  return w;
}

namespace {

long mirror(long i, long n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

std::pair<Tensor, Tensor> oracle_local_moments(const Tensor& x, int half_rows, int half_cols,
                                               double sigma) {
  const auto w = oracle_window(half_rows, half_cols, sigma);
  const long h = static_cast<long>(x.height());
  const long wd = static_cast<long>(x.width());
  Tensor mean(x.channels(), x.height(), x.width());
  Tensor dev(x.channels(), x.height(), x.width());
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (long y = 0; y < h; ++y)
      for (long q = 0; q < wd; ++q) {
        double mu = 0.0;
        for (int k = -half_rows; k <= half_rows; ++k)
          for (int l = -half_cols; l <= half_cols; ++l)
            mu += w[k + half_rows][l + half_cols] * x(c, mirror(y + k, h), mirror(q + l, wd));
        double var = 0.0;
        for (int k = -half_rows; k <= half_rows; ++k)
          for (int l = -half_cols; l <= half_cols; ++l) {
            const double d = x(c, mirror(y + k, h), mirror(q + l, wd)) - mu;
            var += w[k + half_rows][l + half_cols] * d * d;
          }
        mean(c, y, q) = mu;
        dev(c, y, q) = std::sqrt(var);
      }
  return {mean, dev};
}

OracleGaussian oracle_fit(const Matrix& rows) {
  const Eigen::MatrixXd x = to_eigen(rows);
  OracleGaussian g;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  return g;
}

double oracle_mahalanobis(const Eigen::VectorXd& mean, const Eigen::VectorXd& sample,
                          const Eigen::MatrixXd& pooled) {
  const Eigen::VectorXd d = mean - sample;
  return std::sqrt(d.dot(pooled.inverse() * d));
}

double oracle_dsts(const OracleGaussian& outer, const Matrix& inner_rows,
                   std::span<const double> weights, double lambda, bool normalize_weights) {
  const OracleGaussian inner = oracle_fit(inner_rows);
  const auto n = outer.mean.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd pooled = ((outer.cov + lambda * eye) + (inner.cov + lambda * eye)) / 2.0;
  const Eigen::MatrixXd inv = pooled.inverse();
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;
  double total = 0.0;
  for (std::size_t i = 0; i < inner_rows.rows(); ++i) {
    const Eigen::VectorXd d = outer.mean - to_eigen(inner_rows.row(i));
    const double dist = std::sqrt(d.dot(inv * d));
    if (weight_sum == 0.0) {
      total += dist / static_cast<double>(inner_rows.rows());
    } else {
      total += (normalize_weights ? weights[i] / weight_sum : weights[i]) * dist;
    }
  }
  return total;
}

double oracle_srcc(std::span<const double> x, std::span<const double> y) {
  auto ranks = [](std::span<const double> v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0.0;
      double equal = 0.0;
      for (double other : v) {
        if (other < v[i]) less += 1.0;
        if (other == v[i]) equal += 1.0;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const Eigen::VectorXd rx = to_eigen(ranks(x));
  const Eigen::VectorXd ry = to_eigen(ranks(y));
  const Eigen::VectorXd cx = rx.array() - rx.mean();
  const Eigen::VectorXd cy = ry.array() - ry.mean();
  return cx.dot(cy) / std::sqrt(cx.squaredNorm() * cy.squaredNorm());
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("dsts_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace dsts::testing
