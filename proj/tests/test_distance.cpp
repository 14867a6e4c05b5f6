#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "dsts/distance.hpp"
#include "dsts/error.hpp"
#include "dsts/linalg.hpp"
#include "support.hpp"

namespace {

using dsts::ErrorCode;
using dsts::GaussianStats;
using dsts::Matrix;
using dsts::testing::from_eigen;
using dsts::testing::to_eigen;

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const dsts::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dsts::Error thrown";
  return ErrorCode::kInvalidArgument;
}

GaussianStats stats_of(std::vector<double> mean, Matrix cov) {
  GaussianStats g;
  g.mean = std::move(mean);
  g.covariance = std::move(cov);
  g.sample_count = 10;
  return g;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

TEST(Cholesky, ReconstructsAndSolves) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {1, 2, 5, 8, 33}) {
    const Matrix a = dsts::testing::random_spd(n, rng);
    const dsts::Cholesky chol(a);
    const Eigen::MatrixXd l = to_eigen(chol.factor());
    EXPECT_LT((l * l.transpose() - to_eigen(a)).norm(), 1e-10 * to_eigen(a).norm());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) EXPECT_EQ(chol.factor()(i, j), 0.0);
    const auto b = random_vector(n, rng);
    const Eigen::VectorXd x = to_eigen(chol.solve(b));
    const Eigen::VectorXd ref = to_eigen(a).ldlt().solve(to_eigen(b));
    EXPECT_LT((x - ref).norm(), 1e-9 * (ref.norm() + 1.0));
  }
}

TEST(Cholesky, RejectsIndefinite) {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 0) = 2.0;
  a(0, 1) = 2.0;
  a(1, 1) = 1.0;
  EXPECT_EQ(error_code_of([&] { dsts::Cholesky c(a); }), ErrorCode::kFactorizationFailed);
  EXPECT_EQ(error_code_of([] { dsts::Cholesky c(Matrix(3, 3)); }), ErrorCode::kFactorizationFailed);
}

TEST(Cholesky, ConditionEstimateMatchesEigenvalues) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = dsts::testing::random_spd(12, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
    const double ref = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    const double est = dsts::condition_estimate(a, dsts::Cholesky(a), 500);
    EXPECT_NEAR(est / ref, 1.0, 1e-3);
  }
}

TEST(Regularize, ZeroCovarianceBecomesLambdaIdentity) {
  const auto g = dsts::regularize(stats_of({0, 0, 0}, Matrix(3, 3)), 1e-6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g.covariance(i, j), i == j ? 1e-6 : 0.0);
  EXPECT_NO_THROW(dsts::Cholesky c(g.covariance));
}

TEST(Regularize, ShiftsEigenvaluesByLambda) {
  std::mt19937_64 rng(3);
  const Matrix a = dsts::testing::random_spd(4, rng);
  const auto g = dsts::regularize(stats_of({0, 0, 0, 0}, a), 0.125);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> before(to_eigen(a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> after(to_eigen(g.covariance));
  for (int i = 0; i < 4; ++i)
    EXPECT_NEAR(after.eigenvalues()(i), before.eigenvalues()(i) + 0.125, 1e-12);
}

TEST(Regularize, RejectsNonPositiveLambda) {
  const auto g = stats_of({0}, Matrix::identity(1));
  EXPECT_EQ(error_code_of([&] { dsts::regularize(g, 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { dsts::regularize(g, -1.0); }), ErrorCode::kInvalidArgument);
}

TEST(Regularize, RankCollapseStillFails) {
  Matrix a(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = 1.0;
  EXPECT_EQ(error_code_of([&] { dsts::regularize(stats_of({0, 0}, a), 1e-6); }),
            ErrorCode::kFactorizationFailed);
}

TEST(Mahalanobis, ZeroAtMeanAndEuclideanForIdentity) {
  std::mt19937_64 rng(4);
  const auto outer = stats_of(random_vector(5, rng), dsts::testing::random_spd(5, rng));
  const auto inner = stats_of(random_vector(5, rng), dsts::testing::random_spd(5, rng));
  EXPECT_EQ(dsts::mahalanobis(outer, inner, outer.mean), 0.0);

  const auto eye = stats_of({0, 0}, Matrix::identity(2));
  const std::vector<double> sample{3, 4};
  EXPECT_NEAR(dsts::mahalanobis(eye, eye, sample), 5.0, 1e-12);
}

TEST(Mahalanobis, SolveMatchesExplicitInverse) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 1 + trial % 8;
    const auto outer = stats_of(random_vector(c, rng), dsts::testing::random_spd(c, rng));
    const auto inner = stats_of(random_vector(c, rng), dsts::testing::random_spd(c, rng));
    const auto x = random_vector(c, rng);
    const double d = dsts::mahalanobis(outer, inner, x);
    const Eigen::MatrixXd pooled = (to_eigen(outer.covariance) + to_eigen(inner.covariance)) / 2;
    const double ref = dsts::testing::oracle_mahalanobis(to_eigen(outer.mean), to_eigen(x), pooled);
    ASSERT_NEAR(d, ref, 1e-8 * ref) << "trial " << trial;
  }
}

TEST(Mahalanobis, AffineInvariance) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = 2 + trial % 5;
    const Eigen::MatrixXd sg = to_eigen(dsts::testing::random_spd(c, rng));
    const Eigen::MatrixXd sm = to_eigen(dsts::testing::random_spd(c, rng));
    const Eigen::VectorXd mu = to_eigen(random_vector(c, rng));
    const Eigen::VectorXd x = to_eigen(random_vector(c, rng));
    Eigen::MatrixXd t = to_eigen(dsts::testing::random_matrix(c, c, rng));
    t += 2.0 * Eigen::MatrixXd::Identity(c, c);
    const Eigen::VectorXd b = to_eigen(random_vector(c, rng));

    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    const dsts::PooledCovariance base(from_eigen(sg), from_eigen(sm));
    const dsts::PooledCovariance moved(from_eigen(t * sg * t.transpose()),
                                       from_eigen(t * sm * t.transpose()));
    const double d0 = base.distance(vec(mu), vec(x));
    const double d1 = moved.distance(vec(t * mu + b), vec(t * x + b));
    ASSERT_NEAR(d1, d0, 1e-8 * std::max(1.0, d0)) << "trial " << trial;
  }
}

TEST(Mahalanobis, RejectsBadSamples) {
  const auto eye = stats_of({0, 0}, Matrix::identity(2));
  const std::vector<double> three{1, 2, 3};
  EXPECT_EQ(error_code_of([&] { dsts::mahalanobis(eye, eye, three); }),
            ErrorCode::kDimensionMismatch);
  const std::vector<double> bad{1, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_EQ(error_code_of([&] { dsts::mahalanobis(eye, eye, bad); }), ErrorCode::kInvalidArgument);
  const auto big = stats_of({0, 0, 0}, Matrix::identity(3));
  const std::vector<double> two{0, 0};
  EXPECT_EQ(error_code_of([&] { dsts::mahalanobis(eye, big, two); }),
            ErrorCode::kDimensionMismatch);
}

dsts::SampleMatrix two_samples() {
  dsts::SampleMatrix s;
  s.rows = Matrix(2, 2);
  s.rows(0, 0) = 2.0;
  s.rows(1, 1) = 6.0;
  s.weights = {1.0, 3.0};
  return s;
}

TEST(DstsScore, WeightedMean) {
  const auto eye = stats_of({0, 0}, Matrix::identity(2));
  const auto s = two_samples();
  const auto q = dsts::dsts_score(eye, s, eye);
  EXPECT_NEAR(q.dsts, 5.0, 1e-12);
  EXPECT_NEAR(q.distances[0], 2.0, 1e-12);
  EXPECT_NEAR(q.distances[1], 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(q.weight_sum, 4.0);
  EXPECT_NEAR(dsts::dsts_score(eye, s, eye, dsts::WeightMode::kRaw).dsts, 20.0, 1e-12);
}

TEST(DstsScore, ZeroWeightsFallBackToMean) {
  const auto eye = stats_of({0, 0}, Matrix::identity(2));
  auto s = two_samples();
  s.weights = {0.0, 0.0};
  EXPECT_NEAR(dsts::dsts_score(eye, s, eye).dsts, 4.0, 1e-12);
}

TEST(DstsScore, SamplesAtMeanGiveZero) {
  std::mt19937_64 rng(7);
  const auto outer = stats_of(random_vector(3, rng), dsts::testing::random_spd(3, rng));
  dsts::SampleMatrix s;
  s.rows = Matrix(4, 3);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 3; ++c) s.rows(r, c) = outer.mean[c];
  s.weights = {1, 2, 3, 4};
  EXPECT_EQ(dsts::dsts_score(outer, s, outer).dsts, 0.0);
}

TEST(DstsScore, EmptyRejected) {
  const auto eye = stats_of({0, 0}, Matrix::identity(2));
  dsts::SampleMatrix s;
  s.rows = Matrix(0, 2);
  EXPECT_EQ(error_code_of([&] { dsts::dsts_score(eye, s, eye); }), ErrorCode::kEmptyResult);
}

TEST(DstsScore, ToyEndToEndOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix outer_rows = dsts::testing::random_matrix(12, 4, rng);
    dsts::SampleMatrix outer_samples;
    outer_samples.rows = outer_rows;
    dsts::SampleMatrix inner;
    inner.rows = dsts::testing::random_matrix(6, 4, rng);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    for (int i = 0; i < 6; ++i) inner.weights.push_back(w(rng));

    const double lambda = 1e-6;
    const auto outer = dsts::regularize(dsts::fit_gaussian(outer_samples), lambda);
    const auto inner_stats = dsts::regularize(dsts::fit_gaussian(inner), lambda);
    const auto ref_outer = dsts::testing::oracle_fit(outer_rows);
    for (bool normalized : {true, false}) {
      const auto mode = normalized ? dsts::WeightMode::kNormalized : dsts::WeightMode::kRaw;
      const double got = dsts::dsts_score(outer, inner, inner_stats, mode).dsts;
      const double ref =
          dsts::testing::oracle_dsts(ref_outer, inner.rows, inner.weights, lambda, normalized);
      ASSERT_NEAR(got, ref, 1e-10) << "trial " << trial;
    }
  }
}

TEST(DstsScore, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(9);
  dsts::SampleMatrix inner;
  inner.rows = dsts::testing::random_matrix(200, 16, rng);
  for (int i = 0; i < 200; ++i) inner.weights.push_back(0.01 * (i % 17));
  const auto outer = stats_of(random_vector(16, rng), dsts::testing::random_spd(16, rng));
  const auto inner_stats = dsts::regularize(dsts::fit_gaussian(inner), 1e-6);
  const auto one = dsts::dsts_score(outer, inner, inner_stats, dsts::WeightMode::kNormalized, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto many =
        dsts::dsts_score(outer, inner, inner_stats, dsts::WeightMode::kNormalized, threads);
    EXPECT_EQ(many.dsts, one.dsts);
    EXPECT_EQ(many.distances, one.distances);
  }
}

}  // namespace
