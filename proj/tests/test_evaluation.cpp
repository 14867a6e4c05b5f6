#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dsts/error.hpp"
#include "dsts/evaluation.hpp"
#include "dsts/pipeline.hpp"
#include "support.hpp"

namespace {

using dsts::ErrorCode;

template <typename F>
ErrorCode error_code_of(F&& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const dsts::Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no dsts::Error thrown";
  return ErrorCode::kInvalidArgument;
}

double map_rmse(const dsts::LogisticParams& p, const std::vector<double>& x,
                const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (p(x[i]) - y[i]) * (p(x[i]) - y[i]);
  return std::sqrt(s / static_cast<double>(x.size()));
}

TEST(Logistic, RecoversNoiselessMap) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const std::vector<dsts::LogisticParams> truths{
      {{4.0, 1.2, 5.0, 0.1, 2.0}}, {{-3.0, 0.8, 4.0, 0.0, 1.0}}, {{60.0, 0.5, 6.0, -0.5, 30.0}},
      {{1.0, 2.0, 3.0, 0.0, 0.0}}};  // steep and off-centre
  for (const auto& truth : truths) {
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      x[i] = u(rng);
      y[i] = truth(x[i]);
    }
    const auto fit = dsts::logistic_fit(x, y);
    EXPECT_LT(map_rmse(fit.params, x, y), 1e-6);
  }
}

TEST(Logistic, AffineDataIsExact) {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.3 * i - 2.0);
    y.push_back(2.0 * x.back() + 1.0);
  }
  const auto fit = dsts::logistic_fit(x, y);
  EXPECT_LT(dsts::rmse(x, y, fit.params), 1e-8);
}

TEST(Logistic, HistoryIsMonotone) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(40), y(40);
    for (std::size_t i = 0; i < 40; ++i) {
      x[i] = 0.25 * static_cast<double>(i);
      y[i] = 3.0 / (1.0 + std::exp(-(x[i] - 5.0))) + noise(rng);
    }
    const auto fit = dsts::logistic_fit(x, y);
    ASSERT_FALSE(fit.rmse_history.empty());
    for (std::size_t i = 1; i < fit.rmse_history.size(); ++i)
      EXPECT_LE(fit.rmse_history[i], fit.rmse_history[i - 1]);
  }
}

TEST(Logistic, RejectsConstantAndShortInput) {
  const std::vector<double> flat(10, 1.0);
  std::vector<double> y(10);
  for (int i = 0; i < 10; ++i) y[i] = i;
  EXPECT_EQ(error_code_of([&] { dsts::logistic_fit(flat, y); }), ErrorCode::kConstantInput);
  const std::vector<double> four{1, 2, 3, 4};
  EXPECT_EQ(error_code_of([&] { dsts::logistic_fit(four, four); }), ErrorCode::kInvalidArgument);
}

TEST(Srcc, PerfectOrders) {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  EXPECT_DOUBLE_EQ(dsts::srcc(x, x), 1.0);
  EXPECT_DOUBLE_EQ(dsts::srcc(x, neg), -1.0);
}

TEST(Srcc, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coarse(0, 6);
  std::normal_distribution<double> fine;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(20), y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      x[i] = trial % 2 ? coarse(rng) : fine(rng);
      y[i] = trial % 3 ? coarse(rng) : fine(rng);
    }
    ASSERT_NEAR(dsts::srcc(x, y), dsts::testing::oracle_srcc(x, y), 1e-12);
  }
}

TEST(Srcc, AverageRanks) {
  const std::vector<double> v{10, 20, 20, 5, 20};
  EXPECT_EQ(dsts::average_ranks(v), (std::vector<double>{2, 4, 4, 1, 4}));
}

TEST(Srcc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d;
  std::vector<double> x(30), y(30), ex(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = d(rng);
    y[i] = x[i] + d(rng);
    ex[i] = std::exp(3.0 * x[i]);
  }
  EXPECT_NEAR(dsts::srcc(ex, y), dsts::srcc(x, y), 1e-15);
}

TEST(Srcc, Errors) {
  const std::vector<double> three{1, 2, 3};
  const std::vector<double> four{1, 2, 3, 4};
  EXPECT_EQ(error_code_of([&] { dsts::srcc(three, three); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { dsts::srcc(three, four); }), ErrorCode::kDimensionMismatch);
}

TEST(Plcc, FitNeverWorseThanRawPearson) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 8 + trial % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = d(rng);
      y[i] = (trial % 3 == 0 ? -1.0 : 0.5) * x[i] + (trial % 5) * d(rng);
    }
    const auto fit = dsts::logistic_fit(x, y);
    ASSERT_GE(dsts::plcc(x, y, fit.params), std::abs(dsts::pearson(x, y)) - 1e-9)
        << "trial " << trial;
  }
}

TEST(Pearson, ConstantRejected) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> c{2, 2, 2, 2};
  EXPECT_EQ(error_code_of([&] { dsts::pearson(x, c); }), ErrorCode::kConstantInput);
}

TEST(Evaluate, LowerBetterAntiCorrelationGivesPositiveSrcc) {
  dsts::ScoredSet set;
  for (int i = 0; i < 12; ++i)
    set.items.push_back({"img" + std::to_string(i), 10.0 - i * 0.7, 1.0 + i * 0.3});
  const auto report = dsts::evaluate(set);
  EXPECT_DOUBLE_EQ(report.srcc, 1.0);
  EXPECT_EQ(report.count, 12u);
  EXPECT_GT(report.plcc, 0.999);

  set.direction = dsts::ScoreDirection::kHigherBetter;
  for (auto& item : set.items) item.score = -item.score;
  EXPECT_DOUBLE_EQ(std::abs(dsts::evaluate(set).srcc), 1.0);
}

TEST(JoinById, PairsAndReportsMissing) {
  const std::vector<std::pair<std::string, double>> scores{{"a", 1}, {"b", 2}, {"c", 3}};
  const std::vector<std::pair<std::string, double>> mos{{"c", 30}, {"a", 10}, {"b", 20}};
  const auto set = dsts::join_by_id(scores, mos, dsts::ScoreDirection::kLowerBetter);
  ASSERT_EQ(set.items.size(), 3u);
  for (const auto& item : set.items) EXPECT_DOUBLE_EQ(item.subjective, item.score * 10.0);

  const std::vector<std::pair<std::string, double>> partial{{"a", 10}, {"zz", 5}};
  std::string message;
  EXPECT_EQ(error_code_of([&] { dsts::join_by_id(scores, partial, dsts::ScoreDirection::kLowerBetter); },
                          &message),
            ErrorCode::kIdMismatch);
  EXPECT_NE(message.find("zz"), std::string::npos) << message;
  EXPECT_NE(message.find("b"), std::string::npos) << message;
}

TEST(Ratings, GroupingAndTopCount) {
  std::vector<std::tuple<std::string, std::string, int>> rows{
      {"s2", "x", 5}, {"s1", "a", 5}, {"s1", "b", 3}, {"s2", "y", 4}, {"s1", "c", 5}};
  const auto groups = dsts::group_ratings(rows);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].subject, "s1");
  EXPECT_EQ(groups[0].top_rated_count(), 2u);
  EXPECT_EQ(groups[1].top_rated_count(), 1u);
  rows.emplace_back("s3", "z", 6);
  EXPECT_EQ(error_code_of([&] { dsts::group_ratings(rows); }), ErrorCode::kInvalidArgument);
}

TEST(Ratings, SampleIndicesDeterministicAndDistinct) {
  const auto a = dsts::sample_indices(40, 10, 99);
  EXPECT_EQ(a, dsts::sample_indices(40, 10, 99));
  EXPECT_NE(a, dsts::sample_indices(40, 10, 100));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 10u);
  for (std::size_t i : a) EXPECT_LT(i, 40u);
}

TEST(Personalize, NineTopRatedRejected) {
  dsts::SubjectRatings r;
  r.subject = "s";
  for (int i = 0; i < 9; ++i) r.ratings.emplace_back("top" + std::to_string(i), 5);
  for (int i = 0; i < 20; ++i) r.ratings.emplace_back("other" + std::to_string(i), 2);
  bool store_called = false;
  auto store = [&](const std::string&) -> dsts::RgbImage {
    store_called = true;
    return {};
  };
  const auto pipeline = dsts::Pipeline::from_config(dsts::EngineConfig{});
  EXPECT_EQ(error_code_of([&] { dsts::personalize(r, store, pipeline, 1); }),
            ErrorCode::kInsufficientRatings);
  EXPECT_FALSE(store_called);
}

TEST(Cohort, MeanAndSampleStd) {
  std::vector<dsts::SubjectReport> reports(4);
  reports[0].subject = "a";
  reports[0].srcc = 0.2;
  reports[1].subject = "b";
  reports[1].srcc = 0.4;
  reports[2].subject = "c";
  reports[2].srcc = 0.6;
  reports[3].subject = "flat";
  const auto summary = dsts::aggregate_cohort(reports);
  EXPECT_EQ(summary.included, 3u);
  EXPECT_EQ(summary.excluded, std::vector<std::string>{"flat"});
  EXPECT_NEAR(summary.mean_srcc, 0.4, 1e-15);
  EXPECT_NEAR(summary.std_srcc, 0.2, 1e-15);
}

}  // namespace
