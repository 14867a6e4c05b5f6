#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dsts/image.hpp"
#include "dsts/statistics.hpp"

namespace dsts {

class Pipeline;

// f(x) = a1 * (1/2 - 1 / (1 + exp(a2 (x - a3)))) + a4 x + a5
struct LogisticParams {
  std::array<double, 5> a{};

  double operator()(double x) const;
};

struct LogisticFit {
  LogisticParams params;
  bool converged = false;
  int iterations = 0;
  // RMSE after the initial guess and after every accepted step; non-increasing.
  std::vector<double> rmse_history;
};

// Damped Gauss-Newton (Levenberg-Marquardt) least squares, run from a small grid
// of starting centres and slopes; the best run is kept. A run stops when an
// accepted step changes the residual by less than 1e-10 relative, or after 500
// iterations (converged = false, best parameters returned). Throws
// kInvalidArgument for n < 5 or mismatched lengths, kConstantInput for constant x.
LogisticFit logistic_fit(std::span<const double> x, std::span<const double> y);

// Throws kConstantInput if either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks for ties, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman correlation; kDimensionMismatch on length mismatch, kInvalidArgument for n < 4.
double srcc(std::span<const double> x, std::span<const double> y);
double plcc(std::span<const double> x, std::span<const double> y, const LogisticParams& params);
double rmse(std::span<const double> x, std::span<const double> y, const LogisticParams& params);

enum class ScoreDirection { kHigherBetter, kLowerBetter };

struct ScoredItem {
  std::string id;
  double score = 0.0;
  double subjective = 0.0;
};

struct ScoredSet {
  std::vector<ScoredItem> items;
  ScoreDirection direction = ScoreDirection::kLowerBetter;
};

struct EvaluationReport {
  std::size_t count = 0;
  double plcc = 0.0;
  double srcc = 0.0;
  double rmse = 0.0;
  LogisticFit fit;
};

// SRCC is taken against the direction-corrected score; the logistic map
// absorbs orientation for PLCC and RMSE.
EvaluationReport evaluate(const ScoredSet& set);

// Pairs predicted scores with subjective ones by id. Throws kIdMismatch listing
// ids missing on either side.
ScoredSet join_by_id(const std::vector<std::pair<std::string, double>>& scores,
                     const std::vector<std::pair<std::string, double>>& subjective,
                     ScoreDirection direction);

inline constexpr int kTopRating = 5;
inline constexpr std::size_t kMinTopRated = 10;
inline constexpr std::size_t kPersonalTestCount = 10;

struct SubjectRatings {
  std::string subject;
  std::vector<std::pair<std::string, int>> ratings;  // (image id, 1..5)

  std::size_t top_rated_count() const;
};

// Groups `subject_id,image_id,rating` triples by subject (sorted by subject id).
std::vector<SubjectRatings> group_ratings(
    const std::vector<std::tuple<std::string, std::string, int>>& rows);

struct SubjectReport {
  std::string subject;
  std::size_t top_rated = 0;
  std::vector<std::string> test_ids;
  std::vector<int> test_ratings;
  std::vector<double> test_scores;
  std::optional<double> srcc;  // empty when the test ratings are constant
  std::string note;
};

struct PersonalizedResult {
  GaussianStats outer;
  SubjectReport report;
};

// Deterministic choice of `count` indices from [0, n) (partial Fisher-Yates on mt19937_64).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

// Outer statistics from the subject's top-rated images, then DSTS on
// kPersonalTestCount of their other images, compared by SRCC against the
// ratings (scores negated: lower DSTS is better). Throws kInsufficientRatings
// when fewer than 10 top-rated or 10 other images exist.
PersonalizedResult personalize(const SubjectRatings& ratings,
                               const std::function<RgbImage(const std::string&)>& image_store,
                               const Pipeline& pipeline, std::uint64_t seed);

struct CohortSummary {
  std::size_t included = 0;
  std::vector<std::string> excluded;
  double mean_srcc = 0.0;
  double std_srcc = 0.0;  // sample standard deviation (n - 1)
};

CohortSummary aggregate_cohort(const std::vector<SubjectReport>& reports);

}  // namespace dsts
