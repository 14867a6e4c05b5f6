#include "dsts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dsts/error.hpp"
#include "dsts/linalg.hpp"
#include "dsts/pipeline.hpp"

namespace dsts {
namespace {

constexpr int kMaxIterations = 500;
constexpr double kRelativeTolerance = 1e-10;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sum_squared_error(const LogisticParams& p, std::span<const double> x,
                         std::span<const double> y) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = p(x[i]) - y[i];
    sse += r * r;
  }
  return sse;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Least squares over the given design columns; nullopt if the normal matrix is singular.
std::optional<std::vector<double>> linear_least_squares(const std::vector<std::vector<double>>& cols,
                                                        std::span<const double> y) {
  const std::size_t k = cols.size();
  Matrix normal(k, k);
  std::vector<double> rhs(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += cols[a][i] * cols[b][i];
      normal(a, b) = s;
    }
    for (std::size_t i = 0; i < y.size(); ++i) rhs[a] += cols[a][i] * y[i];
  }
  try {
    return Cholesky(normal).solve(rhs);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "score vectors differ in length");
  }
  if (x.size() < min_n) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least " + std::to_string(min_n) + " pairs, got " + std::to_string(x.size()));
  }
}

}  // namespace

double LogisticParams::operator()(double x) const {
  return a[0] * (logistic(a[1] * (x - a[2])) - 0.5) + a[3] * x + a[4];
}

namespace {

// Levenberg-Marquardt from fit.params until the relative SSE drop stalls.
double refine(LogisticFit& fit, std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  LogisticParams& p = fit.params;
  double sse = sum_squared_error(p, x, y);
  const auto record = [&] { fit.rmse_history.push_back(std::sqrt(sse / static_cast<double>(n))); };
  record();

  double damping = 1e-3;
  std::vector<std::array<double, 5>> jac(n);
  std::vector<double> residual(n);
  bool stalled = false;
  while (fit.iterations < kMaxIterations && sse > 0.0 && !stalled) {
    ++fit.iterations;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = logistic(p.a[1] * (x[i] - p.a[2]));
      const double ds = s * (1.0 - s);
      jac[i] = {s - 0.5, p.a[0] * ds * (x[i] - p.a[2]), -p.a[0] * ds * p.a[1], x[i], 1.0};
      residual[i] = p(x[i]) - y[i];
    }
    Matrix normal(5, 5);
    std::array<double, 5> grad{};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < 5; ++a) {
        grad[a] += jac[i][a] * residual[i];
        for (std::size_t b = 0; b < 5; ++b) normal(a, b) += jac[i][a] * jac[i][b];
      }
    }

    bool accepted = false;
    while (!accepted) {
      Matrix damped = normal;
      for (std::size_t a = 0; a < 5; ++a) damped(a, a) += damping * std::max(normal(a, a), 1e-12);
      std::vector<double> step;
      try {
        step = Cholesky(damped).solve(grad);
      } catch (const Error&) {
        damping *= 4.0;
        if (damping > 1e20) break;
        continue;
      }
      LogisticParams trial = p;
      for (std::size_t a = 0; a < 5; ++a) trial.a[a] -= step[a];
      const double trial_sse = sum_squared_error(trial, x, y);
      if (std::isfinite(trial_sse) && trial_sse < sse) {
        const double relative = (sse - trial_sse) / sse;
        p = trial;
        sse = trial_sse;
        record();
        damping = std::max(damping / 3.0, 1e-15);
        accepted = true;
        if (relative < kRelativeTolerance) fit.converged = true;
      } else {
        damping *= 4.0;
        if (damping > 1e20) break;
      }
    }
    if (!accepted) stalled = true;
    if (fit.converged) break;
  }
  if (stalled || sse == 0.0) fit.converged = true;
  return sse;
}

}  // namespace

LogisticFit logistic_fit(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 5);
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) throw Error(ErrorCode::kConstantInput, "predicted scores are constant");

  const std::size_t n = x.size();
  const double xmean = mean_of(x);
  double xvar = 0.0;
  for (double v : x) xvar += (v - xmean) * (v - xmean);
  const double xstd = std::sqrt(xvar / static_cast<double>(n));
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  double direction = 1.0;
  if (*ymin != *ymax && pearson(x, y) < 0.0) direction = -1.0;

  // The sigmoid centre and slope have many poor basins; start from a grid of
  // centres at x quantiles and a few slopes, keep the best.
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> centres{xmean};
  for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) centres.push_back(sorted[static_cast<std::size_t>(q * (n - 1))]);

  LogisticFit fit;
  double sse = std::numeric_limits<double>::infinity();
  for (double centre : centres) {
    for (double slope : {4.0, 1.0, 16.0}) {
      LogisticFit candidate;
      candidate.params.a = {*ymax - *ymin, direction * slope / xstd, centre, 0.0, *ymin};
      const double candidate_sse = refine(candidate, x, y);
      if (candidate_sse < sse) {
        sse = candidate_sse;
        fit = std::move(candidate);
      }
      if (sse == 0.0) break;
    }
    if (sse == 0.0) break;
  }
  LogisticParams& p = fit.params;
  const auto record = [&] { fit.rmse_history.push_back(std::sqrt(sse / static_cast<double>(n))); };

  // a1, a4 and a5 enter linearly: solve them exactly for the fitted a2, a3, and
  // keep the plain affine map if it does better.
  std::vector<double> g(n), ones(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) g[i] = logistic(p.a[1] * (x[i] - p.a[2])) - 0.5;
  const std::vector<double> xs(x.begin(), x.end());
  if (auto sol = linear_least_squares({g, xs, ones}, y)) {
    LogisticParams polished = p;
    polished.a[0] = (*sol)[0];
    polished.a[3] = (*sol)[1];
    polished.a[4] = (*sol)[2];
    const double polished_sse = sum_squared_error(polished, x, y);
    if (polished_sse < sse) {
      p = polished;
      sse = polished_sse;
      record();
    }
  }
  if (auto sol = linear_least_squares({xs, ones}, y)) {
    LogisticParams affine = p;
    affine.a[0] = 0.0;
    affine.a[3] = (*sol)[0];
    affine.a[4] = (*sol)[1];
    const double affine_sse = sum_squared_error(affine, x, y);
    if (affine_sse < sse) {
      p = affine;
      sse = affine_sse;
      record();
    }
  }
  return fit;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kConstantInput, "correlation undefined for a constant vector");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double srcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 4);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double plcc(std::span<const double> x, std::span<const double> y, const LogisticParams& params) {
  check_pair(x, y, 4);
  std::vector<double> mapped(x.size());
  std::transform(x.begin(), x.end(), mapped.begin(), [&](double v) { return params(v); });
  return pearson(mapped, y);
}

double rmse(std::span<const double> x, std::span<const double> y, const LogisticParams& params) {
  check_pair(x, y, 4);
  return std::sqrt(sum_squared_error(params, x, y) / static_cast<double>(x.size()));
}

EvaluationReport evaluate(const ScoredSet& set) {
  std::set<std::string> seen;
  std::vector<double> x, y;
  for (const ScoredItem& item : set.items) {
    if (!seen.insert(item.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate image id '" + item.id + "'");
    }
    if (!std::isfinite(item.score) || !std::isfinite(item.subjective)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite value for '" + item.id + "'");
    }
    x.push_back(item.score);
    y.push_back(item.subjective);
  }
  EvaluationReport report;
  report.count = x.size();
  std::vector<double> oriented = x;
  if (set.direction == ScoreDirection::kLowerBetter) {
    for (double& v : oriented) v = -v;
  }
  report.srcc = srcc(oriented, y);
  report.fit = logistic_fit(x, y);
  report.plcc = plcc(x, y, report.fit.params);
  report.rmse = rmse(x, y, report.fit.params);
  return report;
}

ScoredSet join_by_id(const std::vector<std::pair<std::string, double>>& scores,
                     const std::vector<std::pair<std::string, double>>& subjective,
                     ScoreDirection direction) {
  std::map<std::string, double> targets;
  for (const auto& [id, v] : subjective) targets[id] = v;
  std::set<std::string> scored;
  std::vector<std::string> missing;
  ScoredSet set;
  set.direction = direction;
  for (const auto& [id, v] : scores) {
    scored.insert(id);
    const auto it = targets.find(id);
    if (it == targets.end()) {
      missing.push_back(id + " (no subjective score)");
      continue;
    }
    set.items.push_back({id, v, it->second});
  }
  for (const auto& [id, v] : subjective) {
    if (!scored.count(id)) missing.push_back(id + " (no predicted score)");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kIdMismatch, list);
  }
  return set;
}

std::size_t SubjectRatings::top_rated_count() const {
  return static_cast<std::size_t>(std::count_if(
      ratings.begin(), ratings.end(), [](const auto& r) { return r.second == kTopRating; }));
}

std::vector<SubjectRatings> group_ratings(
    const std::vector<std::tuple<std::string, std::string, int>>& rows) {
  std::map<std::string, SubjectRatings> by_subject;
  for (const auto& [subject, image, rating] : rows) {
    if (rating < 1 || rating > kTopRating) {
      throw Error(ErrorCode::kInvalidArgument, "rating " + std::to_string(rating) + " for '" +
                                                   image + "' is outside 1..5");
    }
    auto& entry = by_subject[subject];
    entry.subject = subject;
    entry.ratings.emplace_back(image, rating);
  }
  std::vector<SubjectRatings> out;
  for (auto& [_, entry] : by_subject) out.push_back(std::move(entry));
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 engine(seed);
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(engine() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

PersonalizedResult personalize(const SubjectRatings& ratings,
                               const std::function<RgbImage(const std::string&)>& image_store,
                               const Pipeline& pipeline, std::uint64_t seed) {
  std::vector<std::string> top;
  std::vector<std::pair<std::string, int>> others;
  for (const auto& [id, rating] : ratings.ratings) {
    if (rating == kTopRating) top.push_back(id);
    else others.emplace_back(id, rating);
  }
  if (top.size() < kMinTopRated) {
    throw Error(ErrorCode::kInsufficientRatings,
                "subject '" + ratings.subject + "' has M=" + std::to_string(top.size()) +
                    " top-rated images; personalization needs M >= 10");
  }
  if (others.size() < kPersonalTestCount) {
    throw Error(ErrorCode::kInsufficientRatings,
                "subject '" + ratings.subject + "' has only " + std::to_string(others.size()) +
                    " other rated images; the test set needs 10");
  }

  PersonalizedResult result;
  SubjectReport& report = result.report;
  report.subject = ratings.subject;
  report.top_rated = top.size();

  const OuterCorpus corpus = pipeline.collect_outer_samples(
      top.size(), [&](std::size_t i) { return image_store(top[i]); });
  result.outer = pipeline.fit_outer(corpus);
  const GaussianStats outer = regularize(result.outer, pipeline.config().lambda);

  for (std::size_t i : sample_indices(others.size(), kPersonalTestCount, seed ^ fnv1a(ratings.subject))) {
    report.test_ids.push_back(others[i].first);
    report.test_ratings.push_back(others[i].second);
    report.test_scores.push_back(pipeline.score(image_store(others[i].first), outer).dsts);
  }

  std::vector<double> negated(report.test_scores.size());
  std::transform(report.test_scores.begin(), report.test_scores.end(), negated.begin(),
                 [](double v) { return -v; });
  const std::vector<double> rated(report.test_ratings.begin(), report.test_ratings.end());
  try {
    report.srcc = srcc(negated, rated);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kConstantInput) throw;
    report.note = "test ratings are constant; SRCC undefined";
  }
  return result;
}

CohortSummary aggregate_cohort(const std::vector<SubjectReport>& reports) {
  CohortSummary summary;
  std::vector<double> values;
  for (const SubjectReport& r : reports) {
    if (r.srcc) values.push_back(*r.srcc);
    else summary.excluded.push_back(r.subject);
  }
  summary.included = values.size();
  if (values.empty()) return summary;
  summary.mean_srcc = mean_of(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - summary.mean_srcc) * (v - summary.mean_srcc);
    summary.std_srcc = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return summary;
}

}  // namespace dsts
