#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dsts/cli.hpp"
#include "dsts/config.hpp"
#include "dsts/csv.hpp"
#include "dsts/distort.hpp"
#include "dsts/error.hpp"
#include "dsts/evaluation.hpp"
#include "dsts/parallel.hpp"
#include "dsts/pipeline.hpp"
#include "dsts/simd/kernels.hpp"
#include "dsts/stats_io.hpp"
#include "json.hpp"

namespace dsts::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags shared by every pipeline-driven command; each one overrides the config file.
struct EngineFlags {
  std::string config_path;
  std::optional<std::string> backbone;
  std::optional<std::string> shape;
  std::optional<std::string> texture;
  std::optional<double> lambda;
  std::optional<std::string> weight_mode;
  std::optional<std::string> norm_scope;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Engine config file (TOML subset)");
    app.add_option("--backbone", backbone, "Use 'filterbank' for both branches");
    app.add_option("--shape", shape, "Shape-biased ONNX model (or 'filterbank')");
    app.add_option("--texture", texture, "Texture-biased ONNX model (or 'filterbank')");
    app.add_option("--lambda", lambda, "Covariance regularization");
    app.add_option("--weight-mode", weight_mode, "normalized | raw");
    app.add_option("--norm-scope", norm_scope, "per-location | whole-map");
    app.add_option("--threads", threads, "Worker threads (default: DSTS_THREADS or all cores)");
    app.add_option("--seed", seed, "Seed for sampling and synthetic noise");
  }

  EngineConfig resolve() const {
    EngineConfig config = config_path.empty() ? default_config() : load_config(config_path);
    if (backbone) {
      if (*backbone != "filterbank") {
        throw Error(ErrorCode::kInvalidArgument, "--backbone only accepts 'filterbank'");
      }
      config.shape_backbone = config.texture_backbone = "filterbank";
    }
    if (shape) config.shape_backbone = *shape;
    if (texture) config.texture_backbone = *texture;
    if (lambda) config.lambda = *lambda;
    if (weight_mode) config.weight_mode = parse_weight_mode(*weight_mode);
    if (norm_scope) config.normalization_scope = parse_normalization_scope(*norm_scope);
    if (threads) config.threads = std::max(1u, *threads);
    if (seed) config.seed = *seed;
    return config;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << std::setw(2) << doc << "\n";
}

// ---------------------------------------------------------------- build-outer

struct BuildOuterArgs {
  EngineFlags engine;
  std::string images;
  std::string out;
};

int build_outer(const BuildOuterArgs& args, std::ostream& out) {
  const EngineConfig config = args.engine.resolve();
  const auto files = list_images(args.images);
  if (files.empty()) {
    throw Error(ErrorCode::kEmptyResult, "no PNG/JPEG images in " + args.images);
  }
  const Pipeline pipeline = Pipeline::from_config(config);
  const OuterCorpus corpus =
      pipeline.collect_outer_samples(files.size(), [&](std::size_t i) { return load_image(files[i]); });
  const GaussianStats stats = pipeline.fit_outer(corpus);

  save_stats(stats, args.out);
  json images = json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    images.push_back({{"file", files[i].filename().string()},
                      {"kept_rows", corpus.kept_rows[i]},
                      {"kept_fraction", corpus.kept_fractions[i]}});
  }
  const json sidecar = {
      {"format_version", kStatsFormatVersion},
      {"channels", stats.dims()},
      {"sample_count", stats.sample_count},
      {"corpus", {{"directory", fs::absolute(args.images).string()}, {"images", images}}},
      {"backbones",
       {{"shape", {{"source", config.shape_backbone}, {"fingerprint", pipeline.shape_backbone().fingerprint()}}},
        {"texture", {{"source", config.texture_backbone}, {"fingerprint", pipeline.texture_backbone().fingerprint()}}}}},
      {"window", {{"k", config.window_k}, {"l", config.window_l}, {"sigma", config.window_sigma}}},
      {"lambda", config.lambda},
      {"normalization_scope", to_string(config.normalization_scope)},
      {"tau", "per-image mean of the structure indicator"},
      {"seed", config.seed},
      {"simd", simd::isa_name(simd::active().isa)},
  };
  write_json(sidecar, args.out + ".json");

  out << "samples " << stats.sample_count << "\n";
  for (std::size_t i = 0; i < files.size(); ++i) {
    out << files[i].filename().string() << " kept " << corpus.kept_rows[i] << " ("
        << std::fixed << std::setprecision(3) << corpus.kept_fractions[i] << ")\n";
    out.unsetf(std::ios::fixed);
  }
  out << "wrote " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------- score

struct ScoreArgs {
  EngineFlags engine;
  std::string stats;
  std::vector<std::string> image_files;
  std::string images_dir;
  std::string out_csv;
  std::string per_sample;
};

struct ScoreRow {
  std::string image;
  std::optional<QualityScore> score;
  std::string error;
};

int score(const ScoreArgs& args, std::ostream& out, std::ostream& err) {
  EngineConfig config = args.engine.resolve();
  std::vector<fs::path> files(args.image_files.begin(), args.image_files.end());
  if (!args.images_dir.empty()) {
    const auto listed = list_images(args.images_dir);
    files.insert(files.end(), listed.begin(), listed.end());
  }
  if (files.empty()) throw Error(ErrorCode::kInvalidArgument, "give --image or --images");

  const unsigned batch_threads = config.threads;
  config.threads = 1;  // parallelism goes across images in batch mode
  const Pipeline pipeline = Pipeline::from_config(config);
  const GaussianStats outer =
      regularize(load_stats(args.stats, kEmbeddingChannels), config.lambda);

  std::vector<ScoreRow> rows(files.size());
  parallel_for(files.size(), batch_threads, [&](std::size_t i) {
    rows[i].image = files[i].filename().string();
    try {
      rows[i].score = pipeline.score(load_image(files[i]), outer);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });

  std::ofstream file;
  if (!args.out_csv.empty()) {
    file.open(args.out_csv);
    if (!file) throw Error(ErrorCode::kIoError, "cannot write " + args.out_csv);
  }
  std::ostream& sink = args.out_csv.empty() ? out : file;
  sink << "image,dsts,error\n";
  std::size_t failures = 0;
  for (const auto& row : rows) {
    std::string error = row.error;
    std::replace(error.begin(), error.end(), ',', ';');
    sink << row.image << "," << (row.score ? fmt(row.score->dsts) : "") << "," << error << "\n";
    if (!row.score) {
      ++failures;
      err << "failed: " << row.image << ": " << row.error << "\n";
    }
  }

  if (!args.per_sample.empty()) {
    std::ofstream dump(args.per_sample);
    if (!dump) throw Error(ErrorCode::kIoError, "cannot write " + args.per_sample);
    dump << "image,row,distance\n";
    for (const auto& row : rows) {
      if (!row.score) continue;
      for (std::size_t r = 0; r < row.score->distances.size(); ++r) {
        dump << row.image << "," << r << "," << fmt(row.score->distances[r]) << "\n";
      }
    }
  }
  return failures == 0 ? 0 : 2;
}

// ----------------------------------------------------------------------- eval

struct EvalArgs {
  std::string scores;
  std::string mos;
  std::string direction = "lower-better";
  std::string report;
  std::string out_csv;
};

int eval(const EvalArgs& args, std::ostream& out) {
  ScoreDirection direction = ScoreDirection::kLowerBetter;
  if (args.direction == "higher-better") direction = ScoreDirection::kHigherBetter;
  else if (args.direction != "lower-better") {
    throw Error(ErrorCode::kInvalidArgument, "--direction must be lower-better or higher-better");
  }
  const ScoredSet set = join_by_id(read_id_values(args.scores), read_id_values(args.mos), direction);
  const EvaluationReport report = evaluate(set);
  const auto& a = report.fit.params.a;

  out << "n " << report.count << "\n"
      << "plcc " << fmt(report.plcc) << "\n"
      << "srcc " << fmt(report.srcc) << "\n"
      << "rmse " << fmt(report.rmse) << "\n";
  for (std::size_t i = 0; i < a.size(); ++i) out << "a" << i + 1 << " " << fmt(a[i]) << "\n";
  if (!report.fit.converged) out << "warning: logistic fit did not converge\n";

  if (!args.report.empty()) {
    write_json({{"n", report.count},
                {"plcc", report.plcc},
                {"srcc", report.srcc},
                {"rmse", report.rmse},
                {"direction", args.direction},
                {"logistic", {{"a1", a[0]}, {"a2", a[1]}, {"a3", a[2]}, {"a4", a[3]}, {"a5", a[4]}},
                 },
                {"converged", report.fit.converged},
                {"iterations", report.fit.iterations}},
               args.report);
  }
  if (!args.out_csv.empty()) {
    std::ofstream csv(args.out_csv);
    if (!csv) throw Error(ErrorCode::kIoError, "cannot write " + args.out_csv);
    csv << "n,plcc,srcc,rmse,a1,a2,a3,a4,a5\n"
        << report.count << "," << fmt(report.plcc) << "," << fmt(report.srcc) << ","
        << fmt(report.rmse);
    for (double v : a) csv << "," << fmt(v);
    csv << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- personalize

struct PersonalizeArgs {
  EngineFlags engine;
  std::string ratings;
  std::string images;
  std::string report;
  std::string out_csv;
  std::string stats_dir;
};

fs::path resolve_image(const fs::path& dir, const std::string& id) {
  const fs::path direct = dir / id;
  if (fs::exists(direct) && fs::is_regular_file(direct)) return direct;
  for (const char* ext : {".png", ".jpg", ".jpeg", ".PNG", ".JPG", ".JPEG"}) {
    const fs::path candidate = dir / (id + ext);
    if (fs::exists(candidate)) return candidate;
  }
  throw Error(ErrorCode::kFileNotFound, "no image for id '" + id + "' in " + dir.string());
}

int personalize_cmd(const PersonalizeArgs& args, std::ostream& out, std::ostream& err) {
  const EngineConfig config = args.engine.resolve();
  const Pipeline pipeline = Pipeline::from_config(config);
  const auto subjects = group_ratings(read_ratings(args.ratings));
  const fs::path dir = args.images;
  const auto store = [&](const std::string& id) { return load_image(resolve_image(dir, id)); };

  std::vector<SubjectReport> reports;
  json subjects_json = json::array();
  json skipped = json::array();
  for (const SubjectRatings& subject : subjects) {
    try {
      PersonalizedResult result = personalize(subject, store, pipeline, config.seed);
      if (!args.stats_dir.empty()) {
        save_stats(result.outer, fs::path(args.stats_dir) / (subject.subject + ".dsts"));
      }
      const SubjectReport& r = result.report;
      subjects_json.push_back({{"subject", r.subject},
                               {"top_rated", r.top_rated},
                               {"test_ids", r.test_ids},
                               {"test_ratings", r.test_ratings},
                               {"test_dsts", r.test_scores},
                               {"srcc", r.srcc ? json(*r.srcc) : json(nullptr)},
                               {"note", r.note}});
      reports.push_back(r);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientRatings) throw;
      err << "skipped: " << e.what() << "\n";
      skipped.push_back({{"subject", subject.subject}, {"reason", e.what()}});
    }
  }
  const CohortSummary cohort = aggregate_cohort(reports);

  std::ofstream file;
  if (!args.out_csv.empty()) {
    file.open(args.out_csv);
    if (!file) throw Error(ErrorCode::kIoError, "cannot write " + args.out_csv);
  }
  std::ostream& sink = args.out_csv.empty() ? out : file;
  sink << "subject,top_rated,srcc,note\n";
  for (const auto& r : reports) {
    sink << r.subject << "," << r.top_rated << "," << (r.srcc ? fmt(*r.srcc) : "") << ","
         << r.note << "\n";
  }
  out << "cohort srcc " << fmt(cohort.mean_srcc) << " +/- " << fmt(cohort.std_srcc) << " over "
      << cohort.included << " subjects\n";

  if (!args.report.empty()) {
    write_json({{"subjects", subjects_json},
                {"skipped", skipped},
                {"cohort",
                 {{"mean_srcc", cohort.mean_srcc},
                  {"std_srcc", cohort.std_srcc},
                  {"included", cohort.included},
                  {"excluded", cohort.excluded}}},
                {"test_sampling", "seeded uniform without replacement from non-top-rated images"},
                {"test_count", kPersonalTestCount},
                {"seed", config.seed}},
               args.report);
  }
  return 0;
}

// -------------------------------------------------------------------- distort

struct DistortArgs {
  std::string images;
  std::string out;
  std::vector<double> blur_sigmas{1.0, 2.0, 4.0};
  std::vector<double> noise_stds{5.0, 15.0, 30.0};  // in 8-bit units
  std::vector<int> jpeg_qualities{80, 40, 10};
  std::uint64_t seed = 20240601;
};

int distort(const DistortArgs& args, std::ostream& out) {
  const auto sources = list_images(args.images);
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec || !fs::is_directory(args.out)) {
    throw Error(ErrorCode::kIoError, "cannot create output directory " + args.out);
  }
  std::vector<DistortionStep> ladder;
  for (std::size_t i = 0; i < args.blur_sigmas.size(); ++i)
    ladder.push_back({DistortionType::kBlur, static_cast<int>(i + 1), args.blur_sigmas[i]});
  for (std::size_t i = 0; i < args.noise_stds.size(); ++i)
    ladder.push_back({DistortionType::kNoise, static_cast<int>(i + 1), args.noise_stds[i] / 255.0});
  for (std::size_t i = 0; i < args.jpeg_qualities.size(); ++i)
    ladder.push_back({DistortionType::kJpeg, static_cast<int>(i + 1),
                      static_cast<double>(args.jpeg_qualities[i])});

  const fs::path manifest_path = fs::path(args.out) / "manifest.csv";
  std::ofstream manifest(manifest_path);
  if (!manifest) throw Error(ErrorCode::kIoError, "cannot write " + manifest_path.string());
  manifest << "image,source,type,level,parameter,seed\n";

  std::size_t written = 0;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const RgbImage source = load_image(sources[s]);
    const std::string stem = sources[s].stem().string();
    for (const DistortionStep& step : ladder) {
      const std::uint64_t seed = args.seed + 1000003ull * s + 7919ull * static_cast<std::uint64_t>(step.level);
      std::string name = stem + "_" + to_string(step.type) + std::to_string(step.level);
      if (step.type == DistortionType::kJpeg) {
        name += ".jpg";
        const auto bytes = encode_jpeg(source, static_cast<int>(step.parameter));
        std::ofstream f(fs::path(args.out) / name, std::ios::binary);
        if (!f) throw Error(ErrorCode::kIoError, "cannot write " + name);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      } else {
        name += ".png";
        save_image(apply_distortion(source, step, seed), fs::path(args.out) / name);
      }
      const double reported = step.type == DistortionType::kNoise ? step.parameter * 255.0 : step.parameter;
      manifest << name << "," << sources[s].filename().string() << "," << to_string(step.type)
               << "," << step.level << "," << fmt(reported) << ","
               << (step.type == DistortionType::kNoise ? std::to_string(seed) : "") << "\n";
      ++written;
    }
  }
  out << "wrote " << written << " images and " << manifest_path.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blind image quality from deep shape-texture statistics", "dsts"};
  app.require_subcommand(1);

  BuildOuterArgs build_args;
  auto* build_cmd = app.add_subcommand("build-outer", "Fit outer statistics from pristine images");
  build_args.engine.attach(*build_cmd);
  build_cmd->add_option("--images", build_args.images, "Directory of pristine images")->required();
  build_cmd->add_option("--out", build_args.out, "Output .dsts file")->required();

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score images against outer statistics");
  score_args.engine.attach(*score_cmd);
  score_cmd->add_option("--stats", score_args.stats, "Outer statistics (.dsts)")->required();
  score_cmd->add_option("--image", score_args.image_files, "Image file (repeatable)");
  score_cmd->add_option("--images", score_args.images_dir, "Directory of images");
  score_cmd->add_option("--out", score_args.out_csv, "Write CSV here instead of stdout");
  score_cmd->add_option("--emit-per-sample", score_args.per_sample,
                        "Dump per-location distances to this CSV");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "PLCC / SRCC / RMSE against subjective scores");
  eval_cmd->add_option("--scores", eval_args.scores, "CSV image_id,score")->required();
  eval_cmd->add_option("--mos", eval_args.mos, "CSV image_id,mos")->required();
  eval_cmd->add_option("--direction", eval_args.direction, "lower-better | higher-better");
  eval_cmd->add_option("--report", eval_args.report, "JSON report path");
  eval_cmd->add_option("--out", eval_args.out_csv, "CSV report path");

  PersonalizeArgs personal_args;
  auto* personal_cmd = app.add_subcommand("personalize", "Per-subject outer statistics and SRCC");
  personal_args.engine.attach(*personal_cmd);
  personal_cmd->add_option("--ratings", personal_args.ratings, "CSV subject_id,image_id,rating")->required();
  personal_cmd->add_option("--images", personal_args.images, "Image store directory")->required();
  personal_cmd->add_option("--report", personal_args.report, "JSON report path");
  personal_cmd->add_option("--out", personal_args.out_csv, "CSV report path");
  personal_cmd->add_option("--stats-dir", personal_args.stats_dir, "Save per-subject .dsts files here");

  DistortArgs distort_args;
  auto* distort_cmd = app.add_subcommand("distort", "Generate blur / noise / JPEG ladders");
  distort_cmd->add_option("--images", distort_args.images, "Source image directory")->required();
  distort_cmd->add_option("--out", distort_args.out, "Output directory")->required();
  distort_cmd->add_option("--blur-sigmas", distort_args.blur_sigmas, "Gaussian blur sigmas (px)")->delimiter(',');
  distort_cmd->add_option("--noise-stds", distort_args.noise_stds, "Noise std in 8-bit units")->delimiter(',');
  distort_cmd->add_option("--jpeg-qualities", distort_args.jpeg_qualities, "JPEG qualities")->delimiter(',');
  distort_cmd->add_option("--seed", distort_args.seed, "Noise seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*build_cmd) return build_outer(build_args, out);
    if (*score_cmd) return score(score_args, out, err);
    if (*eval_cmd) return eval(eval_args, out);
    if (*personal_cmd) return personalize_cmd(personal_args, out, err);
    if (*distort_cmd) return distort(distort_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace dsts::cli
