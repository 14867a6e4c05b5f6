#include <gtest/gtest.h>

#include <cstdlib>

#include "dsts/config.hpp"
#include "dsts/error.hpp"
#include "dsts/parallel.hpp"
#include "support.hpp"

namespace {

TEST(Config, Defaults) {
  const dsts::EngineConfig c;
  EXPECT_EQ(c.window_k, 3);
  EXPECT_EQ(c.window_l, 3);
  EXPECT_DOUBLE_EQ(c.window_sigma, 7.0 / 6.0);
  EXPECT_EQ(c.lambda, 1e-6);
  EXPECT_EQ(c.weight_mode, dsts::WeightMode::kNormalized);
  EXPECT_EQ(c.normalization_scope, dsts::NormalizationScope::kPerLocation);
  EXPECT_EQ(c.shape_backbone, "filterbank");
  EXPECT_EQ(c.texture_backbone, "filterbank");
}

TEST(Config, RoundTripsThroughFile) {
  dsts::EngineConfig c;
  c.window_k = 2;
  c.window_l = 4;
  c.window_sigma = 0.1 + 0.2;
  c.lambda = 3.3e-7;
  c.weight_mode = dsts::WeightMode::kRaw;
  c.normalization_scope = dsts::NormalizationScope::kWholeMap;
  c.shape_backbone = "/models/shape net.onnx";
  c.texture_backbone = "texture.onnx";
  c.threads = 7;
  c.seed = 18446744073709551615ull;
  c.max_condition = 1.5e11;
  EXPECT_EQ(dsts::parse_toml(dsts::to_toml(c)), c);

  dsts::testing::TempDir dir("config");
  dsts::save_config(c, dir / "engine.toml");
  EXPECT_EQ(dsts::load_config(dir / "engine.toml"), c);
  const dsts::EngineConfig d;
  dsts::save_config(d, dir / "default.toml");
  EXPECT_EQ(dsts::load_config(dir / "default.toml"), dsts::parse_toml(dsts::to_toml(d)));
}

TEST(Config, CommentsAndPartialFiles) {
  dsts::EngineConfig base;
  base.threads = 3;
  const auto c = dsts::parse_toml(
      "# engine settings\n\n  lambda = 2e-6   # tighter\nweight_mode = \"raw\"\n", base);
  EXPECT_EQ(c.lambda, 2e-6);
  EXPECT_EQ(c.weight_mode, dsts::WeightMode::kRaw);
  EXPECT_EQ(c.threads, 3u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(dsts::parse_toml("gamma = 1\n"), dsts::Error);
  EXPECT_THROW(dsts::parse_toml("lambda = fast\n"), dsts::Error);
  EXPECT_THROW(dsts::parse_toml("weight_mode = \"sum\"\n"), dsts::Error);
  EXPECT_THROW(dsts::parse_toml("weight_mode = raw\n"), dsts::Error);
  EXPECT_THROW(dsts::parse_toml("just words\n"), dsts::Error);
  EXPECT_THROW(dsts::load_config("/nonexistent/engine.toml"), dsts::Error);
}

TEST(Config, ModeNames) {
  EXPECT_STREQ(dsts::to_string(dsts::WeightMode::kRaw), "raw");
  EXPECT_STREQ(dsts::to_string(dsts::NormalizationScope::kWholeMap), "whole-map");
  EXPECT_EQ(dsts::parse_normalization_scope("per-location"),
            dsts::NormalizationScope::kPerLocation);
}

TEST(Config, ThreadCountFromEnvironment) {
  ::setenv("DSTS_THREADS", "5", 1);
  EXPECT_EQ(dsts::default_thread_count(), 5u);
  EXPECT_EQ(dsts::default_config().threads, 5u);
  ::unsetenv("DSTS_THREADS");
  EXPECT_GE(dsts::default_thread_count(), 1u);
}

TEST(ParallelFor, CoversRangeAndRethrows) {
  std::vector<int> hits(1000, 0);
  dsts::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(dsts::parallel_for(100, 3,
                                  [](std::size_t i) {
                                    if (i == 57) throw std::runtime_error("boom");
                                  }),
               std::runtime_error);
}

}  // namespace
