#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "samark/eval.hpp"
#include "samark/sampler.hpp"

using namespace samark;

TEST_CASE("calibrate_threshold picks the smallest admissible null score") {
  std::vector<double> nulls;
  for (int i = 1; i <= 100; ++i) nulls.push_back(static_cast<double>(i));
  REQUIRE(calibrate_threshold(nulls, 0.01) == Catch::Approx(99.0));
  REQUIRE(calibrate_threshold(nulls, 0.05) == Catch::Approx(95.0));
  REQUIRE(calibrate_threshold({1, 2, 3, 4, 5}, 0.2) == Catch::Approx(4.0));
  // order independence
  REQUIRE(calibrate_threshold({5, 3, 1, 4, 2}, 0.2) == Catch::Approx(4.0));
}

TEST_CASE("calibrate_threshold error paths") {
  REQUIRE_THROWS_AS(calibrate_threshold({}, 0.01), EmptyNull);
  REQUIRE_THROWS_AS(calibrate_threshold({1.0}, 0.0), InvalidRate);
  REQUIRE_THROWS_AS(calibrate_threshold({1.0}, 1.0), InvalidRate);
}

TEST_CASE("tp_at_fp counts strict exceedance of the calibrated threshold") {
  std::vector<double> pos{10, 10, 10, 0};
  std::vector<double> neg{0, 1, 2, 3, 4};
  REQUIRE(tp_at_fp(pos, neg, 0.2) == Catch::Approx(0.75));
  // tau calibrates to 3 here; a score equal to tau is not a hit
  REQUIRE(tp_at_fp({3.0}, neg, 0.2) == 0.0);
  REQUIRE_THROWS_AS(tp_at_fp({}, neg, 0.2), EmptyList);
}

TEST_CASE("auc is the Mann-Whitney statistic with half-credit ties") {
  REQUIRE(auc({5, 6, 7}, {1, 2, 3}) == Catch::Approx(1.0));
  REQUIRE(auc({1, 2, 3}, {5, 6, 7}) == Catch::Approx(0.0));
  REQUIRE(auc({1}, {1}) == Catch::Approx(0.5));
  REQUIRE(auc({1, 3}, {2}) == Catch::Approx(0.5));
  REQUIRE_THROWS_AS(auc({}, {1.0}), EmptyList);
  REQUIRE_THROWS_AS(auc({1.0}, {}), EmptyList);
}

TEST_CASE("sentence duplicate percentage is case and edge-space blind") {
  REQUIRE(sentence_duplicate_pct({"A cat.", "a cat. ", "B dog."}) ==
          Catch::Approx(100.0 / 3.0).margin(1e-9));
  REQUIRE(sentence_duplicate_pct({"x.", "y."}) == 0.0);
  REQUIRE(sentence_duplicate_pct({}) == 0.0);
}

TEST_CASE("distinct-2 ratio") {
  REQUIRE(distinct_2("a b a b") == Catch::Approx(2.0 / 3.0).margin(1e-12));
  REQUIRE(distinct_2("unique words only here") == Catch::Approx(1.0));
  REQUIRE(distinct_2("one") == 0.0);
}

TEST_CASE("four-gram repeat percentage") {
  REQUIRE(fourgram_repeat_pct("a b c d a b c d a b c d") ==
          Catch::Approx(100.0 * 5.0 / 9.0).margin(1e-9));
  REQUIRE(fourgram_repeat_pct("all fresh tokens in this sentence") == 0.0);
  REQUIRE(fourgram_repeat_pct("too short") == 0.0);
}

TEST_CASE("histogram bins and clamps") {
  auto h = histogram({0.0, 0.5, 1.0, -2.0, 3.0}, 0.0, 1.0, 2);
  REQUIRE(h.edges == std::vector<double>{0.0, 0.5, 1.0});
  REQUIRE(h.counts == std::vector<std::size_t>{2, 3});
}

TEST_CASE("control documents are unwatermarked transcripts of the pool") {
  MockSampler sampler;
  GenerationConfig cfg;
  cfg.max_sentences = 5;
  std::mt19937_64 a(3), b(3);
  auto d1 = generate_control_document(sampler, "Prompt.", cfg, a);
  auto d2 = generate_control_document(sampler, "Prompt.", cfg, b);
  REQUIRE(d1.size() == 5);
  REQUIRE(d1 == d2);
}

TEST_CASE("run_experiment produces a coherent report") {
  MockSampler sampler;
  BuiltinHashEmbedder embedder(768);
  ExperimentConfig cfg;
  cfg.key = PrivateKey::from_hex("a1b2c3d4e5f6a7b8a1b2c3d4e5f6a7b8");
  cfg.gen.max_sentences = 8;
  cfg.gen.pool_size = 32;
  cfg.seed = 99;
  AttackSpec shuffle;
  shuffle.kind = AttackSpec::Kind::shuffle;
  AttackSpec noise;
  noise.kind = AttackSpec::Kind::embed_noise;
  noise.angle = 0.5;
  cfg.attack_grid = {shuffle, noise};

  std::vector<std::string> prompts;
  for (int i = 0; i < 6; ++i) prompts.push_back("Prompt number " + std::to_string(i) + ".");
  auto out = run_experiment(prompts, cfg, sampler, embedder);

  REQUIRE(out.samples.size() == 6 * 4);
  REQUIRE(out.report.conditions.count("watermarked") == 1);
  REQUIRE(out.report.conditions.count("unwatermarked") == 1);
  REQUIRE(out.report.conditions.count("attacked:shuffle") == 1);
  REQUIRE(out.report.conditions.at("watermarked").count == 6);
  REQUIRE(out.report.auc == Catch::Approx(1.0));
  REQUIRE(out.report.tp_at_fp1 >= 0.0);
  REQUIRE(out.report.conditions.at("watermarked").mean_z >
          out.report.conditions.at("unwatermarked").mean_z + 4.0);
  // shuffle leaves the blind statistic unchanged
  REQUIRE(out.report.conditions.at("attacked:shuffle").mean_z ==
          Catch::Approx(out.report.conditions.at("watermarked").mean_z).margin(1e-9));
  // small null sample triggers the calibration warning
  REQUIRE_FALSE(out.report.warnings.empty());
  REQUIRE(out.histograms.count("watermarked") == 1);
  REQUIRE(out.histograms.at("watermarked").counts.size() == 40);
  REQUIRE(out.report.quality.sd_pct >= 0.0);
  REQUIRE(out.report.quality.distinct2 > 0.0);
}

TEST_CASE("run_experiment rejects an empty corpus") {
  MockSampler sampler;
  BuiltinHashEmbedder embedder(64);
  ExperimentConfig cfg;
  cfg.key = PrivateKey::from_hex("a1b2c3d4e5f6a7b8a1b2c3d4e5f6a7b8");
  REQUIRE_THROWS_AS(run_experiment({}, cfg, sampler, embedder), ConfigError);
}
