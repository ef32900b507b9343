#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "samark/embedders.hpp"
#include "samark/generator.hpp"
#include "samark/sampler.hpp"

using namespace samark;

namespace {

PrivateKey test_key() { return PrivateKey::from_hex("deadbeefdeadbeefdeadbeefdeadbeef"); }

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(d);
  double norm = 0.0;
  for (auto& x : v) {
    x = gauss(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

class CountingSampler final : public CandidateSampler {
 public:
  explicit CountingSampler(CandidateSampler& inner) : inner_(inner) {}
  std::vector<std::string> sample(const std::string& ctx, std::size_t n,
                                  std::mt19937_64& rng) override {
    ++calls;
    return inner_.sample(ctx, n, rng);
  }
  int calls = 0;

 private:
  CandidateSampler& inner_;
};

}  // namespace

TEST_CASE("ngram overlap ratio counts shared distinct n-grams") {
  std::string candidate = "the cat sat on the mat";
  std::string context = "yesterday the cat sat on something else entirely";
  REQUIRE(ngram_overlap_ratio(candidate, context, 4) == Catch::Approx(1.0 / 3.0).margin(1e-9));
  REQUIRE(ngram_overlap_ratio(candidate, candidate, 4) == Catch::Approx(1.0));
  REQUIRE(ngram_overlap_ratio("just three words", context, 4) == 0.0);
}

TEST_CASE("semantic similarity ratio") {
  std::vector<double> v1{1, 0};
  std::vector<double> v2{0, 1};
  std::vector<double> diag{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  REQUIRE(semantic_similarity_ratio(v1, {v2, v1}) == Catch::Approx(1.0));
  REQUIRE(semantic_similarity_ratio(v1, {}) == 0.0);
  REQUIRE(semantic_similarity_ratio(diag, {v1}) == Catch::Approx(0.70711).margin(1e-5));
}

TEST_CASE("diversity bonus is one minus the similarity ratio") {
  std::vector<double> v1{1, 0};
  REQUIRE(diversity_bonus(v1, {v1}) == Catch::Approx(0.0));
  REQUIRE(diversity_bonus(v1, {}) == Catch::Approx(1.0));
  std::vector<double> tilted{0.3, std::sqrt(1.0 - 0.09)};
  REQUIRE(diversity_bonus(tilted, {{1.0, 0.0}}) == Catch::Approx(0.7).margin(1e-9));
}

TEST_CASE("novelty bonus") {
  std::unordered_set<std::string> seen{"the"};
  REQUIRE(novelty_bonus("the new cat", seen) == Catch::Approx(2.0 / 3.0).margin(1e-9));
  REQUIRE(novelty_bonus("entirely fresh words", {}) == Catch::Approx(1.0));
  REQUIRE(novelty_bonus("the the the", seen) == Catch::Approx(0.0));
  REQUIRE(novelty_bonus("", seen) == 0.0);
}

TEST_CASE("match_channels marks and returns the green subset") {
  auto pivots = derive_pivots(test_key(), 2, 32);
  FlagPattern flags{{1, -1}};
  std::vector<CandidateSentence> pool(2);
  // in-region: +v1 - v2 direction
  pool[0].embedding.resize(32);
  pool[1].embedding.resize(32);
  for (std::size_t i = 0; i < 32; ++i) {
    pool[0].embedding[i] = pivots.vectors[0][i] - pivots.vectors[1][i];
    pool[1].embedding[i] = -pivots.vectors[0][i];
  }
  auto matched = match_channels(pool, pivots, flags);
  REQUIRE(matched.size() == 1);
  REQUIRE(pool[0].matched);
  REQUIRE_FALSE(pool[1].matched);
}

TEST_CASE("random embeddings match a 2-channel pattern at rate ~1/4") {
  auto pivots = derive_pivots(test_key(), 2, 768);
  FlagPattern flags{{1, -1}};
  std::mt19937_64 rng(11);
  int hits = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i)
    if (green_membership(random_unit(rng, 768), pivots, flags)) ++hits;
  double rate = static_cast<double>(hits) / trials;
  REQUIRE(rate == Catch::Approx(0.25).margin(0.02));
}

TEST_CASE("watermark score") {
  REQUIRE(watermark_score({0.1, 0.05}, 30.0) == Catch::Approx(1.90020).margin(1e-5));
  REQUIRE(watermark_score({0.0, 0.0}, 30.0) == 0.0);
  REQUIRE(watermark_score({1.0, 1.0}, 30.0) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("watermark score is odd and monotone") {
  std::vector<double> sigma{0.2, -0.05, 0.4};
  std::vector<double> neg(sigma);
  for (auto& x : neg) x = -x;
  REQUIRE(watermark_score(neg, 30.0) == Catch::Approx(-watermark_score(sigma, 30.0)).margin(1e-12));
  std::vector<double> bumped(sigma);
  bumped[1] += 0.01;
  REQUIRE(watermark_score(bumped, 30.0) >= watermark_score(sigma, 30.0));
}

TEST_CASE("total score linear combination") {
  REQUIRE(total_score(1.9, 0.7, 0.5, 0.35, 0.2) == Catch::Approx(2.245).margin(1e-12));
  REQUIRE(total_score(1.9, 0.7, 0.5, 0.0, 0.0) == Catch::Approx(1.9));
  REQUIRE(total_score(0, 0, 0, 0, 0) == 0.0);
}

TEST_CASE("softmax selection respects the distribution") {
  std::mt19937_64 rng(3);
  int first = 0;
  for (int i = 0; i < 10000; ++i)
    if (softmax_select_index({1.0, 1.0}, 1.0, rng) == 0) ++first;
  REQUIRE(first >= 4850);
  REQUIRE(first <= 5150);

  int high = 0;
  for (int i = 0; i < 10000; ++i)
    if (softmax_select_index({2.0, 0.0}, 1.0, rng) == 0) ++high;
  // e^2 / (e^2 + 1) = 0.88080
  REQUIRE(high >= 8700);
  REQUIRE(high <= 8950);

  REQUIRE(softmax_select_index({42.0}, 1.0, rng) == 0);
  REQUIRE_THROWS_AS(softmax_select_index({}, 1.0, rng), EmptyPool);
}

TEST_CASE("softmax selection is invariant to a constant score shift") {
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 200; ++i) {
    auto lhs = softmax_select_index({0.3, 1.1, -0.4}, 2.0, a);
    auto rhs = softmax_select_index({100.3, 101.1, 99.6}, 2.0, b);
    REQUIRE(lhs == rhs);
  }
}

TEST_CASE("generate_document emits green sentences under the document flags") {
  MockSampler sampler;
  BuiltinHashEmbedder embedder(768);
  GenerationConfig cfg;  // defaults: c=2, N=64, T=12
  std::mt19937_64 rng(7);
  auto doc = generate_document(sampler, embedder, test_key(), "A starting prompt.", cfg, rng);
  REQUIRE(doc.sentences.size() == 12);
  auto pivots = derive_pivots(test_key(), cfg.channels, 768);
  for (std::size_t t = 0; t < doc.sentences.size(); ++t) {
    bool green = green_membership(embedder.embed_one(doc.sentences[t]), pivots, doc.flags);
    bool has_fallback = false;
    for (const auto& e : doc.fallback_events)
      if (e.step == t + 1 && e.reason != "pool_resample") has_fallback = true;
    REQUIRE((green || has_fallback));
  }
}

TEST_CASE("T=0 yields an empty document without sampler calls") {
  MockSampler inner;
  CountingSampler sampler(inner);
  BuiltinHashEmbedder embedder(768);
  GenerationConfig cfg;
  cfg.max_sentences = 0;
  std::mt19937_64 rng(1);
  auto doc = generate_document(sampler, embedder, test_key(), "Prompt.", cfg, rng);
  REQUIRE(doc.sentences.empty());
  REQUIRE(sampler.calls == 0);
}

TEST_CASE("repeating pool triggers the semantic-filter fallback") {
  ConstantSampler sampler("Bravo delta echo foxtrot golf hotel india.");
  BuiltinHashEmbedder embedder(768);
  GenerationConfig cfg;
  cfg.max_sentences = 3;
  cfg.theta_sem = 0.8;
  cfg.max_pool_retries = 1;
  std::mt19937_64 rng(5);
  auto doc = generate_document(sampler, embedder, test_key(), "Prompt.", cfg, rng);
  REQUIRE(doc.sentences.size() == 3);
  bool saw_bypass = false;
  for (const auto& e : doc.fallback_events)
    if (e.step >= 2 && (e.reason == "filters_bypassed" || e.reason == "partial_match"))
      saw_bypass = true;
  REQUIRE(saw_bypass);
}

TEST_CASE("determinism: same seed, same document") {
  MockSampler sampler;
  BuiltinHashEmbedder embedder(768);
  GenerationConfig cfg;
  std::mt19937_64 a(21), b(21);
  auto d1 = generate_document(sampler, embedder, test_key(), "P.", cfg, a);
  auto d2 = generate_document(sampler, embedder, test_key(), "P.", cfg, b);
  REQUIRE(d1.sentences == d2.sentences);
  REQUIRE(d1.flags == d2.flags);
}

TEST_CASE("step-keyed generation varies flags by step") {
  MockSampler sampler;
  BuiltinHashEmbedder embedder(768);
  GenerationConfig cfg;
  cfg.max_sentences = 4;
  std::mt19937_64 rng(9);
  auto doc =
      generate_document_step_keyed(sampler, embedder, test_key(), "Prompt.", cfg, rng);
  REQUIRE(doc.step_keyed);
  REQUIRE(doc.sentences.size() == 4);
}

TEST_CASE("config validation") {
  GenerationConfig cfg;
  cfg.kappa = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.theta_ngram = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.pool_size = 0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
}
