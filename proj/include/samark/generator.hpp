#pragma once

// Watermark generation: candidate pooling, hard filtering, channel
// matching, hyperbolic scoring with diversity regularization, softmax
// selection. One flag pattern is drawn per document; every sentence is
// steered into the same key-derived green region.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "samark/embedders.hpp"
#include "samark/errors.hpp"
#include "samark/keycore.hpp"
#include "samark/sampler.hpp"
#include "samark/text.hpp"

namespace samark {

struct GenerationConfig {
  std::size_t channels = 2;        // c
  std::size_t pool_size = 64;      // N
  double kappa = 30.0;             // tanh sharpness
  double epsilon = 2.0;            // softmax temperature
  double lambda_div = 0.35;
  double lambda_nov = 0.2;
  double theta_ngram = 0.4;
  double theta_sem = 0.8;
  std::size_t ngram_n = 4;
  std::size_t max_sentences = 12;  // T
  std::size_t max_pool_retries = 3;
  bool ngram_filter = true;
  bool sem_filter = true;
  bool hyperbolic = true;  // false: linear score sum(sigma_j)

  void validate() const {
    if (pool_size < 1) throw ConfigError("pool_size must be >= 1");
    if (kappa <= 0.0) throw ConfigError("kappa must be > 0");
    if (epsilon <= 0.0) throw ConfigError("epsilon must be > 0");
    if (ngram_n < 1) throw ConfigError("ngram_n must be >= 1");
    if (theta_ngram <= 0.0 || theta_ngram > 1.0) throw ConfigError("theta_ngram must be in (0,1]");
    if (theta_sem <= 0.0 || theta_sem > 1.0) throw ConfigError("theta_sem must be in (0,1]");
    if (channels < 1) throw ConfigError("channels must be >= 1");
  }
};

enum class FilterStage { none, ngram, semantic };

struct CandidateSentence {
  std::string sentence;
  UnitEmbedding embedding;
  std::vector<double> sigma;  // signed per-channel cosines
  double score_wm = 0.0;
  double score = 0.0;
  bool matched = false;
  FilterStage filtered_by = FilterStage::none;
};

struct FallbackEvent {
  std::size_t step;  // 1-based
  std::string reason;
};

struct WatermarkedDocument {
  std::vector<std::string> sentences;
  FlagPattern flags;  // empty for step-keyed documents
  bool step_keyed = false;
  std::vector<FallbackEvent> fallback_events;
  GenerationConfig config_snapshot;
};

// Fraction of the candidate's distinct word n-grams already present in
// the context; 0 when the candidate is shorter than n words.
inline double ngram_overlap_ratio(const std::string& candidate, const std::string& context,
                                  std::size_t n) {
  auto cand_grams = text::ngram_set(candidate, n);
  if (cand_grams.empty()) return 0.0;
  auto ctx_grams = text::ngram_set(context, n);
  std::size_t shared = 0;
  for (const auto& g : cand_grams)
    if (ctx_grams.contains(g)) ++shared;
  return static_cast<double>(shared) / static_cast<double>(cand_grams.size());
}

// max cosine against the selected-sentence history; 0 when empty.
inline double semantic_similarity_ratio(const UnitEmbedding& e,
                                        const std::vector<UnitEmbedding>& history) {
  double best = 0.0;
  bool first = true;
  for (const auto& h : history) {
    double c = cosine(e, h);
    if (first || c > best) best = c;
    first = false;
  }
  return history.empty() ? 0.0 : best;
}

inline double diversity_bonus(const UnitEmbedding& e, const std::vector<UnitEmbedding>& history) {
  return 1.0 - semantic_similarity_ratio(e, history);
}

// Fraction of the candidate's unique words not yet seen.
inline double novelty_bonus(const std::string& candidate,
                            const std::unordered_set<std::string>& seen_vocab) {
  auto words = text::tokenize_words(candidate);
  std::unordered_set<std::string> unique(words.begin(), words.end());
  if (unique.empty()) return 0.0;
  std::size_t fresh = 0;
  for (const auto& w : unique)
    if (!seen_vocab.contains(w)) ++fresh;
  return static_cast<double>(fresh) / static_cast<double>(unique.size());
}

inline double watermark_score(const std::vector<double>& sigma, double kappa) {
  double s = 0.0;
  for (double x : sigma) s += std::tanh(kappa * x);
  return s;
}

inline double total_score(double score_wm, double div, double nov, double lambda_div,
                          double lambda_nov) {
  return score_wm + lambda_div * div + lambda_nov * nov;
}

// Marks and returns the candidates whose embeddings lie in the green
// region for (pivots, flags).
inline std::vector<CandidateSentence*> match_channels(std::vector<CandidateSentence>& pool,
                                                      const PivotSet& pivots,
                                                      const FlagPattern& flags) {
  std::vector<CandidateSentence*> matched;
  for (auto& cand : pool) {
    cand.matched = green_membership(cand.embedding, pivots, flags);
    if (cand.matched) matched.push_back(&cand);
  }
  return matched;
}

// Softmax over scores with max-shift; samples an index.
inline std::size_t softmax_select_index(const std::vector<double>& scores, double epsilon,
                                        std::mt19937_64& rng) {
  if (scores.empty()) throw EmptyPool("softmax over empty candidate set");
  double max_s = scores.front();
  for (double s : scores) max_s = std::max(max_s, s);
  std::vector<double> weights(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(epsilon * (scores[i] - max_s));
    total += weights[i];
  }
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

inline CandidateSentence& softmax_select(std::vector<CandidateSentence*>& matched, double epsilon,
                                         std::mt19937_64& rng) {
  std::vector<double> scores;
  scores.reserve(matched.size());
  for (auto* c : matched) scores.push_back(c->score);
  return *matched[softmax_select_index(scores, epsilon, rng)];
}

namespace detail {

template <typename FlagsForStep>
WatermarkedDocument generate_impl(CandidateSampler& sampler, Embedder& embedder,
                                  const PrivateKey& key, const std::string& prompt,
                                  const GenerationConfig& cfg, std::mt19937_64& rng,
                                  FlagsForStep&& flags_for_step, bool step_keyed) {
  cfg.validate();
  const std::size_t d = embedder.dimension();
  if (cfg.channels > d) throw ConfigError("channels exceed embedding dimension");
  PivotSet pivots = derive_pivots(key, cfg.channels, d);

  WatermarkedDocument doc;
  doc.step_keyed = step_keyed;
  doc.config_snapshot = cfg;
  if (!step_keyed) doc.flags = flags_for_step(1);

  std::string context = prompt;
  std::vector<UnitEmbedding> history;
  std::unordered_set<std::string> seen_vocab;
  for (auto& w : text::tokenize_words(prompt)) seen_vocab.insert(std::move(w));

  for (std::size_t t = 1; t <= cfg.max_sentences; ++t) {
    FlagPattern flags = step_keyed ? flags_for_step(t) : doc.flags;

    std::vector<CandidateSentence> pool;
    std::vector<CandidateSentence*> matched;
    bool have_survivors = false;
    for (std::size_t attempt = 0;; ++attempt) {
      auto texts = sampler.sample(context, cfg.pool_size, rng);
      auto embeddings = embedder.embed(texts);
      if (embeddings.size() != texts.size()) throw BackendError("embedder batch size mismatch");
      pool.clear();
      pool.reserve(texts.size());
      for (std::size_t i = 0; i < texts.size(); ++i) {
        CandidateSentence cand;
        cand.sentence = std::move(texts[i]);
        cand.embedding = std::move(embeddings[i]);
        if (cand.embedding.size() != d) throw DimensionMismatch("embedding width from backend");
        pool.push_back(std::move(cand));
      }
      for (auto& cand : pool) {
        if (cfg.ngram_filter &&
            ngram_overlap_ratio(cand.sentence, context, cfg.ngram_n) >= cfg.theta_ngram)
          cand.filtered_by = FilterStage::ngram;
        else if (cfg.sem_filter &&
                 semantic_similarity_ratio(cand.embedding, history) >= cfg.theta_sem)
          cand.filtered_by = FilterStage::semantic;
      }
      matched.clear();
      have_survivors = false;
      for (auto& cand : pool) {
        if (cand.filtered_by != FilterStage::none) continue;
        have_survivors = true;
        cand.matched = green_membership(cand.embedding, pivots, flags);
        if (cand.matched) matched.push_back(&cand);
      }
      if (!matched.empty() || attempt >= cfg.max_pool_retries) break;
      doc.fallback_events.push_back({t, "pool_resample"});
    }

    auto score_candidate = [&](CandidateSentence& cand) {
      cand.sigma = signed_channel_similarities(cand.embedding, pivots, flags);
      if (cfg.hyperbolic) {
        cand.score_wm = watermark_score(cand.sigma, cfg.kappa);
      } else {
        cand.score_wm = 0.0;
        for (double s : cand.sigma) cand.score_wm += s;
      }
      double div = diversity_bonus(cand.embedding, history);
      double nov = novelty_bonus(cand.sentence, seen_vocab);
      cand.score = total_score(cand.score_wm, div, nov, cfg.lambda_div, cfg.lambda_nov);
    };

    CandidateSentence* winner = nullptr;
    if (matched.empty() && !have_survivors && !pool.empty()) {
      // hard filters emptied the pool: re-admit and rely on the soft terms
      doc.fallback_events.push_back({t, "filters_bypassed"});
      for (auto& cand : pool) {
        cand.matched = green_membership(cand.embedding, pivots, flags);
        if (cand.matched) matched.push_back(&cand);
      }
    }
    if (!matched.empty()) {
      for (auto* cand : matched) score_candidate(*cand);
      winner = &softmax_select(matched, cfg.epsilon, rng);
    } else {
      // no candidate matches every channel: take the closest partial match
      doc.fallback_events.push_back({t, "partial_match"});
      std::size_t best_hits = 0;
      double best_wm = 0.0;
      for (auto& cand : pool) {
        score_candidate(cand);
        std::size_t hits = 0;
        for (double s : cand.sigma)
          if (s > 0.0) ++hits;
        if (!winner || hits > best_hits || (hits == best_hits && cand.score_wm > best_wm)) {
          winner = &cand;
          best_hits = hits;
          best_wm = cand.score_wm;
        }
      }
      if (!winner) throw BackendError("sampler returned an empty pool");
    }

    doc.sentences.push_back(winner->sentence);
    history.push_back(winner->embedding);
    for (auto& w : text::tokenize_words(winner->sentence)) seen_vocab.insert(std::move(w));
    if (!context.empty() && context.back() != ' ') context += ' ';
    context += winner->sentence;
  }
  return doc;
}

}  // namespace detail

inline WatermarkedDocument generate_document(CandidateSampler& sampler, Embedder& embedder,
                                             const PrivateKey& key, const std::string& prompt,
                                             const GenerationConfig& cfg, std::mt19937_64& rng) {
  FlagPattern flags = sample_flag_pattern(rng, cfg.channels);
  return detail::generate_impl(
      sampler, embedder, key, prompt, cfg, rng, [&](std::size_t) { return flags; }, false);
}

// Comparator regime: flags re-derived from (key, step) each step.
// Deliberately order-sensitive; used to reproduce the fragility contrast.
inline WatermarkedDocument generate_document_step_keyed(CandidateSampler& sampler,
                                                        Embedder& embedder, const PrivateKey& key,
                                                        const std::string& prompt,
                                                        const GenerationConfig& cfg,
                                                        std::mt19937_64& rng) {
  return detail::generate_impl(
      sampler, embedder, key, prompt, cfg, rng,
      [&](std::size_t t) { return detail::step_flags(key, t, cfg.channels); }, true);
}

}  // namespace samark
