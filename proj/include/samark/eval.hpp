#pragma once

// Threshold calibration, detection metrics (TP@FP, AUC), the diversity
// metrics (SD, D-2, 4g), and the experiment runner tying generation,
// attacks and detection together.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "samark/attacks.hpp"
#include "samark/detector.hpp"
#include "samark/errors.hpp"
#include "samark/generator.hpp"
#include "samark/text.hpp"

namespace samark {

struct ScoreSample {
  std::string doc_id;
  std::string condition;  // watermarked | unwatermarked | attacked:<kind>
  double z = 0.0;
};

// Smallest null score t with fraction(null > t) <= fp.
inline double calibrate_threshold(std::vector<double> null_scores, double fp) {
  if (fp <= 0.0 || fp >= 1.0) throw InvalidRate("fp must be in (0,1)");
  if (null_scores.empty()) throw EmptyNull("no null scores to calibrate on");
  std::sort(null_scores.begin(), null_scores.end());
  const auto n = static_cast<double>(null_scores.size());
  for (std::size_t i = 0; i < null_scores.size(); ++i) {
    double t = null_scores[i];
    auto above = null_scores.end() - std::upper_bound(null_scores.begin(), null_scores.end(), t);
    if (static_cast<double>(above) / n <= fp) return t;
  }
  return null_scores.back();
}

inline double tp_at_fp(const std::vector<double>& pos, const std::vector<double>& neg, double fp) {
  if (pos.empty()) throw EmptyList("no positive scores");
  double tau = calibrate_threshold(neg, fp);
  std::size_t hits = 0;
  for (double p : pos)
    if (p > tau) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pos.size());
}

// Mann-Whitney AUC, ties counted 0.5.
inline double auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw EmptyList("auc needs both score lists");
  double wins = 0.0;
  for (double p : pos)
    for (double q : neg) {
      if (p > q)
        wins += 1.0;
      else if (p == q)
        wins += 0.5;
    }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

inline double sentence_duplicate_pct(const std::vector<std::string>& sentences) {
  if (sentences.empty()) return 0.0;
  std::unordered_set<std::string> uniq;
  for (const auto& s : sentences) {
    auto t = text::to_lower(s);
    std::size_t a = t.find_first_not_of(" \t\r\n");
    std::size_t b = t.find_last_not_of(" \t\r\n");
    uniq.insert(a == std::string::npos ? std::string() : t.substr(a, b - a + 1));
  }
  double n = static_cast<double>(sentences.size());
  return 100.0 * (n - static_cast<double>(uniq.size())) / n;
}

inline double distinct_2(const std::string& txt) {
  auto grams = text::word_ngrams(text::tokenize_words(txt), 2);
  if (grams.empty()) return 0.0;
  std::unordered_set<std::string> uniq(grams.begin(), grams.end());
  return static_cast<double>(uniq.size()) / static_cast<double>(grams.size());
}

inline double fourgram_repeat_pct(const std::string& txt) {
  auto grams = text::word_ngrams(text::tokenize_words(txt), 4);
  if (grams.empty()) return 0.0;
  std::unordered_set<std::string> uniq(grams.begin(), grams.end());
  double n = static_cast<double>(grams.size());
  return 100.0 * (n - static_cast<double>(uniq.size())) / n;
}

struct QualitySummary {
  double sd_pct = 0.0;
  double distinct2 = 0.0;
  double fourgram_pct = 0.0;
};

struct ConditionSummary {
  std::size_t count = 0;
  double mean_z = 0.0;
  double min_z = 0.0;
  double max_z = 0.0;
  double tp_at_fp1 = 0.0;
};

struct ExperimentReport {
  double tp_at_fp1 = 0.0;
  double tp_at_fp5 = 0.0;
  double auc = 0.0;
  double tau_used = 0.0;
  std::map<std::string, ConditionSummary> conditions;
  QualitySummary quality;
  std::vector<std::string> warnings;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

inline Histogram histogram(const std::vector<double>& values, double lo, double hi,
                           std::size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins));
  for (double v : values) {
    double f = (v - lo) / (hi - lo);
    auto b = static_cast<long>(std::floor(f * static_cast<double>(bins)));
    b = std::clamp<long>(b, 0, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

struct ExperimentConfig {
  PrivateKey key;
  GenerationConfig gen;
  DetectionConfig det;
  std::vector<AttackSpec> attack_grid;
  Lexicon lexicon;
  std::uint64_t seed = 0;
};

struct ExperimentOutput {
  ExperimentReport report;
  std::vector<ScoreSample> samples;
  std::map<std::string, Histogram> histograms;
};

// Control documents: same sampler, uniform choice from the raw pool, no
// watermark mechanism anywhere.
inline std::vector<std::string> generate_control_document(CandidateSampler& sampler,
                                                          const std::string& prompt,
                                                          const GenerationConfig& cfg,
                                                          std::mt19937_64& rng) {
  std::vector<std::string> sentences;
  std::string context = prompt;
  for (std::size_t t = 0; t < cfg.max_sentences; ++t) {
    auto pool = sampler.sample(context, cfg.pool_size, rng);
    if (pool.empty()) throw BackendError("sampler returned an empty pool");
    auto& pick = pool[rng() % pool.size()];
    if (!context.empty() && context.back() != ' ') context += ' ';
    context += pick;
    sentences.push_back(std::move(pick));
  }
  return sentences;
}

inline ExperimentOutput run_experiment(const std::vector<std::string>& prompts,
                                       const ExperimentConfig& cfg, CandidateSampler& sampler,
                                       Embedder& embedder) {
  if (prompts.empty()) throw ConfigError("experiment corpus is empty");
  ExperimentOutput out;

  std::vector<WatermarkedDocument> docs;
  std::vector<double> wm_scores, null_scores;
  std::map<std::string, std::vector<double>> attack_scores;

  std::mt19937_64 rng(cfg.seed);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    std::string id = "doc-" + std::to_string(i);
    auto doc = generate_document(sampler, embedder, cfg.key, prompts[i], cfg.gen, rng);
    double z = detect_sentences(doc.sentences, cfg.key, cfg.det, embedder).z;
    wm_scores.push_back(z);
    out.samples.push_back({id, "watermarked", z});

    auto control = generate_control_document(sampler, prompts[i], cfg.gen, rng);
    double zn = detect_sentences(control, cfg.key, cfg.det, embedder).z;
    null_scores.push_back(zn);
    out.samples.push_back({id, "unwatermarked", zn});

    for (const auto& spec : cfg.attack_grid) {
      std::string cond;
      double za;
      AttackSpec seeded = spec;
      seeded.seed = spec.seed ^ (0x9e3779b97f4a7c15ull * (i + 1));
      if (spec.kind == AttackSpec::Kind::embed_noise) {
        cond = "attacked:embed-noise@" + std::to_string(spec.angle);
        RotatingEmbedder noisy(embedder, spec.angle, seeded.seed);
        za = detect_sentences(doc.sentences, cfg.key, cfg.det, noisy).z;
      } else {
        switch (spec.kind) {
          case AttackSpec::Kind::shuffle: cond = "attacked:shuffle"; break;
          case AttackSpec::Kind::word_delete:
            cond = "attacked:word-delete@" + std::to_string(spec.ratio);
            break;
          default: cond = "attacked:word-substitute@" + std::to_string(spec.ratio); break;
        }
        auto attacked = attack_paragraph(doc.sentences, seeded, cfg.lexicon);
        za = detect_sentences(attacked, cfg.key, cfg.det, embedder).z;
      }
      attack_scores[cond].push_back(za);
      out.samples.push_back({id, cond, za});
    }
    docs.push_back(std::move(doc));
  }

  auto& rep = out.report;
  rep.tau_used = calibrate_threshold(null_scores, 0.01);
  rep.tp_at_fp1 = tp_at_fp(wm_scores, null_scores, 0.01);
  rep.tp_at_fp5 = tp_at_fp(wm_scores, null_scores, 0.05);
  rep.auc = auc(wm_scores, null_scores);
  if (null_scores.size() < 100)
    rep.warnings.push_back("fewer than 100 null scores; FP1% calibration is coarse");

  auto summarize = [&](const std::string& cond, const std::vector<double>& zs) {
    ConditionSummary s;
    s.count = zs.size();
    s.min_z = *std::min_element(zs.begin(), zs.end());
    s.max_z = *std::max_element(zs.begin(), zs.end());
    for (double z : zs) s.mean_z += z;
    s.mean_z /= static_cast<double>(zs.size());
    s.tp_at_fp1 = tp_at_fp(zs, null_scores, 0.01);
    rep.conditions[cond] = s;
  };
  summarize("watermarked", wm_scores);
  summarize("unwatermarked", null_scores);
  for (const auto& [cond, zs] : attack_scores) summarize(cond, zs);

  double lo = 1e300, hi = -1e300;
  for (const auto& s : out.samples) {
    lo = std::min(lo, s.z);
    hi = std::max(hi, s.z);
  }
  if (hi <= lo) hi = lo + 1.0;
  std::map<std::string, std::vector<double>> by_cond;
  for (const auto& s : out.samples) by_cond[s.condition].push_back(s.z);
  for (const auto& [cond, zs] : by_cond) out.histograms[cond] = histogram(zs, lo, hi, 40);

  double sd = 0.0, d2 = 0.0, fg = 0.0;
  for (const auto& doc : docs) {
    sd += sentence_duplicate_pct(doc.sentences);
    auto joined = text::join(doc.sentences);
    d2 += distinct_2(joined);
    fg += fourgram_repeat_pct(joined);
  }
  auto nd = static_cast<double>(docs.size());
  rep.quality = {sd / nd, d2 / nd, fg / nd};
  return out;
}

}  // namespace samark
