#pragma once

// Blind detection: segment, embed, infer the flag pattern by majority
// vote over channel responses, align with the same hyperbolic transform
// used at generation, and run a z-test on the flattened alignment
// matrix. The statistic is a symmetric function of the sentence rows, so
// reordering the sentences cannot change it.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "samark/embedders.hpp"
#include "samark/errors.hpp"
#include "samark/keycore.hpp"
#include "samark/text.hpp"

namespace samark {

struct DetectionConfig {
  std::size_t channels = 2;
  double kappa = 30.0;
  double tau = 0.0;  // threshold, supplied by calibration
  bool hyperbolic = true;
};

struct ChannelResponseMatrix {
  std::vector<std::vector<double>> entries;  // n x c
  std::size_t rows() const { return entries.size(); }
  std::size_t cols() const { return entries.empty() ? 0 : entries.front().size(); }
};

struct DetectionResult {
  double z = 0.0;
  FlagPattern inferred_flags;
  double mean_alignment = 0.0;
  double stddev_alignment = 0.0;
  std::size_t sentence_count = 0;
  bool decision = false;
  double tau = 0.0;
};

inline std::vector<std::string> segment_sentences(const std::string& txt) {
  return text::segment_sentences(txt);
}

inline ChannelResponseMatrix channel_response_matrix(const std::vector<std::string>& sentences,
                                                     Embedder& embedder, const PivotSet& pivots) {
  ChannelResponseMatrix m;
  if (sentences.empty()) return m;
  auto embeddings = embedder.embed(sentences);
  m.entries.reserve(sentences.size());
  for (const auto& e : embeddings) {
    std::vector<double> row;
    row.reserve(pivots.channels());
    for (std::size_t j = 0; j < pivots.channels(); ++j)
      row.push_back(cosine(e, pivots.vectors[j]));
    m.entries.push_back(std::move(row));
  }
  return m;
}

// Majority vote per channel: sign of the column sum, ties to +1.
inline FlagPattern infer_flags(const ChannelResponseMatrix& m) {
  if (m.rows() < 1) throw TooFewSamples("flag inference needs at least one sentence");
  FlagPattern flags;
  flags.flags.reserve(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) sum += m.entries[i][j];
    flags.flags.push_back(sum < 0.0 ? -1 : 1);
  }
  return flags;
}

// A_{i,j} = tanh(kappa * C_{i,j} * r_j); linear variant for ablation.
inline std::vector<std::vector<double>> alignment_matrix(const ChannelResponseMatrix& m,
                                                         const FlagPattern& flags, double kappa,
                                                         bool hyperbolic = true) {
  if (kappa <= 0.0) throw ConfigError("kappa must be > 0");
  if (flags.size() != m.cols()) throw DimensionMismatch("flag/column count");
  std::vector<std::vector<double>> a(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double v = m.entries[i][j] * flags.flags[j];
      a[i][j] = hyperbolic ? std::tanh(kappa * v) : v;
    }
  return a;
}

// Population-form z over the flattened matrix: z = mean * sqrt(nc) / sd.
inline void z_statistic(const std::vector<std::vector<double>>& a, double& z, double& mean,
                        double& sd) {
  std::size_t count = 0;
  double sum = 0.0;
  for (const auto& row : a) {
    count += row.size();
    for (double v : row) sum += v;
  }
  if (count < 2) throw TooFewSamples("z-statistic needs at least 2 samples");
  mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const auto& row : a)
    for (double v : row) sq += (v - mean) * (v - mean);
  sd = std::sqrt(sq / static_cast<double>(count));
  if (sd < 1e-12) throw ZeroVariance("all alignment entries identical");
  z = mean * std::sqrt(static_cast<double>(count)) / sd;
}

// Sentence-list entry point; bypasses segmentation so attack experiments
// compose without segmentation drift.
inline DetectionResult detect_sentences(const std::vector<std::string>& sentences,
                                        const PrivateKey& key, const DetectionConfig& cfg,
                                        Embedder& embedder) {
  if (sentences.empty()) throw TooFewSamples("no sentences to score");
  PivotSet pivots = derive_pivots(key, cfg.channels, embedder.dimension());
  auto responses = channel_response_matrix(sentences, embedder, pivots);
  DetectionResult result;
  result.sentence_count = sentences.size();
  result.inferred_flags = infer_flags(responses);
  auto aligned = alignment_matrix(responses, result.inferred_flags, cfg.kappa, cfg.hyperbolic);
  z_statistic(aligned, result.z, result.mean_alignment, result.stddev_alignment);
  result.tau = cfg.tau;
  result.decision = result.z > cfg.tau;
  return result;
}

inline DetectionResult detect(const std::string& txt, const PrivateKey& key,
                              const DetectionConfig& cfg, Embedder& embedder) {
  return detect_sentences(segment_sentences(txt), key, cfg, embedder);
}

// Comparator regime: per-position flags r_i from (key, i). Intentionally
// not permutation-invariant.
inline DetectionResult detect_step_keyed(const std::vector<std::string>& sentences,
                                         const PrivateKey& key, const DetectionConfig& cfg,
                                         Embedder& embedder) {
  if (sentences.empty()) throw TooFewSamples("no sentences to score");
  PivotSet pivots = derive_pivots(key, cfg.channels, embedder.dimension());
  auto responses = channel_response_matrix(sentences, embedder, pivots);
  std::vector<std::vector<double>> aligned(responses.rows(),
                                           std::vector<double>(responses.cols()));
  for (std::size_t i = 0; i < responses.rows(); ++i) {
    FlagPattern flags = detail::step_flags(key, i + 1, cfg.channels);
    for (std::size_t j = 0; j < responses.cols(); ++j) {
      double v = responses.entries[i][j] * flags.flags[j];
      aligned[i][j] = cfg.hyperbolic ? std::tanh(cfg.kappa * v) : v;
    }
  }
  DetectionResult result;
  result.sentence_count = sentences.size();
  z_statistic(aligned, result.z, result.mean_alignment, result.stddev_alignment);
  result.tau = cfg.tau;
  result.decision = result.z > cfg.tau;
  return result;
}

}  // namespace samark
