#pragma once

// Desk-scale attack simulations: sentence shuffling, word deletion and
// substitution, and angular noise in embedding space as a paraphrase
// proxy. Word attacks operate on whole paragraphs (concatenate, attack,
// re-segment).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "samark/embedders.hpp"
#include "samark/errors.hpp"
#include "samark/text.hpp"

namespace samark {

struct AttackSpec {
  enum class Kind { shuffle, word_delete, word_substitute, embed_noise };
  Kind kind = Kind::shuffle;
  double ratio = 0.0;   // word attacks, in [0,1]
  double angle = 0.0;   // embed-noise, radians in [0, pi/2]
  std::uint64_t seed = 0;

  void validate() const {
    if (ratio < 0.0 || ratio > 1.0) throw ConfigError("attack ratio must be in [0,1]");
    if (angle < 0.0 || angle > 1.5707963267948966)
      throw ConfigError("attack angle must be in [0, pi/2]");
  }
};

using Lexicon = std::map<std::string, std::vector<std::string>>;

inline std::vector<std::string> shuffle_sentences(std::vector<std::string> sentences,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = sentences.size(); i > 1; --i)
    std::swap(sentences[i - 1], sentences[rng() % i]);
  return sentences;
}

namespace detail {

inline std::vector<std::string> whitespace_split(const std::string& s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

// floor(ratio * n) distinct positions, uniform without replacement
inline std::vector<std::size_t> pick_positions(std::size_t n, double ratio, std::mt19937_64& rng) {
  auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k && i < n; ++i) std::swap(idx[i], idx[i + rng() % (n - i)]);
  idx.resize(std::min(k, n));
  return idx;
}

}  // namespace detail

inline std::string delete_words(const std::string& sentence, double ratio, std::uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw ConfigError("ratio must be in [0,1]");
  auto words = detail::whitespace_split(sentence);
  std::mt19937_64 rng(seed);
  auto doomed = detail::pick_positions(words.size(), ratio, rng);
  std::vector<bool> drop(words.size(), false);
  for (auto p : doomed) drop[p] = true;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (!drop[i]) kept.push_back(words[i]);
  return text::join(kept);
}

inline std::string substitute_words(const std::string& sentence, double ratio,
                                    const Lexicon& lexicon, std::uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw ConfigError("ratio must be in [0,1]");
  if (lexicon.empty()) throw EmptyLexicon("substitution lexicon is empty");
  auto words = detail::whitespace_split(sentence);
  std::mt19937_64 rng(seed);
  auto targets = detail::pick_positions(words.size(), ratio, rng);
  for (auto p : targets) {
    auto it = lexicon.find(text::to_lower(words[p]));
    if (it != lexicon.end() && !it->second.empty()) {
      words[p] = it->second[rng() % it->second.size()];
    } else {
      auto entry = lexicon.begin();
      std::advance(entry, rng() % lexicon.size());
      words[p] = entry->first;
    }
  }
  return text::join(words);
}

// Rotates e by `angle` toward a seeded random direction orthogonal to e.
inline UnitEmbedding rotate_embedding(const UnitEmbedding& e, double angle, std::uint64_t seed) {
  double norm = 0.0;
  for (double x : e) norm += x * x;
  if (norm == 0.0) throw ZeroVector("cannot rotate the zero vector");
  norm = std::sqrt(norm);

  std::mt19937_64 rng(seed);
  std::vector<double> u(e.size());
  for (int tries = 0; tries < 16; ++tries) {
    for (auto& x : u) {
      // crude symmetric noise is enough for a direction draw
      double a = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      double b = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      x = a - b;
    }
    double proj = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) proj += u[i] * e[i] / norm;
    double un = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      u[i] -= proj * e[i] / norm;
      un += u[i] * u[i];
    }
    un = std::sqrt(un);
    if (un > 1e-12) {
      for (auto& x : u) x /= un;
      break;
    }
  }
  std::vector<double> out(e.size());
  double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = c * e[i] / norm + s * u[i];
  detail::l2_normalize(out);
  return out;
}

// Paragraph-level word attack: join, perturb, re-segment.
inline std::vector<std::string> attack_paragraph(const std::vector<std::string>& sentences,
                                                 const AttackSpec& spec, const Lexicon& lexicon) {
  spec.validate();
  switch (spec.kind) {
    case AttackSpec::Kind::shuffle:
      return shuffle_sentences(sentences, spec.seed);
    case AttackSpec::Kind::word_delete:
      return text::segment_sentences(delete_words(text::join(sentences), spec.ratio, spec.seed));
    case AttackSpec::Kind::word_substitute:
      return text::segment_sentences(
          substitute_words(text::join(sentences), spec.ratio, lexicon, spec.seed));
    case AttackSpec::Kind::embed_noise:
      throw ConfigError("embed-noise operates on embeddings, not sentence text");
  }
  throw ConfigError("unknown attack kind");
}

// Embedder decorator applying angular noise per text; the paraphrase
// proxy for detection-side experiments. Deterministic per (seed, text).
class RotatingEmbedder final : public Embedder {
 public:
  RotatingEmbedder(Embedder& inner, double angle, std::uint64_t seed)
      : inner_(inner), angle_(angle), seed_(seed) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  std::vector<UnitEmbedding> embed(const std::vector<std::string>& texts) override {
    auto out = inner_.embed(texts);
    if (angle_ == 0.0) return out;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = rotate_embedding(out[i], angle_, seed_ ^ detail::fnv1a(texts[i], {}));
    return out;
  }

 private:
  Embedder& inner_;
  double angle_;
  std::uint64_t seed_;
};

inline Lexicon load_lexicon(std::istream& in) {
  Lexicon lex;
  std::string word, repl;
  while (in >> word >> repl) lex[text::to_lower(word)].push_back(repl);
  return lex;
}

}  // namespace samark
