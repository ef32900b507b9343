#pragma once

// Candidate sampler backends. The contract: given the running context
// and a pool size, return that many sentence candidates, deterministic
// in the supplied rng. The mock sampler composes sentences from a
// synthetic vocabulary; the repeating sampler deliberately floods the
// pool with duplicates to exercise the diversity machinery.

#include <cctype>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "samark/errors.hpp"

namespace samark {

class CandidateSampler {
 public:
  virtual ~CandidateSampler() = default;
  virtual std::vector<std::string> sample(const std::string& context, std::size_t n,
                                          std::mt19937_64& rng) = 0;
};

namespace detail {

inline std::string synthetic_word(std::size_t index) {
  static const char* onsets[] = {"b",  "br", "c",  "cl", "d",  "dr", "f",  "fl",
                                 "g",  "gr", "h",  "j",  "k",  "l",  "m",  "n",
                                 "p",  "pl", "r",  "s",  "st", "t",  "tr", "v"};
  static const char* nuclei[] = {"a", "e", "i", "o", "u", "ai", "ea", "ou"};
  static const char* codas[] = {"n", "r", "l", "s", "t", "m", "nd", "ck", "sh", "th"};
  constexpr std::size_t no = sizeof(onsets) / sizeof(onsets[0]);
  constexpr std::size_t nn = sizeof(nuclei) / sizeof(nuclei[0]);
  constexpr std::size_t nc = sizeof(codas) / sizeof(codas[0]);
  std::string w;
  std::size_t x = index;
  w += onsets[x % no];
  x /= no;
  w += nuclei[x % nn];
  x /= nn;
  w += codas[x % nc];
  x /= nc;
  while (x > 0) {
    w += nuclei[x % nn];
    x /= nn;
    if (x > 0) {
      w += codas[x % nc];
      x /= nc;
    }
  }
  return w;
}

}  // namespace detail

struct MockSamplerConfig {
  std::size_t vocab_size = 500;
  std::size_t min_words = 7;
  std::size_t max_words = 12;
};

class MockSampler : public CandidateSampler {
 public:
  explicit MockSampler(MockSamplerConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.vocab_size < 1 || cfg_.min_words < 1 || cfg_.max_words < cfg_.min_words)
      throw ConfigError("invalid mock sampler config");
    vocab_.reserve(cfg_.vocab_size);
    for (std::size_t i = 0; i < cfg_.vocab_size; ++i)
      vocab_.push_back(detail::synthetic_word(i));
  }

  std::vector<std::string> sample(const std::string& /*context*/, std::size_t n,
                                  std::mt19937_64& rng) override {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(compose(rng));
    return out;
  }

 protected:
  std::string compose(std::mt19937_64& rng) {
    std::size_t span = cfg_.max_words - cfg_.min_words + 1;
    std::size_t k = cfg_.min_words + rng() % span;
    std::string s;
    for (std::size_t i = 0; i < k; ++i) {
      std::string w = vocab_[rng() % vocab_.size()];
      if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      if (i) s += ' ';
      s += w;
    }
    s += '.';
    return s;
  }

  MockSamplerConfig cfg_;
  std::vector<std::string> vocab_;
};

// Adversarial variant: a large share of every pool is drawn from a small
// fixed set of base sentences, so an unfiltered pipeline keeps re-emitting
// them.
class RepeatingMockSampler final : public MockSampler {
 public:
  RepeatingMockSampler(MockSamplerConfig cfg, std::size_t base_count, double repeat_prob,
                       std::uint64_t base_seed)
      : MockSampler(cfg), repeat_prob_(repeat_prob) {
    std::mt19937_64 base_rng(base_seed);
    for (std::size_t i = 0; i < base_count; ++i) base_.push_back(compose(base_rng));
  }

  std::vector<std::string> sample(const std::string& /*context*/, std::size_t n,
                                  std::mt19937_64& rng) override {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < repeat_prob_ && !base_.empty())
        out.push_back(base_[rng() % base_.size()]);
      else
        out.push_back(compose(rng));
    }
    return out;
  }

 private:
  double repeat_prob_;
  std::vector<std::string> base_;
};

// Degenerate sampler used by tests: the whole pool is one sentence.
class ConstantSampler final : public CandidateSampler {
 public:
  explicit ConstantSampler(std::string sentence) : sentence_(std::move(sentence)) {}
  std::vector<std::string> sample(const std::string&, std::size_t n, std::mt19937_64&) override {
    return std::vector<std::string>(n, sentence_);
  }

 private:
  std::string sentence_;
};

}  // namespace samark
