#pragma once

// Embedding backends. The built-in backend is bag-of-words feature
// hashing: deterministic, dependency-free, and sign-symmetric enough
// that random sentences land uniformly across channel sign patterns.
// The remote backend is a thin JSON-over-HTTP client with retry and an
// in-memory cache.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "samark/errors.hpp"
#include "samark/text.hpp"

namespace samark {

using UnitEmbedding = std::vector<double>;

struct EmbedderConfig {
  enum class Kind { builtin_hash, remote };
  Kind kind = Kind::builtin_hash;
  std::size_t dimension = 768;
  std::string endpoint_url;     // remote only
  int timeout_ms = 10000;       // remote only
  int max_retries = 2;          // remote only
  std::size_t cache_capacity = 4096;
  std::vector<std::uint8_t> salt;  // builtin only
};

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine: unequal dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine: zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& word, const std::vector<std::uint8_t>& salt) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (std::uint8_t b : salt) mix(b);
  for (char ch : word) mix(static_cast<std::uint8_t>(ch));
  return h;
}

inline void l2_normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
}

}  // namespace detail

// Signed feature hashing over lowercase words; empty-token text maps to
// the fixed basis vector e1.
inline UnitEmbedding hash_embed(const std::string& txt, std::size_t d,
                                const std::vector<std::uint8_t>& salt = {}) {
  std::vector<double> v(d, 0.0);
  auto words = text::tokenize_words(txt);
  if (words.empty()) {
    v[0] = 1.0;
    return v;
  }
  for (const auto& w : words) {
    std::uint64_t h = detail::fnv1a(w, salt);
    std::size_t idx = static_cast<std::size_t>((h >> 1) % d);
    double sign = (h & 1u) ? 1.0 : -1.0;
    v[idx] += sign;
  }
  detail::l2_normalize(v);
  return v;
}

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<UnitEmbedding> embed(const std::vector<std::string>& texts) = 0;
  UnitEmbedding embed_one(const std::string& txt) { return embed({txt}).front(); }
};

class BuiltinHashEmbedder final : public Embedder {
 public:
  explicit BuiltinHashEmbedder(std::size_t d, std::vector<std::uint8_t> salt = {})
      : d_(d), salt_(std::move(salt)) {
    if (d < 1) throw ConfigError("embedder dimension must be >= 1");
  }
  std::size_t dimension() const override { return d_; }
  std::vector<UnitEmbedding> embed(const std::vector<std::string>& texts) override {
    std::vector<UnitEmbedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, d_, salt_));
    return out;
  }

 private:
  std::size_t d_;
  std::vector<std::uint8_t> salt_;
};

}  // namespace samark
