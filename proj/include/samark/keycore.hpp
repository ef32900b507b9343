#pragma once

// Key-derived channel geometry. The private key deterministically yields
// c orthonormal pivot directions in the d-dimensional embedding space;
// green-region membership of an embedding is the per-channel sign match
// against a flag pattern and carries no notion of position.

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "samark/errors.hpp"

namespace samark {

struct PrivateKey {
  std::vector<std::uint8_t> bytes;

  static PrivateKey from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw ConfigError("key hex string has odd length");
    PrivateKey k;
    k.bytes.reserve(hex.size() / 2);
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw ConfigError("invalid hex digit in key");
    };
    for (std::size_t i = 0; i < hex.size(); i += 2)
      k.bytes.push_back(static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
    return k;
  }
};

struct PivotSet {
  std::vector<std::vector<double>> vectors;  // c unit vectors, each d-dim
  std::size_t channels() const { return vectors.size(); }
  std::size_t dimension() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

struct FlagPattern {
  std::vector<int> flags;  // entries in {-1, +1}
  std::size_t size() const { return flags.size(); }
  bool operator==(const FlagPattern&) const = default;
};

namespace detail {

inline std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int out_len = 0;
  EVP_Digest(data, len, digest.data(), &out_len, EVP_sha256(), nullptr);
  return digest;
}

// Domain-separated seeding: digest of key bytes || tag || c || d.
inline std::uint64_t derive_seed(const PrivateKey& key, const std::string& tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::vector<std::uint8_t> buf(key.bytes);
  buf.insert(buf.end(), tag.begin(), tag.end());
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(a >> (8 * i)));
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(b >> (8 * i)));
  auto digest = sha256(buf.data(), buf.size());
  std::uint64_t seed = 0;
  std::memcpy(&seed, digest.data(), sizeof(seed));
  return seed;
}

// Uniform in (0,1] from the top 53 bits, then Box-Muller. Self-contained
// so the Gaussian stream does not depend on libstdc++ distribution
// internals.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double uniform01() {
    // (0,1]: never returns 0, so log() above is safe
    return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

// QR-style orthonormalization (modified Gram-Schmidt) of a key-seeded
// Gaussian d x c matrix; columns get a sign convention (first nonzero
// component positive) so the result is unique.
inline PivotSet derive_pivots(const PrivateKey& key, std::size_t c, std::size_t d) {
  if (c < 1 || c > d) throw InvalidChannelCount("require 1 <= c <= d");
  detail::GaussianStream gauss(detail::derive_seed(key, "samark/pivots/v1", c, d));
  PivotSet pivots;
  pivots.vectors.resize(c, std::vector<double>(d));
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i < d; ++i) pivots.vectors[j][i] = gauss.next();

  for (std::size_t j = 0; j < c; ++j) {
    auto& v = pivots.vectors[j];
    for (std::size_t k = 0; k < j; ++k) {
      const auto& q = pivots.vectors[k];
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += v[i] * q[i];
      for (std::size_t i = 0; i < d; ++i) v[i] -= proj * q[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    // Gaussian columns are linearly independent almost surely; a
    // degenerate draw would indicate a broken stream.
    if (norm < 1e-12) throw Error("degenerate pivot column");
    for (double& x : v) x /= norm;
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i] != 0.0) {
        if (v[i] < 0.0)
          for (double& x : v) x = -x;
        break;
      }
    }
  }
  return pivots;
}

inline FlagPattern sample_flag_pattern(std::mt19937_64& rng, std::size_t c) {
  if (c < 1) throw InvalidChannelCount("require c >= 1");
  FlagPattern p;
  p.flags.reserve(c);
  for (std::size_t j = 0; j < c; ++j) p.flags.push_back((rng() & 1u) ? 1 : -1);
  return p;
}

namespace detail {

// Per-step flag pattern for the step-keyed comparator regime.
inline FlagPattern step_flags(const PrivateKey& key, std::size_t step, std::size_t c) {
  std::mt19937_64 rng(derive_seed(key, "samark/step-flags/v1", step, c));
  return sample_flag_pattern(rng, c);
}

inline double cosine_against_unit(const std::vector<double>& e, const std::vector<double>& unit) {
  double dot = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    dot += e[i] * unit[i];
    norm += e[i] * e[i];
  }
  if (norm == 0.0) throw ZeroVector("zero embedding");
  double c = dot / std::sqrt(norm);
  return c < -1.0 ? -1.0 : (c > 1.0 ? 1.0 : c);
}

}  // namespace detail

// sigma_j = r_j * cos(e, v_j)
inline std::vector<double> signed_channel_similarities(const std::vector<double>& e,
                                                       const PivotSet& pivots,
                                                       const FlagPattern& flags) {
  if (e.size() != pivots.dimension()) throw DimensionMismatch("embedding/pivot dimension");
  if (flags.size() != pivots.channels()) throw DimensionMismatch("flag/channel count");
  std::vector<double> sims;
  sims.reserve(pivots.channels());
  for (std::size_t j = 0; j < pivots.channels(); ++j)
    sims.push_back(flags.flags[j] * detail::cosine_against_unit(e, pivots.vectors[j]));
  return sims;
}

// Strict sign match on every channel; sgn(0) = -1, so a boundary
// embedding never matches a +1 target. No step argument by design.
inline bool green_membership(const std::vector<double>& e, const PivotSet& pivots,
                             const FlagPattern& flags) {
  if (e.size() != pivots.dimension()) throw DimensionMismatch("embedding/pivot dimension");
  if (flags.size() != pivots.channels()) throw DimensionMismatch("flag/channel count");
  for (std::size_t j = 0; j < pivots.channels(); ++j) {
    double c = detail::cosine_against_unit(e, pivots.vectors[j]);
    int sign = c > 0.0 ? 1 : -1;
    if (sign != flags.flags[j]) return false;
  }
  return true;
}

}  // namespace samark
