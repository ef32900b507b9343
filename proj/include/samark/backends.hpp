#pragma once

// Backend factories wiring the [embedder] and [sampler] config sections
// to concrete implementations.

#include <memory>
#include <string>

#include "samark/config.hpp"
#include "samark/remote.hpp"
#include "samark/sampler.hpp"

namespace samark {

namespace detail {

inline std::string section_get(const std::map<std::string, std::string>& section,
                               const std::string& key, const std::string& fallback) {
  auto it = section.find(key);
  return it == section.end() ? fallback : it->second;
}

}  // namespace detail

inline std::unique_ptr<Embedder> make_embedder(const RunConfig& cfg) {
  const auto& sec = cfg.embedder_section;
  std::string kind = detail::section_get(sec, "kind", "builtin-hash");
  std::size_t d = cfg.dimension;
  if (auto it = sec.find("dimension"); it != sec.end()) {
    d = detail::parse_number<std::size_t>("dimension", it->second);
    if (d != cfg.dimension)
      throw ConfigError("embedder dimension disagrees with top-level dimension");
  }
  if (kind == "builtin-hash") {
    std::vector<std::uint8_t> salt;
    for (char c : detail::section_get(sec, "salt", "")) salt.push_back(static_cast<std::uint8_t>(c));
    return std::make_unique<BuiltinHashEmbedder>(d, std::move(salt));
  }
  if (kind == "remote") {
    EmbedderConfig ecfg;
    ecfg.kind = EmbedderConfig::Kind::remote;
    ecfg.dimension = d;
    ecfg.endpoint_url = detail::section_get(sec, "endpoint_url", "");
    ecfg.timeout_ms = detail::parse_number<int>("timeout_ms",
                                                detail::section_get(sec, "timeout_ms", "10000"));
    ecfg.max_retries =
        detail::parse_number<int>("max_retries", detail::section_get(sec, "max_retries", "2"));
    ecfg.cache_capacity = detail::parse_number<std::size_t>(
        "cache_capacity", detail::section_get(sec, "cache_capacity", "4096"));
    return std::make_unique<RemoteEmbedder>(std::move(ecfg));
  }
  throw ConfigError("unknown embedder kind '" + kind + "'");
}

inline std::unique_ptr<CandidateSampler> make_sampler(const RunConfig& cfg) {
  const auto& sec = cfg.sampler_section;
  std::string kind = detail::section_get(sec, "kind", "mock");
  if (kind == "mock" || kind == "mock-repeating") {
    MockSamplerConfig mcfg;
    mcfg.vocab_size = detail::parse_number<std::size_t>(
        "vocab_size", detail::section_get(sec, "vocab_size", "500"));
    if (kind == "mock") return std::make_unique<MockSampler>(mcfg);
    auto base_count = detail::parse_number<std::size_t>(
        "base_count", detail::section_get(sec, "base_count", "5"));
    auto repeat_prob = detail::parse_number<double>(
        "repeat_prob", detail::section_get(sec, "repeat_prob", "0.7"));
    return std::make_unique<RepeatingMockSampler>(mcfg, base_count, repeat_prob, cfg.seed);
  }
  if (kind == "remote") {
    RemoteSamplerConfig rcfg;
    rcfg.endpoint_url = detail::section_get(sec, "endpoint_url", "");
    rcfg.timeout_ms = detail::parse_number<int>("timeout_ms",
                                                detail::section_get(sec, "timeout_ms", "30000"));
    rcfg.max_retries =
        detail::parse_number<int>("max_retries", detail::section_get(sec, "max_retries", "2"));
    rcfg.max_tokens =
        detail::parse_number<int>("max_tokens", detail::section_get(sec, "max_tokens", "64"));
    rcfg.temperature = detail::parse_number<double>(
        "temperature", detail::section_get(sec, "temperature", "0.7"));
    rcfg.top_p = detail::parse_number<double>("top_p", detail::section_get(sec, "top_p", "0.95"));
    return std::make_unique<RemoteCandidateSampler>(std::move(rcfg));
  }
  throw ConfigError("unknown sampler kind '" + kind + "'");
}

}  // namespace samark
