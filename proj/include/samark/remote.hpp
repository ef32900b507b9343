#pragma once

// HTTP clients for real embedding / text-generation services.
// Embedding wire format: POST {"texts": [...]} -> {"embeddings": [[...], ...]}.
// Sampler wire format:   POST {"prompt", "n", "max_tokens", "temperature"}
//                        -> {"candidates": [...]}.

#include <chrono>
#include <cstdlib>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "samark/embedders.hpp"
#include "samark/errors.hpp"
#include "samark/sampler.hpp"

namespace samark {

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host:port
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint url missing scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline nlohmann::json post_json_with_retry(const std::string& url, const nlohmann::json& body,
                                           int timeout_ms, int max_retries) {
  auto [base, path] = split_url(url);
  std::string payload = body.dump();
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
    httplib::Client client(base);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server status " + std::to_string(res->status);
      continue;  // transient
    }
    if (res->status != 200)
      throw RemoteError("remote returned status " + std::to_string(res->status));
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw RemoteError(std::string("remote returned invalid JSON: ") + e.what());
    }
  }
  throw RemoteError("remote request failed after retries: " + last_error);
}

}  // namespace detail

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.kind != EmbedderConfig::Kind::remote) throw ConfigError("config kind is not remote");
    if (cfg_.endpoint_url.empty()) throw ConfigError("remote embedder needs an endpoint url");
    if (const char* env = std::getenv("SAMARK_EMBED_ENDPOINT")) cfg_.endpoint_url = env;
  }

  std::size_t dimension() const override { return cfg_.dimension; }

  std::vector<UnitEmbedding> embed(const std::vector<std::string>& texts) override {
    if (texts.empty()) throw ConfigError("remote embedder requires a non-empty batch");
    std::vector<UnitEmbedding> out(texts.size());
    std::vector<std::size_t> missing;
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        auto it = cache_.find(texts[i]);
        if (it != cache_.end())
          out[i] = it->second;
        else
          missing.push_back(i);
      }
    }
    if (missing.empty()) return out;

    std::vector<std::string> batch;
    batch.reserve(missing.size());
    for (auto i : missing) batch.push_back(texts[i]);
    nlohmann::json resp = detail::post_json_with_retry(
        cfg_.endpoint_url, nlohmann::json{{"texts", batch}}, cfg_.timeout_ms, cfg_.max_retries);
    if (!resp.contains("embeddings") || !resp["embeddings"].is_array() ||
        resp["embeddings"].size() != batch.size())
      throw RemoteError("embedding response shape mismatch");

    std::lock_guard<std::mutex> lock(mu_);
    for (std::size_t k = 0; k < missing.size(); ++k) {
      std::vector<double> v = resp["embeddings"][k].get<std::vector<double>>();
      if (v.size() != cfg_.dimension)
        throw DimensionMismatch("service returned width " + std::to_string(v.size()) +
                                ", expected " + std::to_string(cfg_.dimension));
      detail::l2_normalize(v);
      out[missing[k]] = v;
      cache_insert(texts[missing[k]], out[missing[k]]);
    }
    return out;
  }

 private:
  void cache_insert(const std::string& key, const UnitEmbedding& v) {
    if (cfg_.cache_capacity == 0) return;
    if (cache_.size() >= cfg_.cache_capacity && !order_.empty()) {
      cache_.erase(order_.front());
      order_.pop_front();
    }
    if (cache_.emplace(key, v).second) order_.push_back(key);
  }

  EmbedderConfig cfg_;
  std::mutex mu_;
  std::unordered_map<std::string, UnitEmbedding> cache_;
  std::deque<std::string> order_;
};

struct RemoteSamplerConfig {
  std::string endpoint_url;
  int timeout_ms = 30000;
  int max_retries = 2;
  int max_tokens = 64;
  double temperature = 0.7;
  double top_p = 0.95;
};

// Posts the running context to a generation endpoint and accumulates
// sentence candidates until the requested pool size is reached.
class RemoteSampler {
 public:
  explicit RemoteSampler(RemoteSamplerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint_url.empty()) throw ConfigError("remote sampler needs an endpoint url");
    if (const char* env = std::getenv("SAMARK_SAMPLER_ENDPOINT")) cfg_.endpoint_url = env;
  }

  std::vector<std::string> sample(const std::string& context, std::size_t n) {
    std::vector<std::string> candidates;
    int stalls = 0;
    while (candidates.size() < n) {
      nlohmann::json resp = detail::post_json_with_retry(
          cfg_.endpoint_url,
          nlohmann::json{{"prompt", context},
                         {"n", n - candidates.size()},
                         {"max_tokens", cfg_.max_tokens},
                         {"temperature", cfg_.temperature},
                         {"top_p", cfg_.top_p}},
          cfg_.timeout_ms, cfg_.max_retries);
      if (!resp.contains("candidates") || !resp["candidates"].is_array())
        throw RemoteError("sampler response missing candidates");
      std::size_t before = candidates.size();
      for (const auto& item : resp["candidates"]) {
        for (auto& sentence : text::segment_sentences(item.get<std::string>())) {
          if (candidates.size() < n) candidates.push_back(std::move(sentence));
        }
      }
      if (candidates.size() == before && ++stalls > 3)
        throw RemoteError("sampler produced no candidates");
    }
    return candidates;
  }

 private:
  RemoteSamplerConfig cfg_;
};

// Adapter to the generator's sampler contract; the remote service owns
// its own randomness, so the rng is unused.
class RemoteCandidateSampler final : public CandidateSampler {
 public:
  explicit RemoteCandidateSampler(RemoteSamplerConfig cfg) : inner_(std::move(cfg)) {}
  std::vector<std::string> sample(const std::string& context, std::size_t n,
                                  std::mt19937_64&) override {
    return inner_.sample(context, n);
  }

 private:
  RemoteSampler inner_;
};

}  // namespace samark
