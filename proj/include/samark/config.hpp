#pragma once

// Flat key-value config file with [embedder] and [sampler] sections.
// Schema is documented in the README; environment variables override
// endpoint URLs only (SAMARK_EMBED_ENDPOINT, SAMARK_SAMPLER_ENDPOINT).

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "samark/attacks.hpp"
#include "samark/detector.hpp"
#include "samark/embedders.hpp"
#include "samark/errors.hpp"
#include "samark/generator.hpp"
#include "samark/keycore.hpp"
#include "samark/sampler.hpp"

namespace samark {

struct RunConfig {
  std::string key_hex;
  GenerationConfig gen;
  DetectionConfig det;
  std::size_t dimension = 768;
  std::uint64_t seed = 0;
  std::vector<double> fp_rates = {0.01, 0.05};
  bool has_tau = false;
  double tau = 0.0;

  std::map<std::string, std::string> embedder_section;
  std::map<std::string, std::string> sampler_section;

  PrivateKey key() const {
    if (key_hex.empty()) throw ConfigError("key_hex is required");
    return PrivateKey::from_hex(key_hex);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T out{};
  ss >> out;
  if (ss.fail() || !ss.eof()) throw ConfigError("bad numeric value for " + key + ": " + value);
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "embedder" && section != "sampler")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string k = detail::trim(line.substr(0, eq));
    std::string v = detail::trim(line.substr(eq + 1));

    if (section == "embedder") {
      cfg.embedder_section[k] = v;
      continue;
    }
    if (section == "sampler") {
      cfg.sampler_section[k] = v;
      continue;
    }
    if (k == "key_hex") cfg.key_hex = v;
    else if (k == "channels") {
      cfg.gen.channels = detail::parse_number<std::size_t>(k, v);
      cfg.det.channels = cfg.gen.channels;
    } else if (k == "dimension") cfg.dimension = detail::parse_number<std::size_t>(k, v);
    else if (k == "kappa") {
      cfg.gen.kappa = detail::parse_number<double>(k, v);
      cfg.det.kappa = cfg.gen.kappa;
    } else if (k == "epsilon") cfg.gen.epsilon = detail::parse_number<double>(k, v);
    else if (k == "lambda_div") cfg.gen.lambda_div = detail::parse_number<double>(k, v);
    else if (k == "lambda_nov") cfg.gen.lambda_nov = detail::parse_number<double>(k, v);
    else if (k == "theta_ngram") cfg.gen.theta_ngram = detail::parse_number<double>(k, v);
    else if (k == "theta_sem") cfg.gen.theta_sem = detail::parse_number<double>(k, v);
    else if (k == "ngram_n") cfg.gen.ngram_n = detail::parse_number<std::size_t>(k, v);
    else if (k == "budget_n") cfg.gen.pool_size = detail::parse_number<std::size_t>(k, v);
    else if (k == "max_sentences") cfg.gen.max_sentences = detail::parse_number<std::size_t>(k, v);
    else if (k == "max_pool_retries")
      cfg.gen.max_pool_retries = detail::parse_number<std::size_t>(k, v);
    else if (k == "ngram_filter") cfg.gen.ngram_filter = (v == "true" || v == "1");
    else if (k == "sem_filter") cfg.gen.sem_filter = (v == "true" || v == "1");
    else if (k == "hyperbolic") {
      cfg.gen.hyperbolic = (v == "true" || v == "1");
      cfg.det.hyperbolic = cfg.gen.hyperbolic;
    } else if (k == "seed") cfg.seed = detail::parse_number<std::uint64_t>(k, v);
    else if (k == "tau") {
      cfg.tau = detail::parse_number<double>(k, v);
      cfg.det.tau = cfg.tau;
      cfg.has_tau = true;
    } else if (k == "fp_rates") {
      cfg.fp_rates.clear();
      std::istringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ','))
        cfg.fp_rates.push_back(detail::parse_number<double>(k, detail::trim(item)));
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  cfg.gen.validate();
  if (cfg.gen.channels > cfg.dimension) throw ConfigError("channels exceed dimension");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_run_config(in);
}

}  // namespace samark
