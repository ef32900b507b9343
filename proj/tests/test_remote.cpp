#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "samark/remote.hpp"

using namespace samark;
using nlohmann::json;

namespace {

// Minimal in-process embedding/sampling service for client tests.
struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> embed_requests{0};
  std::atomic<int> fail_next{0};
  std::size_t width = 8;

  TestServer() {
    server.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_requests;
      if (fail_next > 0) {
        --fail_next;
        res.status = 503;
        return;
      }
      auto body = json::parse(req.body);
      json embeddings = json::array();
      for (const auto& t : body["texts"]) {
        std::vector<double> v(width, 0.0);
        v[0] = 3.0;  // un-normalized on purpose; the client must renormalize
        v[1] = static_cast<double>(t.get<std::string>().size() % 7);
        embeddings.push_back(v);
      }
      res.set_content(json{{"embeddings", embeddings}}.dump(), "application/json");
    });
    server.Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body);
      auto n = body["n"].get<std::size_t>();
      json cands = json::array();
      for (std::size_t i = 0; i < n; ++i)
        cands.push_back("Candidate number " + std::to_string(i) + " here.");
      res.set_content(json{{"candidates", cands}}.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer() {
    server.stop();
    thread.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }
};

EmbedderConfig remote_cfg(const TestServer& srv, std::size_t d) {
  EmbedderConfig cfg;
  cfg.kind = EmbedderConfig::Kind::remote;
  cfg.dimension = d;
  cfg.endpoint_url = srv.url("/embed");
  cfg.timeout_ms = 2000;
  cfg.max_retries = 2;
  return cfg;
}

}  // namespace

TEST_CASE("remote embedder returns normalized order-preserving batch") {
  TestServer srv;
  RemoteEmbedder embedder(remote_cfg(srv, 8));
  auto out = embedder.embed({"aa", "bbb", "cccc"});
  REQUIRE(out.size() == 3);
  for (const auto& e : out) {
    REQUIRE(e.size() == 8);
    double norm = 0.0;
    for (double x : e) norm += x * x;
    REQUIRE(std::abs(std::sqrt(norm) - 1.0) < 1e-9);
  }
}

TEST_CASE("remote embedder rejects wrong width") {
  TestServer srv;
  RemoteEmbedder embedder(remote_cfg(srv, 16));  // service serves width 8
  REQUIRE_THROWS_AS(embedder.embed({"text"}), DimensionMismatch);
}

TEST_CASE("remote embedder caches by text") {
  TestServer srv;
  RemoteEmbedder embedder(remote_cfg(srv, 8));
  embedder.embed({"same text"});
  int after_first = srv.embed_requests;
  auto again = embedder.embed({"same text"});
  REQUIRE(srv.embed_requests == after_first);
  REQUIRE(again.size() == 1);
}

TEST_CASE("remote embedder retries transient failures") {
  TestServer srv;
  srv.fail_next = 1;
  RemoteEmbedder embedder(remote_cfg(srv, 8));
  auto out = embedder.embed({"retry me"});
  REQUIRE(out.size() == 1);
  REQUIRE(srv.embed_requests >= 2);
}

TEST_CASE("remote embedder surfaces persistent failure") {
  TestServer srv;
  srv.fail_next = 10;
  RemoteEmbedder embedder(remote_cfg(srv, 8));
  REQUIRE_THROWS_AS(embedder.embed({"doomed"}), RemoteError);
}

TEST_CASE("remote embedder requires non-empty batch") {
  TestServer srv;
  RemoteEmbedder embedder(remote_cfg(srv, 8));
  REQUIRE_THROWS_AS(embedder.embed({}), ConfigError);
}

TEST_CASE("remote sampler accumulates the requested pool") {
  TestServer srv;
  RemoteSamplerConfig cfg;
  cfg.endpoint_url = srv.url("/generate");
  cfg.timeout_ms = 2000;
  RemoteSampler sampler(cfg);
  auto pool = sampler.sample("Some context.", 5);
  REQUIRE(pool.size() == 5);
  for (const auto& s : pool) REQUIRE_FALSE(s.empty());
}
