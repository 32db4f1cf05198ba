#include "coderag/embedding.hpp"
#include "coderag/errors.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

using namespace coderag;
using nlohmann::json;

namespace {

EmbedderConfig test_config(std::size_t dim = 8) {
    EmbedderConfig config;
    config.provider = EmbedProvider::deterministic_test;
    config.dim = dim;
    return config;
}

} // namespace

TEST_CASE("deterministic embedder is a pure function of the text") {
    auto embedder = make_embedder(test_config());
    auto a = embedder->embed_batch({"x"});
    auto b = embedder->embed_batch({"x"});
    REQUIRE(a.size() == 1);
    CHECK(a[0] == b[0]); // bitwise identical
    CHECK(a[0].size() == 8);
}

TEST_CASE("deterministic embedder output is L2-normalized") {
    auto embedder = make_embedder(test_config(16));
    for (const char* text : {"x", "apply_gate(state)", "a longer sentence with many words"}) {
        auto vec = embedder->embed_one(text);
        double norm = 0.0;
        for (float v : vec)
            norm += static_cast<double>(v) * v;
        CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-6);
    }
}

TEST_CASE("embed_batch rejects empty input") {
    auto embedder = make_embedder(test_config());
    CHECK_THROWS_AS(embedder->embed_batch({}), ConfigError);
    CHECK_THROWS_AS(embedder->embed_batch({""}), ConfigError);
}

TEST_CASE("cosine similarity worked examples") {
    CHECK(cosine_sim({1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(cosine_sim({1, 0}, {0, 1}) == doctest::Approx(0.0));
    // oracle: dot = 2+2+4 = 8, norms = 3 and 3
    CHECK(cosine_sim({1, 2, 2}, {2, 1, 2}) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("cosine similarity errors") {
    CHECK_THROWS_AS(cosine_sim({1, 2}, {1, 2, 3}), DomainError);
    CHECK_THROWS_AS(cosine_sim({0, 0}, {1, 2}), DomainError);
}

TEST_CASE("cosine symmetry and scale invariance") {
    std::mt19937_64 rng{99};
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (int trial = 0; trial < 50; ++trial) {
        EmbeddingVector u(12), v(12);
        for (std::size_t i = 0; i < 12; ++i) {
            u[i] = dist(rng);
            v[i] = dist(rng);
        }
        CHECK(cosine_sim(u, v) == cosine_sim(v, u)); // exact
        // power-of-two scaling is exact in binary floating point, so this
        // perturbs nothing but the stored exponents
        EmbeddingVector scaled = u;
        for (auto& x : scaled)
            x *= 4.0f;
        CHECK(std::fabs(cosine_sim(scaled, v) - cosine_sim(u, v)) < 1e-9);
        CHECK(cosine_sim(u, v) >= -1.0 - 1e-12);
        CHECK(cosine_sim(u, v) <= 1.0 + 1e-12);
    }
}

TEST_CASE("http provider returns stubbed vectors verbatim") {
    // replay fixture: the stub returns fixed, known vectors
    const std::vector<std::vector<float>> replay = {{0.5f, -0.25f, 0.125f, 1.0f},
                                                    {-1.0f, 0.75f, 0.0f, 0.25f}};
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        auto body = json::parse(req.body);
        REQUIRE(body.contains("model"));
        REQUIRE(body.contains("input"));
        json rows = json::array();
        for (std::size_t i = 0; i < body["input"].size(); ++i)
            rows.push_back(replay[i % replay.size()]);
        res.set_content(json{{"embeddings", rows}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    EmbedderConfig config;
    config.provider = EmbedProvider::http;
    config.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/embed";
    config.dim = 4;
    config.batch_size = 2;
    auto embedder = make_embedder(config);

    auto out = embedder->embed_batch({"first text", "second text"});
    REQUIRE(out.size() == 2);
    CHECK(out[0] == EmbeddingVector(replay[0]));
    CHECK(out[1] == EmbeddingVector(replay[1]));
    CHECK(requests.load() == 1);

    SUBCASE("batches are limited to batch_size per request") {
        requests = 0;
        auto many = embedder->embed_batch({"a", "b", "c", "d", "e"});
        CHECK(many.size() == 5);
        CHECK(requests.load() == 3); // 2 + 2 + 1
    }

    server.stop();
    runner.join();
}

TEST_CASE("http provider retries 5xx and fails on dimension mismatch") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/flaky", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits <= 2) {
            res.status = 503;
            return;
        }
        auto body = json::parse(req.body);
        json rows = json::array();
        for (std::size_t i = 0; i < body["input"].size(); ++i)
            rows.push_back(std::vector<float>{1.0f, 2.0f});
        res.set_content(json{{"embeddings", rows}}.dump(), "application/json");
    });
    server.Post("/narrow", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"embeddings", {{1.0}}}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    EmbedderConfig config;
    config.provider = EmbedProvider::http;
    config.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/flaky";
    config.dim = 2;
    auto embedder = make_embedder(config);
    auto out = embedder->embed_batch({"text"});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == EmbeddingVector{1.0f, 2.0f});
    CHECK(hits.load() == 3); // two 503s then success

    config.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/narrow";
    config.dim = 3;
    auto narrow = make_embedder(config);
    CHECK_THROWS_AS(narrow->embed_batch({"text"}), ProviderError);

    server.stop();
    runner.join();
}

TEST_CASE("http provider gives up after exhausting retries") {
    EmbedderConfig config;
    config.provider = EmbedProvider::http;
    config.endpoint_url = "http://127.0.0.1:9/unreachable"; // discard port
    config.dim = 2;
    config.timeout_ms = 200;
    config.max_retries = 1;
    auto embedder = make_embedder(config);
    CHECK_THROWS_AS(embedder->embed_batch({"text"}), ProviderError);
}
