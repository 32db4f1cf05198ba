#include "coderag/server.hpp"

#include "engine_fixture.hpp"
#include "fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>
#include <thread>

using namespace coderag;
using nlohmann::json;

namespace {

struct ServerFixture {
    Engine engine;
    std::unique_ptr<Embedder> embedder;
    PromptTemplateStore templates;
    RpcServer server;

    ServerFixture()
        : engine(testutil::make_engine({{"a#0", "alpha solver kernel function"},
                                        {"b#0", "beta lattice stream buffer"}})),
          embedder(make_embedder(testutil::det_config())),
          server(engine, *embedder, templates) {}
};

json call(const RpcServer& server, const std::string& line) {
    return json::parse(server.handle_line(line));
}

} // namespace

TEST_CASE("stats echoes the manifest") {
    ServerFixture fx;
    auto res = call(fx.server, R"({"jsonrpc":"2.0","id":1,"method":"stats","params":{}})");
    CHECK(res["jsonrpc"] == "2.0");
    CHECK(res["id"] == 1);
    CHECK(res["result"]["n_chunks"] == 2);
    CHECK(res["result"]["embed_dim"] == 32);
    CHECK(res["result"]["embed_provider"] == "deterministic_test");
}

TEST_CASE("retrieve clamps k to the corpus size and fills the hit schema") {
    ServerFixture fx;
    auto res = call(fx.server,
                    R"({"jsonrpc":"2.0","id":2,"method":"retrieve","params":{"query":"solver","k":3}})");
    REQUIRE(res.contains("result"));
    auto hits = res["result"]["hits"];
    REQUIRE(hits.size() == 2);
    for (const auto& hit : hits) {
        CHECK(hit.contains("chunk_id"));
        CHECK(hit.contains("path"));
        CHECK(hit.contains("span"));
        CHECK(hit.contains("score"));
        CHECK(hit.contains("text"));
        CHECK(hit["span"].is_array());
    }
}

TEST_CASE("identical retrieve requests produce byte-identical responses") {
    ServerFixture fx;
    std::string req =
        R"({"jsonrpc":"2.0","id":7,"method":"retrieve","params":{"query":"lattice buffer","mode":"hybrid"}})";
    CHECK(fx.server.handle_line(req) == fx.server.handle_line(req));
}

TEST_CASE("assemble_context returns a prompt plus hits") {
    ServerFixture fx;
    auto res = call(
        fx.server,
        R"({"jsonrpc":"2.0","id":3,"method":"assemble_context","params":{"query":"solver","k":1}})");
    REQUIRE(res.contains("result"));
    std::string prompt = res["result"]["prompt"];
    CHECK(prompt.find("[source: ") != std::string::npos);
    CHECK(prompt.find("solver") != std::string::npos);
    CHECK(res["result"]["hits"].size() == 1);
    CHECK(res["result"]["length"] == prompt.size());
}

TEST_CASE("json-rpc error codes") {
    ServerFixture fx;

    auto parse_err = call(fx.server, "{this is not json");
    CHECK(parse_err["error"]["code"] == -32700);
    CHECK(parse_err["id"].is_null());

    auto unknown = call(fx.server, R"({"jsonrpc":"2.0","id":4,"method":"nope","params":{}})");
    CHECK(unknown["error"]["code"] == -32601);
    CHECK(unknown["id"] == 4);

    auto bad_params =
        call(fx.server, R"({"jsonrpc":"2.0","id":5,"method":"retrieve","params":{"k":2}})");
    CHECK(bad_params["error"]["code"] == -32602);

    auto bad_k = call(
        fx.server,
        R"({"jsonrpc":"2.0","id":6,"method":"retrieve","params":{"query":"x","k":-1}})");
    CHECK(bad_k["error"]["code"] == -32602);

    auto bad_mode = call(
        fx.server,
        R"({"jsonrpc":"2.0","id":8,"method":"retrieve","params":{"query":"x","mode":"psychic"}})");
    CHECK(bad_mode["error"]["code"] == -32602);

    auto bad_template = call(
        fx.server,
        R"({"jsonrpc":"2.0","id":9,"method":"assemble_context","params":{"query":"x","template_id":"ghost"}})");
    CHECK(bad_template["error"]["code"] == -32602);

    auto no_method = call(fx.server, R"({"jsonrpc":"2.0","id":10})");
    CHECK(no_method["error"]["code"] == -32600);
}

TEST_CASE("stream transport stays alive across malformed lines") {
    ServerFixture fx;
    std::istringstream in("{bad json\n"
                          R"({"jsonrpc":"2.0","id":1,"method":"stats","params":{}})"
                          "\n");
    std::ostringstream out;
    fx.server.serve_stream(in, out);

    std::istringstream lines(out.str());
    std::string first, second;
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(json::parse(first)["error"]["code"] == -32700);
    CHECK(json::parse(second)["result"]["n_chunks"] == 2);
}

TEST_CASE("tcp transport serves the same line protocol") {
    // leaked deliberately: the accept loop runs on a detached thread until
    // process exit, so the fixture must outlive this test
    auto& fx = *new ServerFixture();

    // pick a free port by binding then releasing it
    int probe = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(probe, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(probe, reinterpret_cast<sockaddr*>(&addr), &len);
    int port = ntohs(addr.sin_port);
    ::close(probe);

    std::thread serving([&] {
        try {
            fx.server.serve_tcp(port);
        } catch (...) {
        }
    });
    serving.detach(); // accept loop runs until process exit

    int client = -1;
    for (int attempt = 0; attempt < 50; ++attempt) {
        client = ::socket(AF_INET, SOCK_STREAM, 0);
        if (::connect(client, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0)
            break;
        ::close(client);
        client = -1;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE(client >= 0);

    std::string req = R"({"jsonrpc":"2.0","id":42,"method":"stats","params":{}})"
                      "\n";
    REQUIRE(::write(client, req.data(), req.size()) == static_cast<ssize_t>(req.size()));
    std::string response;
    char buf[4096];
    while (response.find('\n') == std::string::npos) {
        ssize_t got = ::read(client, buf, sizeof buf);
        REQUIRE(got > 0);
        response.append(buf, static_cast<std::size_t>(got));
    }
    ::close(client);
    auto parsed = json::parse(response.substr(0, response.find('\n')));
    CHECK(parsed["id"] == 42);
    CHECK(parsed["result"]["n_chunks"] == 2);
}
