#include "coderag/server.hpp"

#include "coderag/errors.hpp"
#include "json_codec.hpp"

#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace coderag {

namespace {

constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;
constexpr int kInternalError = -32603;

json error_response(const json& id, int code, const std::string& message) {
    return {{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

json result_response(const json& id, json result) {
    return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

json hit_object(const ScoredHit& hit, RetrievalConfig::Mode mode) {
    double score = mode == RetrievalConfig::Mode::hybrid ? hit.fused : hit.cosine;
    return {{"chunk_id", hit.chunk_id},
            {"path", hit.path},
            {"span", {hit.span_begin, hit.span_end}},
            {"score", score},
            {"text", hit.text}};
}

struct BadParams : Error {
    using Error::Error;
};

std::string require_string(const json& params, const char* key) {
    if (!params.contains(key) || !params[key].is_string())
        throw BadParams(std::string("param \"") + key + "\" must be a string");
    return params[key].get<std::string>();
}

} // namespace

std::string hit_to_json(const ScoredHit& hit, RetrievalConfig::Mode mode) {
    return hit_object(hit, mode).dump();
}

RpcServer::RpcServer(const Engine& engine, Embedder& embedder,
                     const PromptTemplateStore& templates)
    : engine_(engine), embedder_(embedder), templates_(templates) {}

std::string RpcServer::handle_line(const std::string& line) const {
    json request = json::parse(line, nullptr, false);
    if (request.is_discarded())
        return error_response(nullptr, kParseError, "parse error").dump();

    json id = request.is_object() && request.contains("id") ? request["id"] : json(nullptr);
    if (!request.is_object() || !request.contains("method") || !request["method"].is_string())
        return error_response(id, kInvalidRequest, "invalid request").dump();

    std::string method = request["method"].get<std::string>();
    json params = request.value("params", json::object());
    if (!params.is_object())
        return error_response(id, kInvalidParams, "params must be an object").dump();

    try {
        if (method == "stats") {
            const Manifest& m = engine_.manifest();
            json result = {{"format_version", m.format_version},
                           {"embed_dim", m.embed_dim},
                           {"embed_provider", to_string(m.embed_provider)},
                           {"model_name", m.model_name},
                           {"n_docs", m.n_docs},
                           {"n_chunks", m.n_chunks},
                           {"repo_rev", m.repo_rev},
                           {"bm25", {{"k1", m.bm25_k1}, {"b", m.bm25_b}}},
                           {"retrieval_defaults",
                            {{"k", m.retrieval_defaults.k},
                             {"candidate_N", m.retrieval_defaults.candidate_n},
                             {"lambda", m.retrieval_defaults.lambda},
                             {"alpha", m.retrieval_defaults.alpha},
                             {"lexical_batch_M", m.retrieval_defaults.lexical_batch_m},
                             {"mode", to_string(m.retrieval_defaults.mode)}}}};
            return result_response(id, std::move(result)).dump();
        }

        if (method == "retrieve" || method == "assemble_context") {
            std::string query = require_string(params, "query");
            RetrievalConfig cfg = engine_.manifest().retrieval_defaults;
            if (params.contains("k")) {
                if (!params["k"].is_number_integer() || params["k"].get<long long>() < 1)
                    throw BadParams("param \"k\" must be a positive integer");
                cfg.k = params["k"].get<std::size_t>();
            }
            if (params.contains("mode"))
                cfg.mode = retrieval_mode_from_string(require_string(params, "mode"));
            // a snapshot smaller than the candidate pool keeps k valid
            if (cfg.mode == RetrievalConfig::Mode::semantic && cfg.candidate_n < cfg.k)
                cfg.candidate_n = cfg.k;

            auto hits = retrieve(query, cfg, engine_, embedder_);
            json hit_rows = json::array();
            for (const auto& hit : hits)
                hit_rows.push_back(hit_object(hit, cfg.mode));

            if (method == "retrieve")
                return result_response(id, {{"hits", std::move(hit_rows)}}).dump();

            std::string template_id = "default";
            if (params.contains("template_id"))
                template_id = require_string(params, "template_id");
            if (!templates_.has(template_id))
                throw BadParams("unknown template_id: " + template_id);
            auto assembled = templates_.assemble(query, hits, template_id);
            return result_response(id, {{"prompt", assembled.prompt},
                                        {"length", assembled.length},
                                        {"hits", std::move(hit_rows)}})
                .dump();
        }

        return error_response(id, kMethodNotFound, "unknown method: " + method).dump();
    } catch (const BadParams& e) {
        return error_response(id, kInvalidParams, e.what()).dump();
    } catch (const ConfigError& e) {
        return error_response(id, kInvalidParams, e.what()).dump();
    } catch (const std::exception& e) {
        return error_response(id, kInternalError, e.what()).dump();
    }
}

void RpcServer::serve_stream(std::istream& in, std::ostream& out) const {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        out << handle_line(line) << '\n';
        out.flush();
    }
}

void RpcServer::serve_tcp(int port) const {
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0)
        throw Error("cannot create server socket");
    int on = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &on, sizeof on);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(listener);
        throw Error("cannot bind port " + std::to_string(port));
    }
    if (::listen(listener, 16) != 0) {
        ::close(listener);
        throw Error("cannot listen on port " + std::to_string(port));
    }

    for (;;) {
        int client = ::accept(listener, nullptr, nullptr);
        if (client < 0)
            continue;
        std::thread([this, client]() {
            std::string buffer;
            char block[4096];
            for (;;) {
                ssize_t got = ::read(client, block, sizeof block);
                if (got <= 0)
                    break;
                buffer.append(block, static_cast<std::size_t>(got));
                std::size_t nl;
                while ((nl = buffer.find('\n')) != std::string::npos) {
                    std::string line = buffer.substr(0, nl);
                    buffer.erase(0, nl + 1);
                    if (!line.empty() && line.back() == '\r')
                        line.pop_back();
                    if (line.empty())
                        continue;
                    std::string response = handle_line(line) + "\n";
                    std::size_t sent = 0;
                    while (sent < response.size()) {
                        ssize_t n = ::write(client, response.data() + sent,
                                            response.size() - sent);
                        if (n <= 0)
                            break;
                        sent += static_cast<std::size_t>(n);
                    }
                }
            }
            ::close(client);
        }).detach();
    }
}

} // namespace coderag
