#pragma once

#include "coderag/embedding.hpp"
#include "coderag/engine.hpp"
#include "coderag/prompt.hpp"
#include "coderag/retrieval.hpp"

#include <iosfwd>
#include <string>

namespace coderag {

/// JSON payload for one hit, shared by the server and the CLI --json path:
/// {chunk_id, path, span, score, text}. `score` is the mode's ranking score
/// (fused for hybrid, cosine for semantic).
std::string hit_to_json(const ScoredHit& hit, RetrievalConfig::Mode mode);

/// Line-delimited JSON-RPC 2.0 service over a frozen snapshot. Methods:
/// "retrieve", "assemble_context", "stats". Stateless: responses depend only
/// on the loaded snapshot and the request parameters.
class RpcServer {
public:
    RpcServer(const Engine& engine, Embedder& embedder, const PromptTemplateStore& templates);

    /// Handle one request line and return the response line (no trailing
    /// newline). Malformed JSON yields a -32700 error response; unknown
    /// methods -32601; invalid params -32602. Never throws.
    std::string handle_line(const std::string& line) const;

    /// Read requests from `in` one per line until EOF, writing one response
    /// line each to `out`.
    void serve_stream(std::istream& in, std::ostream& out) const;

    /// TCP transport: accept loop with one thread per connection, same line
    /// protocol. Blocks forever.
    void serve_tcp(int port) const;

private:
    const Engine& engine_;
    Embedder& embedder_;
    const PromptTemplateStore& templates_;
};

} // namespace coderag
