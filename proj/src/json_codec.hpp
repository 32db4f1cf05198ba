#pragma once

// Internal JSON mappings shared by the snapshot format, the RPC server, and
// the CLI. Key order is alphabetical (nlohmann object ordering), which keeps
// serialized snapshots byte-stable across runs.

#include "coderag/engine.hpp"

#include <nlohmann/json.hpp>

namespace coderag {

nlohmann::json chunk_policy_to_json(const ChunkPolicy& policy);
ChunkPolicy chunk_policy_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

nlohmann::json stored_chunk_to_json(const StoredChunk& chunk);
StoredChunk stored_chunk_from_json(const nlohmann::json& j);

} // namespace coderag
