#include "json_codec.hpp"

#include "coderag/errors.hpp"

using nlohmann::json;

namespace coderag {

json chunk_policy_to_json(const ChunkPolicy& policy) {
    json per_kind = json::object();
    for (const auto& [kind, params] : policy.per_kind) {
        per_kind[to_string(kind)] = {{"window", params.window_chars},
                                     {"overlap", params.overlap_chars},
                                     {"mode", to_string(params.mode)}};
    }
    json fallback = {{"window", policy.code_fallback.window_chars},
                     {"overlap", policy.code_fallback.overlap_chars},
                     {"mode", to_string(policy.code_fallback.mode)}};
    return {{"per_kind", per_kind}, {"code_fallback", fallback}};
}

namespace {

ChunkParams params_from_json(const json& j) {
    ChunkParams params;
    params.window_chars = j.at("window").get<std::size_t>();
    params.overlap_chars = j.at("overlap").get<std::size_t>();
    params.mode = chunk_mode_from_string(j.at("mode").get<std::string>());
    return params;
}

} // namespace

ChunkPolicy chunk_policy_from_json(const json& j) {
    ChunkPolicy policy;
    policy.per_kind.clear();
    for (const auto& [name, params] : j.at("per_kind").items())
        policy.per_kind[doc_kind_from_string(name)] = params_from_json(params);
    policy.code_fallback = params_from_json(j.at("code_fallback"));
    policy.validate();
    return policy;
}

json manifest_to_json(const Manifest& m) {
    return {{"format_version", m.format_version},
            {"embed_dim", m.embed_dim},
            {"embed_provider", to_string(m.embed_provider)},
            {"model_name", m.model_name},
            {"chunk_policy", chunk_policy_to_json(m.chunk_policy)},
            {"bm25", {{"k1", m.bm25_k1}, {"b", m.bm25_b}}},
            {"retrieval_defaults",
             {{"k", m.retrieval_defaults.k},
              {"candidate_N", m.retrieval_defaults.candidate_n},
              {"lambda", m.retrieval_defaults.lambda},
              {"alpha", m.retrieval_defaults.alpha},
              {"lexical_batch_M", m.retrieval_defaults.lexical_batch_m},
              {"mode", to_string(m.retrieval_defaults.mode)}}},
            {"corpus_stats", {{"n_docs", m.n_docs}, {"n_chunks", m.n_chunks}}},
            {"repo_rev", m.repo_rev}};
}

Manifest manifest_from_json(const json& j) {
    Manifest m;
    m.format_version = j.at("format_version").get<int>();
    m.embed_dim = j.at("embed_dim").get<std::size_t>();
    m.embed_provider = embed_provider_from_string(j.at("embed_provider").get<std::string>());
    m.model_name = j.at("model_name").get<std::string>();
    m.chunk_policy = chunk_policy_from_json(j.at("chunk_policy"));
    m.bm25_k1 = j.at("bm25").at("k1").get<double>();
    m.bm25_b = j.at("bm25").at("b").get<double>();
    const auto& r = j.at("retrieval_defaults");
    m.retrieval_defaults.k = r.at("k").get<std::size_t>();
    m.retrieval_defaults.candidate_n = r.at("candidate_N").get<std::size_t>();
    m.retrieval_defaults.lambda = r.at("lambda").get<double>();
    m.retrieval_defaults.alpha = r.at("alpha").get<double>();
    m.retrieval_defaults.lexical_batch_m = r.at("lexical_batch_M").get<std::size_t>();
    if (r.contains("mode"))
        m.retrieval_defaults.mode = retrieval_mode_from_string(r.at("mode").get<std::string>());
    m.n_docs = j.at("corpus_stats").at("n_docs").get<std::size_t>();
    m.n_chunks = j.at("corpus_stats").at("n_chunks").get<std::size_t>();
    m.repo_rev = j.at("repo_rev").get<std::string>();
    return m;
}

json stored_chunk_to_json(const StoredChunk& chunk) {
    json meta = {{"structural_kind", to_string(chunk.meta.structural_kind)},
                 {"source_kind", to_string(chunk.meta.source_kind)}};
    if (chunk.meta.symbol_name)
        meta["symbol_name"] = *chunk.meta.symbol_name;
    if (chunk.meta.parent_symbol)
        meta["parent_symbol"] = *chunk.meta.parent_symbol;
    return {{"chunk_id", chunk.chunk_id},
            {"doc_id", chunk.doc_id},
            {"path", chunk.path},
            {"span", {chunk.span_begin, chunk.span_end}},
            {"meta", meta},
            {"text", chunk.text}};
}

StoredChunk stored_chunk_from_json(const json& j) {
    StoredChunk chunk;
    chunk.chunk_id = j.at("chunk_id").get<std::string>();
    chunk.doc_id = j.at("doc_id").get<std::string>();
    chunk.path = j.at("path").get<std::string>();
    const auto& span = j.at("span");
    if (!span.is_array() || span.size() != 2)
        throw SnapshotError("chunk span must be a [begin,end] pair: " + chunk.chunk_id);
    chunk.span_begin = span[0].get<std::size_t>();
    chunk.span_end = span[1].get<std::size_t>();
    const auto& meta = j.at("meta");
    chunk.meta.structural_kind =
        structural_kind_from_string(meta.at("structural_kind").get<std::string>());
    chunk.meta.source_kind = doc_kind_from_string(meta.at("source_kind").get<std::string>());
    if (meta.contains("symbol_name"))
        chunk.meta.symbol_name = meta.at("symbol_name").get<std::string>();
    if (meta.contains("parent_symbol"))
        chunk.meta.parent_symbol = meta.at("parent_symbol").get<std::string>();
    chunk.text = j.at("text").get<std::string>();
    return chunk;
}

} // namespace coderag
