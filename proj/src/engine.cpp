#include "coderag/engine.hpp"

#include "coderag/errors.hpp"

#include <algorithm>

namespace coderag {

void RetrievalConfig::validate() const {
    if (k < 1)
        throw ConfigError("retrieval k must be >= 1");
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("mmr lambda must be in [0,1]");
    if (alpha < 0.0 || alpha > 1.0)
        throw ConfigError("fusion alpha must be in [0,1]");
    if (mode == Mode::semantic && k > candidate_n)
        throw ConfigError("semantic mode requires k <= candidate_N");
    if (lexical_batch_m < 1)
        throw ConfigError("lexical_batch_M must be >= 1");
}

const char* to_string(RetrievalConfig::Mode mode) {
    return mode == RetrievalConfig::Mode::semantic ? "semantic" : "hybrid";
}

RetrievalConfig::Mode retrieval_mode_from_string(const std::string& name) {
    if (name == "semantic") return RetrievalConfig::Mode::semantic;
    if (name == "hybrid") return RetrievalConfig::Mode::hybrid;
    throw ConfigError("unknown retrieval mode: " + name);
}

Engine::Engine(Manifest manifest, std::vector<StoredChunk> chunks,
               std::vector<EmbeddingVector> vectors)
    : manifest_(std::move(manifest)), chunks_(std::move(chunks)) {
    if (chunks_.size() != vectors.size())
        throw ConfigError("engine chunk/vector count mismatch");
    manifest_.n_chunks = chunks_.size();

    std::vector<std::string> ids;
    ids.reserve(chunks_.size());
    std::vector<std::string> texts;
    texts.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        ids.push_back(chunks_[i].chunk_id);
        texts.push_back(chunks_[i].text);
        auto [it, inserted] = by_id_.emplace(chunks_[i].chunk_id, i);
        if (!inserted)
            throw ConfigError("duplicate chunk_id: " + chunks_[i].chunk_id);
    }
    for (const auto& v : vectors) {
        if (v.size() != manifest_.embed_dim)
            throw ConfigError("embedding dimension does not match manifest embed_dim");
    }
    vindex_ = build_vector_index(ids, std::move(vectors));
    vindex_.dim = manifest_.embed_dim;
    lindex_ = build_lexical_index(std::move(ids), texts, manifest_.bm25_k1, manifest_.bm25_b);
}

const StoredChunk& Engine::chunk_by_id(const std::string& chunk_id) const {
    return chunks_[index_of(chunk_id)];
}

std::size_t Engine::index_of(const std::string& chunk_id) const {
    auto it = by_id_.find(chunk_id);
    if (it == by_id_.end())
        throw DomainError("unknown chunk_id: " + chunk_id);
    return it->second;
}

std::vector<StoredChunk> chunk_corpus(const std::vector<Document>& documents,
                                      const ChunkPolicy& policy) {
    std::vector<StoredChunk> out;
    for (const auto& doc : documents) {
        for (auto& chunk : chunk_document(doc, policy)) {
            StoredChunk sc;
            sc.chunk_id = std::move(chunk.chunk_id);
            sc.doc_id = chunk.doc_id;
            sc.path = doc.path;
            sc.span_begin = chunk.span_begin;
            sc.span_end = chunk.span_end;
            sc.meta = chunk.meta;
            sc.text = std::move(chunk.text);
            out.push_back(std::move(sc));
        }
    }
    return out;
}

Engine build_engine(const std::filesystem::path& root, const BuildConfig& config,
                    Embedder& embedder, BuildReport* report) {
    config.chunk_policy.validate();
    config.retrieval_defaults.validate();

    auto scan = scan_repository(root, config.ingest, config.repo_rev);
    auto chunks = chunk_corpus(scan.documents, config.chunk_policy);

    std::vector<EmbeddingVector> vectors;
    if (!chunks.empty()) {
        std::vector<std::string> texts;
        texts.reserve(chunks.size());
        for (const auto& c : chunks)
            texts.push_back(c.text);
        vectors = embedder.embed_batch(texts);
    }

    Manifest manifest;
    manifest.embed_dim = embedder.config().dim;
    manifest.embed_provider = embedder.config().provider;
    manifest.model_name = embedder.config().model_name;
    manifest.chunk_policy = config.chunk_policy;
    manifest.bm25_k1 = config.bm25_k1;
    manifest.bm25_b = config.bm25_b;
    manifest.retrieval_defaults = config.retrieval_defaults;
    manifest.n_docs = scan.documents.size();
    manifest.repo_rev = config.repo_rev;

    if (report) {
        report->n_docs = scan.documents.size();
        report->n_chunks = chunks.size();
        report->warnings = scan.warnings;
    }
    return Engine(std::move(manifest), std::move(chunks), std::move(vectors));
}

} // namespace coderag
