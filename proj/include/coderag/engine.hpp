#pragma once

#include "coderag/chunker.hpp"
#include "coderag/document.hpp"
#include "coderag/embedding.hpp"
#include "coderag/indexes.hpp"
#include "coderag/ingest.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace coderag {

/// Retrieval strategy and its parameters.
struct RetrievalConfig {
    enum class Mode { semantic, hybrid };

    Mode mode = Mode::hybrid;
    std::size_t k = 5;             // final context size
    std::size_t candidate_n = 24;  // semantic candidate pool
    double lambda = 0.5;           // MMR relevance/diversity trade-off
    double alpha = 0.5;            // hybrid lexical weight
    std::size_t lexical_batch_m = 24;

    void validate() const; // throws ConfigError
};

const char* to_string(RetrievalConfig::Mode mode);
RetrievalConfig::Mode retrieval_mode_from_string(const std::string& name);

/// Indexed form of a chunk: the chunker output joined with its file path.
struct StoredChunk {
    std::string chunk_id;
    std::string doc_id;
    std::string path;
    std::size_t span_begin = 0;
    std::size_t span_end = 0;
    ChunkMeta meta;
    std::string text;
};

/// Snapshot manifest; persisted as manifest.json.
struct Manifest {
    int format_version = 1;
    std::size_t embed_dim = 384;
    EmbedProvider embed_provider = EmbedProvider::deterministic_test;
    std::string model_name = "all-MiniLM-L6-v2";
    ChunkPolicy chunk_policy = ChunkPolicy::defaults();
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    RetrievalConfig retrieval_defaults;
    std::size_t n_docs = 0;
    std::size_t n_chunks = 0;
    std::string repo_rev;
};

/// Frozen query-ready state: chunk records plus both indexes. Built by a
/// single writer, then immutable; safe for concurrent readers.
class Engine {
public:
    Engine() = default;
    Engine(Manifest manifest, std::vector<StoredChunk> chunks,
           std::vector<EmbeddingVector> vectors);

    const Manifest& manifest() const { return manifest_; }
    const std::vector<StoredChunk>& chunks() const { return chunks_; }
    const VectorIndex& vector_index() const { return vindex_; }
    const LexicalIndex& lexical_index() const { return lindex_; }

    const StoredChunk& chunk_by_id(const std::string& chunk_id) const;
    std::size_t index_of(const std::string& chunk_id) const; // position in corpus order
    std::size_t size() const { return chunks_.size(); }

private:
    Manifest manifest_;
    std::vector<StoredChunk> chunks_;
    VectorIndex vindex_;
    LexicalIndex lindex_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Ingestion-side configuration for building an engine from a source tree.
struct BuildConfig {
    IngestConfig ingest;
    ChunkPolicy chunk_policy = ChunkPolicy::defaults();
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    RetrievalConfig retrieval_defaults;
    std::string repo_rev;
};

struct BuildReport {
    std::size_t n_docs = 0;
    std::size_t n_chunks = 0;
    std::vector<std::string> warnings;
};

/// scan -> chunk -> embed -> index.
Engine build_engine(const std::filesystem::path& root, const BuildConfig& config,
                    Embedder& embedder, BuildReport* report = nullptr);

/// Chunk an already-scanned corpus (exposed for tests and custom pipelines).
std::vector<StoredChunk> chunk_corpus(const std::vector<Document>& documents,
                                      const ChunkPolicy& policy);

} // namespace coderag
