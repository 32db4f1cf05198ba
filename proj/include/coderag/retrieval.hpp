#pragma once

#include "coderag/embedding.hpp"
#include "coderag/engine.hpp"
#include "coderag/indexes.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace coderag {

/// A chunk plus its per-channel scores for one query. In hybrid mode
/// fused == alpha*bm25_norm + (1-alpha)*(1 - vector_rank/N_total).
struct ScoredHit {
    std::string chunk_id;
    double cosine = 0.0;
    std::size_t vector_rank = 0;
    double bm25_raw = 0.0;
    double bm25_norm = 0.0; // in [0,1]
    double fused = 0.0;
    std::string text;
    std::string path;
    std::size_t span_begin = 0;
    std::size_t span_end = 0;
};

/// Greedy diversity selection over precomputed similarities: repeatedly pick
/// argmax of lambda*query_sim[i] - (1-lambda)*max_{j in selected} pair_sim[i][j],
/// with the max over an empty selection defined as 0 and ties broken by
/// ascending id. Returns positions into `ids` in selection order.
std::vector<std::size_t> mmr_select_scored(std::span<const double> query_sim,
                                           const std::vector<std::vector<double>>& pair_sim,
                                           std::span<const std::string> ids, double lambda,
                                           std::size_t k);

/// MMR over embedding vectors; similarities are cosines (zero-norm treated
/// as 0). Throws ConfigError when k exceeds the candidate count or lambda
/// is outside [0,1].
std::vector<std::string> mmr_select(const EmbeddingVector& query_vec,
                                    const std::vector<std::pair<std::string, EmbeddingVector>>& candidates,
                                    double lambda, std::size_t k);

struct FusedEntry {
    std::string chunk_id;
    double bm25_raw = 0.0;
    double bm25_norm = 0.0;
    std::size_t vector_rank = 0;
    double cosine = 0.0;
    double fused = 0.0;
};

/// Rank-aware normalized fusion. The candidate set is the union of the top
/// `lexical_batch_m` chunks by raw BM25 and the top `lexical_batch_m` of the
/// vector ranking. bm25_norm is the raw score over the lexical-batch max,
/// zero when the batch max is zero or the chunk sits outside the lexical
/// batch. Result sorted by fused score descending, ties by ascending
/// chunk_id.
std::vector<FusedEntry> fuse_hybrid(const std::unordered_map<std::string, double>& bm25,
                                    const std::vector<RankedEntry>& vranks, double alpha,
                                    std::size_t lexical_batch_m);

/// Broad cosine candidate set of size candidate_n, then MMR down to k.
std::vector<ScoredHit> retrieve_semantic(const std::string& query, const RetrievalConfig& config,
                                         const Engine& engine, Embedder& embedder);

/// BM25 + vector ranking fused per the hybrid formula; top-k by fused score.
std::vector<ScoredHit> retrieve_hybrid(const std::string& query, const RetrievalConfig& config,
                                       const Engine& engine, Embedder& embedder);

/// Dispatch on config.mode.
std::vector<ScoredHit> retrieve(const std::string& query, const RetrievalConfig& config,
                                const Engine& engine, Embedder& embedder);

} // namespace coderag
