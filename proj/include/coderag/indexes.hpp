#pragma once

#include "coderag/embedding.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace coderag {

/// Lowercased tokens split on non-identifier characters; identifiers are
/// additionally split on underscores and lower/upper camel-case boundaries,
/// emitting both the whole identifier and its parts. Tokens shorter than two
/// characters are dropped unless the whole input is that short.
std::vector<std::string> tokenize(const std::string& text);

/// Exact dense-vector store. Entries keep corpus chunk order.
struct VectorIndex {
    std::vector<std::string> ids;
    std::vector<EmbeddingVector> vectors;
    std::size_t dim = 0;

    std::size_t size() const { return ids.size(); }
};

VectorIndex build_vector_index(std::vector<std::string> ids, std::vector<EmbeddingVector> vectors);

/// Okapi BM25 inverted index. Postings reference positions in `ids`.
struct LexicalIndex {
    std::vector<std::string> ids;                  // corpus chunk order
    std::vector<std::uint32_t> doc_lengths;        // token count per chunk
    std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>>
        postings;                                  // term -> (chunk index, tf)
    double avgdl = 0.0;
    double k1 = 1.2;
    double b = 0.75;

    std::size_t size() const { return ids.size(); }
};

LexicalIndex build_lexical_index(std::vector<std::string> ids, const std::vector<std::string>& texts,
                                 double k1 = 1.2, double b = 0.75);

/// Okapi BM25 with the +1-inside-the-log IDF, which keeps every score
/// nonnegative: score(D,Q) = sum_q idf(q) * f*(k1+1) / (f + k1*(1-b+b*|D|/avgdl)),
/// idf(q) = ln((N - n_q + 0.5)/(n_q + 0.5) + 1). Only chunks with at least one
/// matching term appear in the result; absent chunks implicitly score zero.
std::unordered_map<std::string, double> bm25_scores(const std::vector<std::string>& query_tokens,
                                                    const LexicalIndex& index);

struct RankedEntry {
    std::string chunk_id;
    double cosine = 0.0;
    std::size_t rank = 0; // zero-indexed
};

/// Exact cosine against every entry, descending, ties broken by ascending
/// chunk_id. Every indexed chunk appears exactly once with rank 0..N-1.
/// Zero-norm entries score 0. Throws DomainError on dimension mismatch.
std::vector<RankedEntry> vector_ranking(const EmbeddingVector& query_vec, const VectorIndex& index);

} // namespace coderag
