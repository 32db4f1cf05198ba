#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace coderag {

/// Dense representation of a chunk or query; dimension is the length.
/// Stored as 32-bit floats to match the persisted vector block.
using EmbeddingVector = std::vector<float>;

enum class EmbedProvider { http, deterministic_test };

const char* to_string(EmbedProvider provider);
EmbedProvider embed_provider_from_string(const std::string& name);

struct EmbedderConfig {
    EmbedProvider provider = EmbedProvider::deterministic_test;
    std::string endpoint_url;            // http provider only
    std::string model_name = "all-MiniLM-L6-v2";
    std::size_t dim = 384;
    std::size_t batch_size = 32;
    int timeout_ms = 30000;
    int max_retries = 3;

    void validate() const; // throws ConfigError
};

class Embedder {
public:
    virtual ~Embedder() = default;

    /// One vector per text, order-preserving, each of dimension config().dim.
    /// Throws ConfigError on empty input and ProviderError on provider
    /// failures or dimension contract violations.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;

    virtual const EmbedderConfig& config() const = 0;

    EmbeddingVector embed_one(const std::string& text);
};

/// Build an embedder for the configured provider. The deterministic_test
/// provider is a pure function of the text (seeded trigram hashing projected
/// to dim, then L2-normalized) so the whole retrieval stack runs with no
/// model or network.
std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

/// dot(u,v) / (|u|*|v|), accumulated in double. Throws DomainError on
/// dimension mismatch or an all-zero vector.
double cosine_sim(const EmbeddingVector& u, const EmbeddingVector& v);

} // namespace coderag
