#include "coderag/embedding.hpp"

#include "coderag/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <thread>

namespace coderag {

const char* to_string(EmbedProvider provider) {
    return provider == EmbedProvider::http ? "http" : "deterministic_test";
}

EmbedProvider embed_provider_from_string(const std::string& name) {
    if (name == "http") return EmbedProvider::http;
    if (name == "deterministic_test") return EmbedProvider::deterministic_test;
    throw ConfigError("unknown embed provider: " + name);
}

void EmbedderConfig::validate() const {
    if (dim == 0)
        throw ConfigError("embedding dim must be > 0");
    if (batch_size < 1)
        throw ConfigError("embedding batch_size must be >= 1");
    if (provider == EmbedProvider::http && endpoint_url.empty())
        throw ConfigError("http embed provider requires an endpoint url");
}

EmbeddingVector Embedder::embed_one(const std::string& text) {
    return embed_batch({text}).front();
}

double cosine_sim(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size())
        throw DomainError("cosine_sim dimension mismatch: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * static_cast<double>(v[i]);
        nu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
        nv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    }
    if (nu == 0.0 || nv == 0.0)
        throw DomainError("cosine_sim is undefined for a zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

constexpr std::uint64_t kEmbedSeed = 0x9E3779B97F4A7C15ull;

std::uint64_t fnv1a(const char* data, std::size_t len, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ull;
    }
    return h;
}

/// Pure function of the text: signed trigram hashing over the
/// sentinel-padded byte string, projected to dim and L2-normalized. Stable
/// across runs and platforms (fixed seed, fixed accumulation order).
class DeterministicEmbedder final : public Embedder {
public:
    explicit DeterministicEmbedder(EmbedderConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        if (texts.empty())
            throw ConfigError("embed_batch requires at least one text");
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& text : texts) {
            if (text.empty())
                throw ConfigError("embed_batch texts must be non-empty");
            out.push_back(embed(text));
        }
        return out;
    }

    const EmbedderConfig& config() const override { return config_; }

private:
    EmbeddingVector embed(const std::string& text) const {
        const std::size_t dim = config_.dim;
        std::string padded;
        padded.reserve(text.size() + 2);
        padded.push_back('\x02');
        padded += text;
        padded.push_back('\x03');

        std::vector<double> acc(dim, 0.0);
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            std::uint64_t h = fnv1a(padded.data() + i, 3, kEmbedSeed);
            double sign = (h >> 63) ? 1.0 : -1.0;
            acc[h % dim] += sign;
        }
        double norm2 = 0.0;
        for (double x : acc)
            norm2 += x * x;
        if (norm2 == 0.0) {
            acc[fnv1a(text.data(), text.size(), kEmbedSeed) % dim] = 1.0;
            norm2 = 1.0;
        }
        double inv = 1.0 / std::sqrt(norm2);
        EmbeddingVector vec(dim);
        for (std::size_t i = 0; i < dim; ++i)
            vec[i] = static_cast<float>(acc[i] * inv);
        return vec;
    }

    EmbedderConfig config_;
};

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // leading '/'
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(EmbedderConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        if (texts.empty())
            throw ConfigError("embed_batch requires at least one text");
        for (const auto& text : texts) {
            if (text.empty())
                throw ConfigError("embed_batch texts must be non-empty");
        }
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
            std::size_t stop = std::min(start + config_.batch_size, texts.size());
            std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                           texts.begin() + static_cast<std::ptrdiff_t>(stop));
            auto vectors = request(batch);
            for (auto& v : vectors)
                out.push_back(std::move(v));
        }
        return out;
    }

    const EmbedderConfig& config() const override { return config_; }

private:
    std::vector<EmbeddingVector> request(const std::vector<std::string>& batch) const {
        ParsedUrl url = parse_url(config_.endpoint_url);
        nlohmann::json body = {{"model", config_.model_name}, {"input", batch}};
        std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 1)));
            }
            httplib::Client client(url.base);
            client.set_connection_timeout(0, config_.timeout_ms * 1000);
            client.set_read_timeout(0, config_.timeout_ms * 1000);
            client.set_write_timeout(0, config_.timeout_ms * 1000);

            auto res = client.Post(url.path, payload, "application/json");
            if (!res) {
                last_error = "connection failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw ProviderError("embedding endpoint returned status " +
                                    std::to_string(res->status));
            return parse_response(res->body, batch.size());
        }
        throw ProviderError("embedding endpoint unreachable after " +
                            std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
    }

    std::vector<EmbeddingVector> parse_response(const std::string& body,
                                                std::size_t expected_count) const {
        nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("embeddings") ||
            !doc["embeddings"].is_array())
            throw ProviderError("embedding response is not {\"embeddings\": [[...], ...]}");
        const auto& rows = doc["embeddings"];
        if (rows.size() != expected_count)
            throw ProviderError("embedding count mismatch: sent " + std::to_string(expected_count) +
                                " texts, got " + std::to_string(rows.size()) + " vectors");
        std::vector<EmbeddingVector> out;
        out.reserve(rows.size());
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != config_.dim)
                throw ProviderError("embedding dimension mismatch: expected " +
                                    std::to_string(config_.dim) + ", got " +
                                    std::to_string(row.size()));
            EmbeddingVector vec;
            vec.reserve(config_.dim);
            for (const auto& x : row) {
                if (!x.is_number())
                    throw ProviderError("embedding entry is not a number");
                float f = x.get<float>();
                if (!std::isfinite(f))
                    throw ProviderError("embedding entry is not finite");
                vec.push_back(f);
            }
            out.push_back(std::move(vec));
        }
        return out;
    }

    EmbedderConfig config_;
};

} // namespace

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
    config.validate();
    if (config.provider == EmbedProvider::http)
        return std::make_unique<HttpEmbedder>(config);
    return std::make_unique<DeterministicEmbedder>(config);
}

} // namespace coderag
