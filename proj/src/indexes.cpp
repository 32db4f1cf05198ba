#include "coderag/indexes.hpp"

#include "coderag/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace coderag {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Split an identifier run on underscores and lower->upper camel boundaries.
std::vector<std::string> split_parts(std::string_view run) {
    std::vector<std::string> parts;
    std::string cur;
    char prev = '\0';
    for (char c : run) {
        if (c == '_') {
            if (!cur.empty()) {
                parts.push_back(std::move(cur));
                cur.clear();
            }
            prev = c;
            continue;
        }
        bool lower_prev = std::islower(static_cast<unsigned char>(prev)) ||
                          std::isdigit(static_cast<unsigned char>(prev));
        if (std::isupper(static_cast<unsigned char>(c)) && lower_prev && !cur.empty()) {
            parts.push_back(std::move(cur));
            cur.clear();
        }
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        prev = c;
    }
    if (!cur.empty())
        parts.push_back(std::move(cur));
    return parts;
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    const std::size_t min_len = text.size() < 2 ? 1 : 2;
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_ident_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_ident_char(text[j]))
            ++j;
        std::string_view run(text.data() + i, j - i);
        std::string whole = lowercase(run);
        auto parts = split_parts(run);
        if (whole.size() >= min_len)
            tokens.push_back(whole);
        // the whole identifier and its parts are both indexed; a single
        // part equal to the whole is not emitted twice
        if (!(parts.size() == 1 && parts.front() == whole)) {
            for (auto& part : parts) {
                if (part.size() >= min_len)
                    tokens.push_back(std::move(part));
            }
        }
        i = j;
    }
    return tokens;
}

VectorIndex build_vector_index(std::vector<std::string> ids, std::vector<EmbeddingVector> vectors) {
    if (ids.size() != vectors.size())
        throw ConfigError("vector index id/vector count mismatch");
    VectorIndex index;
    index.dim = vectors.empty() ? 0 : vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != index.dim)
            throw DomainError("vector index entries must share one dimension");
    }
    index.ids = std::move(ids);
    index.vectors = std::move(vectors);
    return index;
}

LexicalIndex build_lexical_index(std::vector<std::string> ids, const std::vector<std::string>& texts,
                                 double k1, double b) {
    if (ids.size() != texts.size())
        throw ConfigError("lexical index id/text count mismatch");
    if (k1 <= 0.0)
        throw ConfigError("bm25 k1 must be > 0");
    if (b < 0.0 || b > 1.0)
        throw ConfigError("bm25 b must be in [0,1]");

    LexicalIndex index;
    index.k1 = k1;
    index.b = b;
    index.ids = std::move(ids);
    index.doc_lengths.resize(texts.size());

    std::uint64_t total = 0;
    for (std::size_t d = 0; d < texts.size(); ++d) {
        auto tokens = tokenize(texts[d]);
        index.doc_lengths[d] = static_cast<std::uint32_t>(tokens.size());
        total += tokens.size();
        std::unordered_map<std::string, std::uint32_t> tf;
        for (auto& tok : tokens)
            ++tf[std::move(tok)];
        for (auto& [term, freq] : tf)
            index.postings[term].emplace_back(static_cast<std::uint32_t>(d), freq);
    }
    // Postings in chunk order, independently of the tf map iteration order.
    for (auto& [term, list] : index.postings)
        std::sort(list.begin(), list.end());
    index.avgdl = texts.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(texts.size());
    return index;
}

std::unordered_map<std::string, double> bm25_scores(const std::vector<std::string>& query_tokens,
                                                    const LexicalIndex& index) {
    std::unordered_map<std::string, double> scores;
    if (query_tokens.empty() || index.size() == 0)
        return scores;

    const double n_docs = static_cast<double>(index.size());
    std::unordered_map<std::uint32_t, double> by_doc;
    for (const auto& term : query_tokens) {
        auto it = index.postings.find(term);
        if (it == index.postings.end())
            continue;
        const auto& list = it->second;
        double n_q = static_cast<double>(list.size());
        double idf = std::log((n_docs - n_q + 0.5) / (n_q + 0.5) + 1.0);
        for (const auto& [doc, freq] : list) {
            double f = static_cast<double>(freq);
            double dl = static_cast<double>(index.doc_lengths[doc]);
            double denom = f + index.k1 * (1.0 - index.b + index.b * dl / index.avgdl);
            by_doc[doc] += idf * (f * (index.k1 + 1.0)) / denom;
        }
    }
    scores.reserve(by_doc.size());
    for (const auto& [doc, score] : by_doc)
        scores.emplace(index.ids[doc], score);
    return scores;
}

std::vector<RankedEntry> vector_ranking(const EmbeddingVector& query_vec, const VectorIndex& index) {
    if (index.size() > 0 && query_vec.size() != index.dim)
        throw DomainError("query dimension " + std::to_string(query_vec.size()) +
                          " does not match index dimension " + std::to_string(index.dim));

    double qn = 0.0;
    for (float x : query_vec)
        qn += static_cast<double>(x) * static_cast<double>(x);

    std::vector<RankedEntry> ranked;
    ranked.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& v = index.vectors[i];
        double dot = 0.0, vn = 0.0;
        for (std::size_t d = 0; d < v.size(); ++d) {
            dot += static_cast<double>(query_vec[d]) * static_cast<double>(v[d]);
            vn += static_cast<double>(v[d]) * static_cast<double>(v[d]);
        }
        // zero-norm entries rank by id with similarity 0
        double cosine = (qn == 0.0 || vn == 0.0) ? 0.0 : dot / (std::sqrt(qn) * std::sqrt(vn));
        ranked.push_back({index.ids[i], cosine, 0});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.cosine != b.cosine)
            return a.cosine > b.cosine;
        return a.chunk_id < b.chunk_id;
    });
    for (std::size_t r = 0; r < ranked.size(); ++r)
        ranked[r].rank = r;
    return ranked;
}

} // namespace coderag
