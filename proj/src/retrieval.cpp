#include "coderag/retrieval.hpp"

#include "coderag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace coderag {

namespace {

double cosine_or_zero(const EmbeddingVector& u, const EmbeddingVector& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * static_cast<double>(v[i]);
        nu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
        nv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    }
    if (nu == 0.0 || nv == 0.0)
        return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

} // namespace

std::vector<std::size_t> mmr_select_scored(std::span<const double> query_sim,
                                           const std::vector<std::vector<double>>& pair_sim,
                                           std::span<const std::string> ids, double lambda,
                                           std::size_t k) {
    const std::size_t n = query_sim.size();
    if (k > n)
        throw ConfigError("mmr k exceeds candidate count");
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("mmr lambda must be in [0,1]");

    std::vector<std::size_t> selected;
    selected.reserve(k);
    std::vector<char> taken(n, 0);
    while (selected.size() < k) {
        bool have_best = false;
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i])
                continue;
            // max over the empty selected set is 0 by convention
            double redundancy = 0.0;
            for (std::size_t j : selected)
                redundancy = std::max(redundancy, pair_sim[i][j]);
            double score = lambda * query_sim[i] - (1.0 - lambda) * redundancy;
            if (!have_best || score > best_score ||
                (score == best_score && ids[i] < ids[best])) {
                have_best = true;
                best = i;
                best_score = score;
            }
        }
        taken[best] = 1;
        selected.push_back(best);
    }
    return selected;
}

std::vector<std::string> mmr_select(const EmbeddingVector& query_vec,
                                    const std::vector<std::pair<std::string, EmbeddingVector>>& candidates,
                                    double lambda, std::size_t k) {
    if (candidates.empty())
        throw ConfigError("mmr requires a non-empty candidate set");
    const std::size_t n = candidates.size();
    std::vector<double> query_sim(n);
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = candidates[i].first;
        query_sim[i] = cosine_or_zero(candidates[i].second, query_vec);
    }
    std::vector<std::vector<double>> pair_sim(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = cosine_or_zero(candidates[i].second, candidates[j].second);
            pair_sim[i][j] = s;
            pair_sim[j][i] = s;
        }
    }
    auto picks = mmr_select_scored(query_sim, pair_sim, ids, lambda, k);
    std::vector<std::string> out;
    out.reserve(picks.size());
    for (std::size_t i : picks)
        out.push_back(ids[i]);
    return out;
}

std::vector<FusedEntry> fuse_hybrid(const std::unordered_map<std::string, double>& bm25,
                                    const std::vector<RankedEntry>& vranks, double alpha,
                                    std::size_t lexical_batch_m) {
    const std::size_t n_total = vranks.size();

    // Lexical batch: top M by raw score, ties by ascending chunk_id.
    std::vector<std::pair<std::string, double>> lex(bm25.begin(), bm25.end());
    std::sort(lex.begin(), lex.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    if (lex.size() > lexical_batch_m)
        lex.resize(lexical_batch_m);
    double batch_max = lex.empty() ? 0.0 : lex.front().second;

    std::unordered_set<std::string> in_lexical_batch;
    for (const auto& [id, score] : lex)
        in_lexical_batch.insert(id);

    std::unordered_set<std::string> candidate_ids = in_lexical_batch;
    std::size_t vector_batch = std::min(lexical_batch_m, n_total);
    for (std::size_t r = 0; r < vector_batch; ++r)
        candidate_ids.insert(vranks[r].chunk_id);

    std::vector<FusedEntry> fused;
    fused.reserve(candidate_ids.size());
    for (const auto& entry : vranks) {
        if (!candidate_ids.count(entry.chunk_id))
            continue;
        FusedEntry fe;
        fe.chunk_id = entry.chunk_id;
        fe.vector_rank = entry.rank;
        fe.cosine = entry.cosine;
        auto it = bm25.find(entry.chunk_id);
        fe.bm25_raw = (it == bm25.end()) ? 0.0 : it->second;
        // outside the lexical batch (or with a zero batch max) the lexical
        // term contributes nothing
        if (batch_max > 0.0 && in_lexical_batch.count(entry.chunk_id))
            fe.bm25_norm = fe.bm25_raw / batch_max;
        double rank_score =
            n_total == 0 ? 0.0
                         : 1.0 - static_cast<double>(fe.vector_rank) / static_cast<double>(n_total);
        fe.fused = alpha * fe.bm25_norm + (1.0 - alpha) * rank_score;
        fused.push_back(std::move(fe));
    }
    std::sort(fused.begin(), fused.end(), [](const FusedEntry& a, const FusedEntry& b) {
        if (a.fused != b.fused)
            return a.fused > b.fused;
        return a.chunk_id < b.chunk_id;
    });
    return fused;
}

std::vector<ScoredHit> retrieve_semantic(const std::string& query, const RetrievalConfig& config,
                                         const Engine& engine, Embedder& embedder) {
    RetrievalConfig cfg = config;
    cfg.mode = RetrievalConfig::Mode::semantic;
    cfg.validate();
    if (engine.size() == 0)
        return {};

    EmbeddingVector query_vec = embedder.embed_one(query);
    auto ranking = vector_ranking(query_vec, engine.vector_index());

    std::size_t n_candidates = std::min(cfg.candidate_n, ranking.size());
    std::size_t k = std::min(cfg.k, n_candidates);

    std::vector<std::pair<std::string, EmbeddingVector>> candidates;
    std::unordered_map<std::string, const RankedEntry*> by_id;
    candidates.reserve(n_candidates);
    const auto& vindex = engine.vector_index();
    for (std::size_t i = 0; i < n_candidates; ++i) {
        const auto& entry = ranking[i];
        by_id.emplace(entry.chunk_id, &entry);
        candidates.emplace_back(entry.chunk_id, vindex.vectors[engine.index_of(entry.chunk_id)]);
    }

    auto picked = mmr_select(query_vec, candidates, cfg.lambda, k);

    std::vector<ScoredHit> hits;
    hits.reserve(picked.size());
    for (const auto& id : picked) {
        const auto& chunk = engine.chunk_by_id(id);
        const RankedEntry* entry = by_id.at(id);
        ScoredHit hit;
        hit.chunk_id = id;
        hit.cosine = entry->cosine;
        hit.vector_rank = entry->rank;
        hit.text = chunk.text;
        hit.path = chunk.path;
        hit.span_begin = chunk.span_begin;
        hit.span_end = chunk.span_end;
        hits.push_back(std::move(hit));
    }
    return hits;
}

std::vector<ScoredHit> retrieve_hybrid(const std::string& query, const RetrievalConfig& config,
                                       const Engine& engine, Embedder& embedder) {
    RetrievalConfig cfg = config;
    cfg.mode = RetrievalConfig::Mode::hybrid;
    cfg.validate();
    if (engine.size() == 0)
        return {};

    auto query_tokens = tokenize(query);
    auto lexical = bm25_scores(query_tokens, engine.lexical_index());
    EmbeddingVector query_vec = embedder.embed_one(query);
    auto ranking = vector_ranking(query_vec, engine.vector_index());
    auto fused = fuse_hybrid(lexical, ranking, cfg.alpha, cfg.lexical_batch_m);

    std::size_t k = std::min(cfg.k, fused.size());
    std::vector<ScoredHit> hits;
    hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& fe = fused[i];
        const auto& chunk = engine.chunk_by_id(fe.chunk_id);
        ScoredHit hit;
        hit.chunk_id = fe.chunk_id;
        hit.cosine = fe.cosine;
        hit.vector_rank = fe.vector_rank;
        hit.bm25_raw = fe.bm25_raw;
        hit.bm25_norm = fe.bm25_norm;
        hit.fused = fe.fused;
        hit.text = chunk.text;
        hit.path = chunk.path;
        hit.span_begin = chunk.span_begin;
        hit.span_end = chunk.span_end;
        hits.push_back(std::move(hit));
    }
    return hits;
}

std::vector<ScoredHit> retrieve(const std::string& query, const RetrievalConfig& config,
                                const Engine& engine, Embedder& embedder) {
    if (config.mode == RetrievalConfig::Mode::semantic)
        return retrieve_semantic(query, config, engine, embedder);
    return retrieve_hybrid(query, config, engine, embedder);
}

} // namespace coderag
