#pragma once

// Build an in-memory Engine over literal (chunk_id, text) pairs with the
// deterministic embedder, bypassing the filesystem pipeline.

#include "coderag/embedding.hpp"
#include "coderag/engine.hpp"

#include <string>
#include <utility>
#include <vector>

namespace testutil {

inline coderag::EmbedderConfig det_config(std::size_t dim = 32) {
    coderag::EmbedderConfig config;
    config.provider = coderag::EmbedProvider::deterministic_test;
    config.dim = dim;
    return config;
}

inline coderag::Engine
make_engine(const std::vector<std::pair<std::string, std::string>>& id_texts,
            std::size_t dim = 32) {
    std::vector<coderag::StoredChunk> chunks;
    std::vector<std::string> texts;
    for (const auto& [id, text] : id_texts) {
        coderag::StoredChunk c;
        c.chunk_id = id;
        c.doc_id = id;
        c.path = id + ".py";
        c.span_begin = 0;
        c.span_end = text.size();
        c.meta.structural_kind = coderag::StructuralKind::window;
        c.meta.source_kind = coderag::DocKind::code;
        c.text = text;
        chunks.push_back(std::move(c));
        texts.push_back(text);
    }
    auto embedder = coderag::make_embedder(det_config(dim));
    std::vector<coderag::EmbeddingVector> vectors;
    if (!texts.empty())
        vectors = embedder->embed_batch(texts);

    coderag::Manifest manifest;
    manifest.embed_dim = dim;
    manifest.embed_provider = coderag::EmbedProvider::deterministic_test;
    manifest.n_docs = id_texts.size();
    return coderag::Engine(std::move(manifest), std::move(chunks), std::move(vectors));
}

} // namespace testutil
