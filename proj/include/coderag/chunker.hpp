#pragma once

#include "coderag/document.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coderag {

enum class StructuralKind {
    window,
    class_header,
    method,
    function,
    doc_section,
};

const char* to_string(StructuralKind kind);
StructuralKind structural_kind_from_string(const std::string& name);

struct ChunkMeta {
    StructuralKind structural_kind = StructuralKind::window;
    std::optional<std::string> symbol_name;
    std::optional<std::string> parent_symbol; // enclosing class, methods only
    DocKind source_kind = DocKind::code;
};

/// A retrievable text unit. `text` is always the byte-exact slice
/// [span_begin, span_end) of the parent document content.
struct Chunk {
    std::string chunk_id; // doc_id + "#" + ordinal
    std::string doc_id;
    std::string text;
    std::size_t span_begin = 0;
    std::size_t span_end = 0;
    ChunkMeta meta;
};

enum class ChunkMode { fixed, structural };

const char* to_string(ChunkMode mode);
ChunkMode chunk_mode_from_string(const std::string& name);

struct ChunkParams {
    std::size_t window_chars = 800;
    std::size_t overlap_chars = 160;
    ChunkMode mode = ChunkMode::fixed;
};

/// Per-kind chunking parameters. Code kinds default to the structural
/// splitter; documentation kinds to fixed windows. `code_fallback` drives
/// window chunks inside the structural pass and oversize re-splitting.
struct ChunkPolicy {
    std::map<DocKind, ChunkParams> per_kind;
    ChunkParams code_fallback{1200, 240, ChunkMode::fixed};

    static ChunkPolicy defaults();
    const ChunkParams& params_for(DocKind kind) const;
    void validate() const; // throws ConfigError when overlap >= window
};

/// Sliding-window segmentation with stride = window - overlap. Spans are
/// [i*stride, min(i*stride + window, len)); the final chunk may be shorter.
/// Empty content yields an empty list.
std::vector<Chunk> chunk_fixed(const Document& doc, std::size_t window, std::size_t overlap);

/// Structure-aware splitter for code documents. Emits one class_header chunk
/// per top-level class (signature, immediate docstring, and constructor body
/// when the constructor leads the method list), one method chunk per other
/// method, one function chunk per module-level function, and window chunks
/// over the remaining statement runs. Oversize class_header/method chunks
/// (> 2x fallback window) are re-split into fixed windows that retain their
/// metadata. Files without detectable declarations degrade to pure window
/// chunking.
std::vector<Chunk> split_code_structure(const Document& doc,
                                        const ChunkParams& fallback = {1200, 240, ChunkMode::fixed});

/// Dispatch on the policy entry for doc.kind.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkPolicy& policy);

} // namespace coderag
