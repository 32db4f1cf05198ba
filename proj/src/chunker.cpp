#include "coderag/chunker.hpp"

#include "coderag/errors.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <string_view>

namespace coderag {

const char* to_string(StructuralKind kind) {
    switch (kind) {
    case StructuralKind::window: return "window";
    case StructuralKind::class_header: return "class_header";
    case StructuralKind::method: return "method";
    case StructuralKind::function: return "function";
    case StructuralKind::doc_section: return "doc_section";
    }
    return "window";
}

StructuralKind structural_kind_from_string(const std::string& name) {
    if (name == "window") return StructuralKind::window;
    if (name == "class_header") return StructuralKind::class_header;
    if (name == "method") return StructuralKind::method;
    if (name == "function") return StructuralKind::function;
    if (name == "doc_section") return StructuralKind::doc_section;
    throw ConfigError("unknown structural kind: " + name);
}

const char* to_string(ChunkMode mode) {
    return mode == ChunkMode::fixed ? "fixed" : "structural";
}

ChunkMode chunk_mode_from_string(const std::string& name) {
    if (name == "fixed") return ChunkMode::fixed;
    if (name == "structural") return ChunkMode::structural;
    throw ConfigError("unknown chunk mode: " + name);
}

ChunkPolicy ChunkPolicy::defaults() {
    ChunkPolicy policy;
    policy.per_kind[DocKind::code] = {1200, 240, ChunkMode::structural};
    policy.per_kind[DocKind::notebook_code] = {1200, 240, ChunkMode::structural};
    policy.per_kind[DocKind::notebook_markdown] = {800, 160, ChunkMode::fixed};
    policy.per_kind[DocKind::markdown] = {800, 160, ChunkMode::fixed};
    policy.per_kind[DocKind::rst] = {800, 160, ChunkMode::fixed};
    policy.code_fallback = {1200, 240, ChunkMode::fixed};
    return policy;
}

const ChunkParams& ChunkPolicy::params_for(DocKind kind) const {
    auto it = per_kind.find(kind);
    if (it != per_kind.end())
        return it->second;
    return code_fallback;
}

void ChunkPolicy::validate() const {
    for (const auto& [kind, params] : per_kind) {
        if (params.overlap_chars >= params.window_chars)
            throw ConfigError(std::string("chunk overlap must be smaller than window for kind ") +
                              to_string(kind));
    }
    if (code_fallback.overlap_chars >= code_fallback.window_chars)
        throw ConfigError("code fallback overlap must be smaller than window");
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> fixed_spans(std::size_t len, std::size_t window,
                                                             std::size_t overlap) {
    if (overlap >= window)
        throw ConfigError("chunk overlap must be smaller than window");
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    if (len == 0)
        return spans;
    std::size_t stride = window - overlap;
    for (std::size_t start = 0; start < len; start += stride) {
        std::size_t end = std::min(start + window, len);
        spans.emplace_back(start, end);
        if (end == len)
            break;
    }
    return spans;
}

struct LineInfo {
    std::size_t begin = 0;     // offset of first char
    std::size_t end = 0;       // offset past trailing newline (or content end)
    std::size_t indent = 0;    // leading space/tab count
    bool blank = true;
};

std::vector<LineInfo> scan_lines(const std::string& content) {
    std::vector<LineInfo> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
        LineInfo line;
        line.begin = pos;
        std::size_t nl = content.find('\n', pos);
        std::size_t text_end = (nl == std::string::npos) ? content.size() : nl;
        line.end = (nl == std::string::npos) ? content.size() : nl + 1;
        std::size_t i = pos;
        while (i < text_end && (content[i] == ' ' || content[i] == '\t'))
            ++i;
        line.indent = i - pos;
        while (i < text_end && line.blank) {
            if (content[i] != ' ' && content[i] != '\t' && content[i] != '\r')
                line.blank = false;
            ++i;
        }
        lines.push_back(line);
        pos = line.end;
    }
    return lines;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// First identifier-shaped token of the line, after indentation.
std::string_view first_token(const std::string& content, const LineInfo& line) {
    std::size_t i = line.begin + line.indent;
    std::size_t j = i;
    while (j < line.end && is_ident_char(content[j]))
        ++j;
    return std::string_view(content).substr(i, j - i);
}

bool is_decorator_line(const std::string& content, const LineInfo& line) {
    return !line.blank && line.begin + line.indent < line.end && content[line.begin + line.indent] == '@';
}

// Declaration keyword check; returns the name-start offset past the keyword.
std::optional<std::size_t> decl_keyword(const std::string& content, const LineInfo& line,
                                        bool& is_class) {
    auto tok = first_token(content, line);
    std::size_t name_at = line.begin + line.indent + tok.size();
    if (tok == "class") {
        is_class = true;
        return name_at;
    }
    if (tok == "def") {
        is_class = false;
        return name_at;
    }
    if (tok == "async") {
        std::size_t i = name_at;
        while (i < line.end && content[i] == ' ')
            ++i;
        std::size_t j = i;
        while (j < line.end && is_ident_char(content[j]))
            ++j;
        if (std::string_view(content).substr(i, j - i) == "def") {
            is_class = false;
            return j;
        }
    }
    return std::nullopt;
}

std::string decl_name(const std::string& content, const LineInfo& line, std::size_t from) {
    std::size_t i = from;
    while (i < line.end && content[i] == ' ')
        ++i;
    std::size_t j = i;
    while (j < line.end && is_ident_char(content[j]))
        ++j;
    return content.substr(i, j - i);
}

struct Decl {
    bool is_class = false;
    std::string name;
    std::size_t kw_line = 0;    // line holding the keyword
    std::size_t start_line = 0; // includes attached decorators
    std::size_t end_line = 0;   // exclusive; past the last non-blank body line
};

// Scan [first, last) for declarations whose keyword sits exactly at
// `decl_indent`. A declaration's extent runs until the next non-blank line at
// equal-or-lesser indentation; decorators directly above attach to it.
std::vector<Decl> scan_decls(const std::string& content, const std::vector<LineInfo>& lines,
                             std::size_t first, std::size_t last, std::size_t decl_indent) {
    std::vector<Decl> decls;
    std::optional<std::size_t> decorator_start;
    for (std::size_t i = first; i < last; ++i) {
        const LineInfo& line = lines[i];
        if (line.blank)
            continue; // blanks do not break a decorator run
        if (line.indent != decl_indent) {
            decorator_start.reset();
            continue;
        }
        if (is_decorator_line(content, line)) {
            if (!decorator_start)
                decorator_start = i;
            continue;
        }
        bool is_class = false;
        auto name_at = decl_keyword(content, line, is_class);
        if (!name_at) {
            decorator_start.reset();
            continue;
        }
        Decl decl;
        decl.is_class = is_class;
        decl.name = decl_name(content, line, *name_at);
        decl.kw_line = i;
        decl.start_line = decorator_start.value_or(i);
        std::size_t last_nonblank = i;
        std::size_t j = i + 1;
        while (j < last && (lines[j].blank || lines[j].indent > decl_indent)) {
            if (!lines[j].blank)
                last_nonblank = j;
            ++j;
        }
        decl.end_line = last_nonblank + 1;
        std::size_t resume = decl.end_line - 1;
        decls.push_back(std::move(decl));
        decorator_start.reset();
        i = resume;
    }
    return decls;
}

struct Region {
    std::size_t begin = 0;
    std::size_t end = 0;
    ChunkMeta meta;
    bool windowed = false; // remainder region: always re-split into windows
};

} // namespace

std::vector<Chunk> chunk_fixed(const Document& doc, std::size_t window, std::size_t overlap) {
    auto spans = fixed_spans(doc.content.size(), window, overlap);
    std::vector<Chunk> chunks;
    chunks.reserve(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        auto [s, e] = spans[i];
        Chunk c;
        c.chunk_id = doc.doc_id + "#" + std::to_string(i);
        c.doc_id = doc.doc_id;
        c.text = doc.content.substr(s, e - s);
        c.span_begin = s;
        c.span_end = e;
        c.meta.structural_kind = StructuralKind::window;
        c.meta.source_kind = doc.kind;
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<Chunk> split_code_structure(const Document& doc, const ChunkParams& fallback) {
    if (fallback.overlap_chars >= fallback.window_chars)
        throw ConfigError("chunk overlap must be smaller than window");

    const std::string& content = doc.content;
    auto lines = scan_lines(content);
    auto top = scan_decls(content, lines, 0, lines.size(), 0);

    if (top.empty())
        return chunk_fixed(doc, fallback.window_chars, fallback.overlap_chars);

    std::vector<Region> regions;
    std::vector<char> covered(lines.size(), 0);
    auto cover = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i)
            covered[i] = 1;
    };

    for (const auto& decl : top) {
        if (!decl.is_class) {
            Region region;
            region.begin = lines[decl.start_line].begin;
            region.end = lines[decl.end_line - 1].end;
            region.meta.structural_kind = StructuralKind::function;
            region.meta.symbol_name = decl.name;
            region.meta.source_kind = doc.kind;
            regions.push_back(std::move(region));
            cover(decl.start_line, decl.end_line);
            continue;
        }

        // Methods live at the indentation of the first non-blank body line.
        std::size_t body_first = decl.kw_line + 1;
        std::size_t body_indent = 0;
        bool has_body = false;
        for (std::size_t i = body_first; i < decl.end_line; ++i) {
            if (!lines[i].blank) {
                body_indent = lines[i].indent;
                has_body = true;
                break;
            }
        }
        std::vector<Decl> methods;
        if (has_body && body_indent > lines[decl.kw_line].indent) {
            for (auto& m : scan_decls(content, lines, body_first, decl.end_line, body_indent)) {
                if (!m.is_class) // nested classes stay in the enclosing extent
                    methods.push_back(std::move(m));
            }
        }

        std::size_t header_end_line;
        std::size_t first_method = 0; // index of first method not folded into the header
        if (methods.empty()) {
            header_end_line = decl.end_line;
        } else if (methods.front().name == "__init__") {
            header_end_line = methods.front().end_line;
            first_method = 1;
        } else {
            header_end_line = methods.front().start_line;
        }

        Region header;
        header.begin = lines[decl.start_line].begin;
        header.end = lines[header_end_line - 1].end;
        header.meta.structural_kind = StructuralKind::class_header;
        header.meta.symbol_name = decl.name;
        header.meta.source_kind = doc.kind;
        regions.push_back(std::move(header));
        cover(decl.start_line, header_end_line);

        for (std::size_t m = first_method; m < methods.size(); ++m) {
            // A constructor that does not lead the method list cannot join the
            // header contiguously; its lines fall through to window coverage.
            if (methods[m].name == "__init__")
                continue;
            Region region;
            region.begin = lines[methods[m].start_line].begin;
            region.end = lines[methods[m].end_line - 1].end;
            region.meta.structural_kind = StructuralKind::method;
            region.meta.symbol_name = methods[m].name;
            region.meta.parent_symbol = decl.name;
            region.meta.source_kind = doc.kind;
            regions.push_back(std::move(region));
            cover(methods[m].start_line, methods[m].end_line);
        }
    }

    // Remaining statement runs, trimmed of blank edges, become window regions.
    std::size_t i = 0;
    while (i < lines.size()) {
        if (covered[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < lines.size() && !covered[j])
            ++j;
        std::size_t first = i, last = j;
        while (first < last && lines[first].blank)
            ++first;
        while (last > first && lines[last - 1].blank)
            --last;
        if (first < last) {
            Region region;
            region.begin = lines[first].begin;
            region.end = lines[last - 1].end;
            region.meta.structural_kind = StructuralKind::window;
            region.meta.source_kind = doc.kind;
            region.windowed = true;
            regions.push_back(std::move(region));
        }
        i = j;
    }

    std::sort(regions.begin(), regions.end(),
              [](const Region& a, const Region& b) { return a.begin < b.begin; });

    // Expand regions into chunk spans; oversize structural chunks are
    // re-split into fixed windows that keep their metadata.
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, ChunkMeta>> pieces;
    const std::size_t oversize = 2 * fallback.window_chars;
    for (const auto& region : regions) {
        std::size_t len = region.end - region.begin;
        bool resplit = region.windowed ||
                       ((region.meta.structural_kind == StructuralKind::class_header ||
                         region.meta.structural_kind == StructuralKind::method) &&
                        len > oversize);
        if (resplit && len > fallback.window_chars) {
            for (auto [s, e] : fixed_spans(len, fallback.window_chars, fallback.overlap_chars))
                pieces.push_back({{region.begin + s, region.begin + e}, region.meta});
        } else {
            pieces.push_back({{region.begin, region.end}, region.meta});
        }
    }

    std::vector<Chunk> chunks;
    chunks.reserve(pieces.size());
    for (std::size_t n = 0; n < pieces.size(); ++n) {
        auto [span, meta] = pieces[n];
        Chunk c;
        c.chunk_id = doc.doc_id + "#" + std::to_string(n);
        c.doc_id = doc.doc_id;
        c.text = content.substr(span.first, span.second - span.first);
        c.span_begin = span.first;
        c.span_end = span.second;
        c.meta = meta;
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkPolicy& policy) {
    policy.validate();
    const ChunkParams& params = policy.params_for(doc.kind);
    if (params.mode == ChunkMode::structural &&
        (doc.kind == DocKind::code || doc.kind == DocKind::notebook_code)) {
        ChunkParams fallback = policy.code_fallback;
        fallback.mode = ChunkMode::fixed;
        return split_code_structure(doc, fallback);
    }
    return chunk_fixed(doc, params.window_chars, params.overlap_chars);
}

} // namespace coderag
