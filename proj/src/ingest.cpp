#include "coderag/ingest.hpp"

#include "coderag/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace coderag {

const char* to_string(DocKind kind) {
    switch (kind) {
    case DocKind::code: return "code";
    case DocKind::notebook_code: return "notebook_code";
    case DocKind::notebook_markdown: return "notebook_markdown";
    case DocKind::markdown: return "markdown";
    case DocKind::rst: return "rst";
    }
    return "code";
}

DocKind doc_kind_from_string(const std::string& name) {
    if (name == "code") return DocKind::code;
    if (name == "notebook_code") return DocKind::notebook_code;
    if (name == "notebook_markdown") return DocKind::notebook_markdown;
    if (name == "markdown") return DocKind::markdown;
    if (name == "rst") return DocKind::rst;
    throw ConfigError("unknown document kind: " + name);
}

void IngestConfig::validate() const {
    if (include_extensions.empty())
        throw ConfigError("include_extensions must be non-empty");
    if (max_file_bytes == 0)
        throw ConfigError("max_file_bytes must be > 0");
}

bool is_valid_utf8(const std::string& text) {
    const auto* p = reinterpret_cast<const unsigned char*>(text.data());
    std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char c = p[i];
        std::size_t len;
        unsigned cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1Fu;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0Fu;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07u;
        } else {
            return false;
        }
        if (i + len > n)
            return false;
        for (std::size_t j = 1; j < len; ++j) {
            if ((p[i + j] & 0xC0) != 0x80)
                return false;
            cp = (cp << 6) | (p[i + j] & 0x3Fu);
        }
        // reject overlong forms, surrogates, and out-of-range points
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000))
            return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += len;
    }
    return true;
}

namespace {

// Recursive matcher over '/'-separated components. '**' may consume any
// number of components; '*' and '?' stay within one component.
bool match_component(const char* pat, const char* pend, const char* str, const char* send) {
    while (pat != pend) {
        char pc = *pat;
        if (pc == '*') {
            ++pat;
            for (const char* s = str; ; ++s) {
                if (match_component(pat, pend, s, send))
                    return true;
                if (s == send)
                    break;
            }
            return false;
        }
        if (str == send)
            return false;
        if (pc != '?' && pc != *str)
            return false;
        ++pat;
        ++str;
    }
    return str == send;
}

std::vector<std::string> split_path(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '/') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

bool match_components(const std::vector<std::string>& pat, std::size_t pi,
                      const std::vector<std::string>& path, std::size_t si) {
    if (pi == pat.size())
        return si == path.size();
    if (pat[pi] == "**") {
        for (std::size_t skip = si; skip <= path.size(); ++skip) {
            if (match_components(pat, pi + 1, path, skip))
                return true;
        }
        return false;
    }
    if (si == path.size())
        return false;
    const std::string& p = pat[pi];
    const std::string& s = path[si];
    if (!match_component(p.data(), p.data() + p.size(), s.data(), s.data() + s.size()))
        return false;
    return match_components(pat, pi + 1, path, si + 1);
}

} // namespace

bool glob_match(const std::string& pattern, const std::string& path) {
    return match_components(split_path(pattern), 0, split_path(path), 0);
}

std::vector<Document> parse_notebook(const std::string& raw, const std::string& path,
                                     const std::string& repo_rev) {
    nlohmann::json nb;
    try {
        nb = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("notebook JSON parse failure in " + path + ": " + e.what());
    }
    if (!nb.is_object() || !nb.contains("cells") || !nb["cells"].is_array())
        throw IngestError("notebook missing top-level \"cells\" array: " + path);

    std::vector<Document> docs;
    std::size_t index = 0;
    for (const auto& cell : nb["cells"]) {
        std::size_t cell_index = index++;
        if (!cell.is_object() || !cell.contains("cell_type"))
            continue;
        std::string cell_type = cell["cell_type"].is_string() ? cell["cell_type"].get<std::string>() : "";
        DocKind kind;
        if (cell_type == "code")
            kind = DocKind::notebook_code;
        else if (cell_type == "markdown")
            kind = DocKind::notebook_markdown;
        else
            continue; // raw and unknown cell types are not indexed

        std::string content;
        if (cell.contains("source")) {
            const auto& src = cell["source"];
            if (src.is_string()) {
                content = src.get<std::string>();
            } else if (src.is_array()) {
                for (const auto& line : src) {
                    if (line.is_string())
                        content += line.get<std::string>();
                }
            }
        }
        if (content.empty())
            continue;

        Document doc;
        doc.doc_id = path + "#cell" + std::to_string(cell_index);
        doc.path = path;
        doc.kind = kind;
        doc.content = std::move(content);
        doc.repo_rev = repo_rev;
        docs.push_back(std::move(doc));
    }
    return docs;
}

namespace {

std::optional<DocKind> kind_for_extension(const std::string& ext) {
    if (ext == ".py") return DocKind::code;
    if (ext == ".md" || ext == ".markdown") return DocKind::markdown;
    if (ext == ".rst") return DocKind::rst;
    return std::nullopt; // .ipynb handled separately
}

bool read_file(const fs::path& p, std::string& out) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        return false;
    out = buf.str();
    return true;
}

} // namespace

ScanReport scan_repository(const fs::path& root, const IngestConfig& config,
                           const std::string& repo_rev) {
    config.validate();

    std::error_code ec;
    if (!fs::exists(root, ec) || ec)
        throw IngestError("ingestion root does not exist: " + root.string());
    if (!fs::is_directory(root, ec) || ec)
        throw IngestError("ingestion root is not a directory: " + root.string());

    std::vector<std::pair<std::string, fs::path>> candidates; // (relative, absolute)
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec)
        throw IngestError("ingestion root is not readable: " + root.string());
    for (const auto& entry : it) {
        if (!entry.is_regular_file(ec) || ec)
            continue;
        std::string rel = entry.path().lexically_relative(root).generic_string();
        std::string ext = entry.path().extension().string();
        if (!config.include_extensions.count(ext))
            continue;
        bool excluded = false;
        for (const auto& glob : config.exclude_globs) {
            if (glob_match(glob, rel)) {
                excluded = true;
                break;
            }
        }
        if (excluded)
            continue;
        candidates.emplace_back(std::move(rel), entry.path());
    }
    // Deterministic order regardless of filesystem enumeration.
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ScanReport report;
    for (const auto& [rel, abs] : candidates) {
        std::error_code sec;
        auto size = fs::file_size(abs, sec);
        if (sec) {
            report.warnings.push_back("unreadable: " + rel);
            continue;
        }
        if (size > config.max_file_bytes) {
            report.warnings.push_back("oversized (" + std::to_string(size) + " bytes): " + rel);
            continue;
        }
        std::string content;
        if (!read_file(abs, content)) {
            report.warnings.push_back("read failure: " + rel);
            continue;
        }
        if (content.empty())
            continue;
        if (!is_valid_utf8(content)) {
            report.warnings.push_back("invalid UTF-8: " + rel);
            continue;
        }

        std::string ext = abs.extension().string();
        if (ext == ".ipynb") {
            try {
                auto cells = parse_notebook(content, rel, repo_rev);
                for (auto& d : cells)
                    report.documents.push_back(std::move(d));
            } catch (const IngestError& e) {
                report.warnings.push_back(e.what());
            }
            continue;
        }
        auto kind = kind_for_extension(ext);
        if (!kind) {
            report.warnings.push_back("no kind mapping for extension " + ext + ": " + rel);
            continue;
        }
        Document doc;
        doc.doc_id = rel;
        doc.path = rel;
        doc.kind = *kind;
        doc.content = std::move(content);
        doc.repo_rev = repo_rev;
        report.documents.push_back(std::move(doc));
    }
    return report;
}

} // namespace coderag
