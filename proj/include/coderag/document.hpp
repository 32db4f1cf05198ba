#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace coderag {

/// Source kind of an ingested file (or notebook cell).
enum class DocKind {
    code,
    notebook_code,
    notebook_markdown,
    markdown,
    rst,
};

const char* to_string(DocKind kind);
DocKind doc_kind_from_string(const std::string& name);

/// One ingested source or documentation unit. Notebooks contribute one
/// Document per non-empty cell.
struct Document {
    std::string doc_id;   // relative path, plus "#cell<i>" for notebook cells
    std::string path;     // repository-relative path, forward slashes
    DocKind kind = DocKind::code;
    std::string content;  // valid UTF-8, non-empty
    std::string repo_rev; // caller-supplied version identifier, may be empty
};

struct IngestConfig {
    std::set<std::string> include_extensions = {".py", ".ipynb", ".md", ".rst"};
    std::vector<std::string> exclude_globs;
    std::size_t max_file_bytes = 2 * 1024 * 1024;

    void validate() const; // throws ConfigError
};

} // namespace coderag
