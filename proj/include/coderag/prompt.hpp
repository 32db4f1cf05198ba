#pragma once

#include "coderag/retrieval.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace coderag {

struct AssembledPrompt {
    std::string prompt;
    std::size_t length = 0; // total assembled character count
};

/// Prompt templates are plain text with "{query}" and "{context}"
/// placeholders. A built-in "default" template is always present; templates
/// loaded from a directory (one .txt file per template id) are added on top
/// and may override it.
class PromptTemplateStore {
public:
    PromptTemplateStore();

    void load_directory(const std::filesystem::path& dir);
    bool has(const std::string& template_id) const;

    /// Deterministic assembly: each hit becomes one context block headed by
    /// "[source: <path> [begin,end)]" in the given order. Throws ConfigError
    /// for an unknown template_id.
    AssembledPrompt assemble(const std::string& query, const std::vector<ScoredHit>& hits,
                             const std::string& template_id = "default") const;

private:
    std::map<std::string, std::string> templates_;
};

/// Context-block rendering shared by assemble(); exposed for tests.
std::string render_context_blocks(const std::vector<ScoredHit>& hits);

} // namespace coderag
