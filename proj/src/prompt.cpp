#include "coderag/prompt.hpp"

#include "coderag/errors.hpp"

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace coderag {

namespace {

const char* kDefaultTemplate =
    "You are a coding assistant for a software repository. Ground every answer\n"
    "in the context blocks below; if the context does not cover the question,\n"
    "say so instead of guessing.\n"
    "\n"
    "{context}\n"
    "Question: {query}\n";

// Single pass over the template text; substituted content is never
// rescanned, so retrieved chunks containing literal placeholders stay
// untouched.
std::string render_template(const std::string& templ, const std::string& query,
                            const std::string& context) {
    std::string out;
    out.reserve(templ.size() + query.size() + context.size());
    std::size_t pos = 0;
    while (pos < templ.size()) {
        std::size_t brace = templ.find('{', pos);
        if (brace == std::string::npos) {
            out.append(templ, pos, std::string::npos);
            break;
        }
        out.append(templ, pos, brace - pos);
        if (templ.compare(brace, 7, "{query}") == 0) {
            out += query;
            pos = brace + 7;
        } else if (templ.compare(brace, 9, "{context}") == 0) {
            out += context;
            pos = brace + 9;
        } else {
            out += '{';
            pos = brace + 1;
        }
    }
    return out;
}

} // namespace

std::string render_context_blocks(const std::vector<ScoredHit>& hits) {
    std::string out;
    for (const auto& hit : hits) {
        out += "[source: " + hit.path + " [" + std::to_string(hit.span_begin) + "," +
               std::to_string(hit.span_end) + ")]\n";
        out += hit.text;
        if (out.empty() || out.back() != '\n')
            out += '\n';
        out += '\n';
    }
    return out;
}

PromptTemplateStore::PromptTemplateStore() {
    templates_["default"] = kDefaultTemplate;
}

void PromptTemplateStore::load_directory(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ConfigError("template directory does not exist: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt")
            continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        templates_[entry.path().stem().string()] = buf.str();
    }
}

bool PromptTemplateStore::has(const std::string& template_id) const {
    return templates_.count(template_id) > 0;
}

AssembledPrompt PromptTemplateStore::assemble(const std::string& query,
                                              const std::vector<ScoredHit>& hits,
                                              const std::string& template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end())
        throw ConfigError("unknown prompt template: " + template_id);
    std::string prompt = render_template(it->second, query, render_context_blocks(hits));
    return {prompt, prompt.size()};
}

} // namespace coderag
