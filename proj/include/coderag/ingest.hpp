#pragma once

#include "coderag/document.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace coderag {

/// Result of a repository scan: accepted documents plus non-fatal per-file
/// warnings (decode failures, oversized files, unreadable entries).
struct ScanReport {
    std::vector<Document> documents;
    std::vector<std::string> warnings;
};

/// Walk `root`, select files by extension and exclude globs, and normalize
/// them into Documents. Output is sorted by path (then cell index) and is
/// independent of filesystem enumeration order. Fatal only when `root` is
/// missing or unreadable.
ScanReport scan_repository(const std::filesystem::path& root, const IngestConfig& config,
                           const std::string& repo_rev = "");

/// Split a notebook JSON payload into one Document per non-empty code or
/// markdown cell. Cell indices count original positions, so ids stay stable
/// when other cells change. Throws IngestError on malformed payloads.
std::vector<Document> parse_notebook(const std::string& raw, const std::string& path,
                                     const std::string& repo_rev = "");

/// True when `text` is well-formed UTF-8.
bool is_valid_utf8(const std::string& text);

/// Shell-style glob match against a forward-slash relative path.
/// `*` and `?` do not cross `/`; `**` matches any number of components.
bool glob_match(const std::string& pattern, const std::string& path);

} // namespace coderag
