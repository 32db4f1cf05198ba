#pragma once

// Shared test helpers: scratch directories and fixture-tree writers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng{std::random_device{}()};
        std::ostringstream name;
        name << "coderag-test-" << std::hex << rng();
        path_ = fs::temp_directory_path() / name.str();
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Deterministic pseudo-text: `n_words` space-separated words drawn from a
/// seeded generator. Used to build corpora with no hidden structure.
inline std::string synthetic_words(std::uint64_t seed, std::size_t n_words) {
    std::mt19937_64 rng{seed};
    static const char* pool[] = {"lattice", "solver",  "tensor",  "stream", "kernel",
                                 "buffer",  "metric",  "packet",  "module", "branch",
                                 "signal",  "vector",  "matrix",  "filter", "window",
                                 "thread",  "object",  "handle",  "parser", "framed"};
    std::ostringstream out;
    for (std::size_t i = 0; i < n_words; ++i) {
        if (i)
            out << ' ';
        out << pool[rng() % (sizeof(pool) / sizeof(pool[0]))];
    }
    return out.str();
}

} // namespace testutil
