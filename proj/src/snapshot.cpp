#include "coderag/snapshot.hpp"

#include "coderag/errors.hpp"
#include "json_codec.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace coderag {

namespace {

constexpr int kFormatVersion = 1;

void write_f32_le(std::ostream& out, float value) {
    auto bits = std::bit_cast<std::uint32_t>(value);
    char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                     static_cast<char>((bits >> 16) & 0xFF),
                     static_cast<char>((bits >> 24) & 0xFF)};
    out.write(bytes, 4);
}

float read_f32_le(const unsigned char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                         (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

std::string random_suffix() {
    std::random_device rd;
    std::uniform_int_distribution<std::uint64_t> dist;
    std::ostringstream out;
    out << std::hex << dist(rd);
    return out.str();
}

void write_snapshot_files(const Engine& engine, const fs::path& dir) {
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out)
            throw SnapshotError("cannot write manifest.json");
        out << manifest_to_json(engine.manifest()).dump(2) << '\n';
        if (!out)
            throw SnapshotError("manifest.json write failure");
    }
    {
        std::ofstream out(dir / "chunks.jsonl", std::ios::binary);
        if (!out)
            throw SnapshotError("cannot write chunks.jsonl");
        for (const auto& chunk : engine.chunks())
            out << stored_chunk_to_json(chunk).dump() << '\n';
        if (!out)
            throw SnapshotError("chunks.jsonl write failure");
    }
    {
        std::ofstream out(dir / "vectors.bin", std::ios::binary);
        if (!out)
            throw SnapshotError("cannot write vectors.bin");
        for (const auto& vec : engine.vector_index().vectors) {
            for (float x : vec)
                write_f32_le(out, x);
        }
        if (!out)
            throw SnapshotError("vectors.bin write failure");
    }
}

} // namespace

void save_snapshot(const Engine& engine, const fs::path& dir) {
    fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    fs::path tmp = parent / (".snapshot-tmp-" + random_suffix());

    try {
        fs::create_directory(tmp);
        write_snapshot_files(engine, tmp);
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
    // Swap into place; a reader never observes a half-written snapshot.
    fs::remove_all(dir, ec);
    fs::rename(tmp, dir, ec);
    if (ec) {
        fs::remove_all(tmp);
        throw SnapshotError("cannot move snapshot into place: " + ec.message());
    }
}

Engine load_snapshot(const fs::path& dir) {
    fs::path manifest_path = dir / "manifest.json";
    fs::path chunks_path = dir / "chunks.jsonl";
    fs::path vectors_path = dir / "vectors.bin";
    for (const auto& p : {manifest_path, chunks_path, vectors_path}) {
        if (!fs::exists(p))
            throw SnapshotError("missing snapshot file: " + p.filename().string());
    }

    std::ifstream min(manifest_path, std::ios::binary);
    json mdoc = json::parse(min, nullptr, false);
    if (mdoc.is_discarded())
        throw SnapshotError("manifest.json is not valid JSON");
    Manifest manifest;
    try {
        manifest = manifest_from_json(mdoc);
    } catch (const json::exception& e) {
        throw SnapshotError(std::string("manifest.json malformed: ") + e.what());
    }
    if (manifest.format_version != kFormatVersion)
        throw SnapshotError("unsupported format_version " +
                            std::to_string(manifest.format_version) + " (expected " +
                            std::to_string(kFormatVersion) + ")");
    if (manifest.embed_dim == 0)
        throw SnapshotError("manifest embed_dim must be > 0");

    std::vector<StoredChunk> chunks;
    chunks.reserve(manifest.n_chunks);
    {
        std::ifstream in(chunks_path, std::ios::binary);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty())
                continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw SnapshotError("chunks.jsonl line " + std::to_string(line_no) +
                                    " is not valid JSON");
            StoredChunk chunk;
            try {
                chunk = stored_chunk_from_json(j);
            } catch (const json::exception& e) {
                throw SnapshotError("chunks.jsonl line " + std::to_string(line_no) +
                                    " malformed: " + e.what());
            }
            if (chunk.span_end <= chunk.span_begin ||
                chunk.text.size() != chunk.span_end - chunk.span_begin)
                throw SnapshotError("chunk span does not match text length: " + chunk.chunk_id);
            chunks.push_back(std::move(chunk));
        }
    }
    if (chunks.size() != manifest.n_chunks)
        throw SnapshotError("chunk count mismatch: manifest says " +
                            std::to_string(manifest.n_chunks) + ", chunks.jsonl has " +
                            std::to_string(chunks.size()));

    std::vector<EmbeddingVector> vectors;
    {
        std::ifstream in(vectors_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string raw = buf.str();
        std::size_t expected = manifest.n_chunks * manifest.embed_dim * 4;
        if (raw.size() != expected)
            throw SnapshotError("vector block size mismatch: expected " +
                                std::to_string(expected) + " bytes, found " +
                                std::to_string(raw.size()));
        const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
        vectors.resize(manifest.n_chunks);
        for (std::size_t i = 0; i < manifest.n_chunks; ++i) {
            vectors[i].resize(manifest.embed_dim);
            for (std::size_t d = 0; d < manifest.embed_dim; ++d) {
                vectors[i][d] = read_f32_le(p);
                p += 4;
            }
        }
    }

    // The lexical index is a pure function of chunk texts; the Engine
    // constructor rebuilds it with the manifest's bm25 parameters.
    try {
        return Engine(std::move(manifest), std::move(chunks), std::move(vectors));
    } catch (const ConfigError& e) {
        throw SnapshotError(std::string("snapshot rejected: ") + e.what());
    }
}

} // namespace coderag
