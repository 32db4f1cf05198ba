#pragma once

#include "coderag/engine.hpp"

#include <filesystem>

namespace coderag {

/// Persist a frozen engine as manifest.json + chunks.jsonl + vectors.bin
/// (little-endian 32-bit floats, row-major, row order matching the chunk
/// lines). The snapshot is written to a temp directory and renamed into
/// place, so a failed write never leaves a partial snapshot at `dir`.
void save_snapshot(const Engine& engine, const std::filesystem::path& dir);

/// Validate the manifest invariants, reload chunks and vectors, and rebuild
/// the lexical index from chunk texts. Throws SnapshotError naming the
/// failing check.
Engine load_snapshot(const std::filesystem::path& dir);

} // namespace coderag
