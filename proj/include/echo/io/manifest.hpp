// manifest.hpp - run provenance: config hash, seed, tool version
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace echo::io {

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Hash covering everything that affects outputs: the raw config text plus
/// the effective seed (a --seed override changes the hash).
std::string config_hash(const std::string& config_text, std::uint64_t seed);

struct Manifest {
    std::string tool;
    std::string version;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;   // file names relative to the manifest
};

std::string manifest_to_json(const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace echo::io
