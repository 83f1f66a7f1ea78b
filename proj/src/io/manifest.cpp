#include "echo/io/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "echo/errors.hpp"
#include "echo/version.hpp"

namespace echo::io {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_hash(const std::string& config_text, std::uint64_t seed) {
    std::ostringstream os;
    os << config_text << '\0' << "seed=" << seed;
    std::ostringstream hex;
    hex << "fnv1a64:" << std::hex << fnv1a64(os.str());
    return hex.str();
}

std::string manifest_to_json(const Manifest& manifest) {
    nlohmann::ordered_json j;
    j["tool"] = manifest.tool.empty() ? kToolName : manifest.tool;
    j["version"] = manifest.version.empty() ? kToolVersion : manifest.version;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["outputs"] = manifest.outputs;
    return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path,
                    const Manifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << manifest_to_json(manifest);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace echo::io
