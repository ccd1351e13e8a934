#include "uslam/pipeline/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include "uslam/common.hpp"

namespace uslam {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string fnv1a_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_manifest(const Manifest& manifest, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["command"] = manifest.command;
    doc["arguments"] = manifest.arguments;
    doc["seed"] = manifest.seed;
    doc["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [path, hash] : manifest.inputs) doc["inputs"][path] = hash;
    doc["outputs"] = nlohmann::ordered_json::object();
    for (const auto& [path, hash] : manifest.outputs) doc["outputs"][path] = hash;
    out << doc.dump(2) << "\n";
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    write_manifest(manifest, out);
}

}  // namespace uslam
