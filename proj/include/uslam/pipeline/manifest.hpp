#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace uslam {

// Everything needed to reproduce a run bit-identically: the command, its
// configuration, and content hashes of every file read or written. No
// wall-clock fields.
struct Manifest {
    std::string command;
    std::vector<std::string> arguments;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // path -> content hash
    std::map<std::string, std::string> outputs;  // path -> content hash
};

std::uint64_t fnv1a(const std::string& bytes);
std::string fnv1a_hex(const std::string& bytes);

std::string read_file_bytes(const std::filesystem::path& path);

void write_manifest(const Manifest& manifest, std::ostream& out);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace uslam
