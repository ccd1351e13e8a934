#pragma once

#include <filesystem>
#include <iosfwd>

#include "uslam/semantics/types.hpp"

namespace uslam {

/// Grid files carry a short text header (`uslam-grid v1`, type, width,
/// height, a `data` line) followed by raw row-major values: little-endian
/// float32 for depth, one byte per pixel for labels. Loaders throw ParseError
/// on any structural mismatch.
void write_depth_map(const DepthMap& map, std::ostream& out);
DepthMap read_depth_map(std::istream& in);
void write_label_map(const LabelMap& map, std::ostream& out);
LabelMap read_label_map(std::istream& in);

void save_depth_map(const std::filesystem::path& path, const DepthMap& map);
DepthMap load_depth_map(const std::filesystem::path& path);
void save_label_map(const std::filesystem::path& path, const LabelMap& map);
LabelMap load_label_map(const std::filesystem::path& path);

}  // namespace uslam
