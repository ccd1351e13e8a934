#pragma once

#include <filesystem>
#include <iosfwd>

#include "uslam/semantics/types.hpp"

namespace uslam {

/// PLY 1.0 with float32 x/y/z, uint8 red/green/blue/label per vertex, in
/// input order; `binary` selects binary_little_endian over ascii. Throws
/// NonFinitePoint if any coordinate is not finite.
void export_ply(const LabeledPointCloud& cloud, bool binary, std::ostream& out);

void save_ply(const std::filesystem::path& path, const LabeledPointCloud& cloud, bool binary);

}  // namespace uslam
