#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

struct TimedPose {
    Timestamp t = 0;
    Pose pose;
};

/// Text lines `t x y z qx qy qz qw`, t in seconds, every field fixed-point
/// with 9 decimals. Times must strictly increase; quaternion norms are
/// checked to 1e-6 on load. Lines starting with '#' are skipped. Quantization
/// keeps round-tripped poses within 1e-9.
void write_trajectory(const std::vector<TimedPose>& poses, std::ostream& out);
std::vector<TimedPose> read_trajectory(std::istream& in);

void save_trajectory(const std::filesystem::path& path, const std::vector<TimedPose>& poses);
std::vector<TimedPose> load_trajectory(const std::filesystem::path& path);

}  // namespace uslam
