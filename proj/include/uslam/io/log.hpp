#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/sensors/depth.hpp"
#include "uslam/sensors/dvl.hpp"
#include "uslam/sensors/imu.hpp"

namespace uslam {

struct CameraObservation {
    std::int64_t track_id = 0;
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

/// All observations of one camera at one time. Frames with no observations
/// are kept; they record that the camera ran and saw nothing.
struct CameraFrame {
    Timestamp t = 0;
    int camera_id = 0;
    std::vector<CameraObservation> observations;
};

using LogRecord = std::variant<ImuSample, DvlSample, DepthSample, CameraFrame>;

Timestamp record_time(const LogRecord& record);

/// One JSON object per line after a `# uslam-log v1` header line. Numeric
/// fields round-trip exactly. Records must be in non-decreasing time order;
/// both directions throw NonMonotonicTimestamps otherwise. read_log throws
/// ParseError naming the 1-based line of the first malformed record.
void write_log(const std::vector<LogRecord>& records, std::ostream& out);
std::vector<LogRecord> read_log(std::istream& in);

void save_log(const std::filesystem::path& path, const std::vector<LogRecord>& records);
std::vector<LogRecord> load_log(const std::filesystem::path& path);

}  // namespace uslam
