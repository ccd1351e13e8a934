#pragma once

#include <vector>

#include "uslam/io/log.hpp"

namespace uslam {

/// Measurements bound to one nav-state time. The IMU batch covers
/// [t, next state time); when the raw stream has no sample exactly at t, the
/// batch opens with a sample interpolated to t and first_imu_synthetic is
/// set.
struct StateBundle {
    Timestamp t = 0;
    std::vector<CameraFrame> frames;
    std::vector<DvlSample> dvl;
    std::vector<DepthSample> depth;
    std::vector<ImuSample> imu;
    bool first_imu_synthetic = false;
};

struct AssociationReport {
    int imu_in = 0;         // raw IMU samples placed into batches
    int imu_synthetic = 0;  // interpolated boundary samples added
    int imu_out = 0;        // total IMU samples across batches
    int unassociated_imu = 0;
    int unassociated_dvl = 0;
    int unassociated_depth = 0;
    int unassociated_camera = 0;
};

struct AssociationOptions {
    Timestamp tolerance = 50'000'000;  // DVL/depth nearest-state window
};

/// Bins a time-sorted log against sorted state times: camera frames require
/// an exact timestamp match, DVL/depth bind to the nearest state within the
/// tolerance (ties to the earlier state), IMU samples partition into
/// half-open inter-state batches. Records that bind nowhere are counted in
/// the report, never dropped silently: imu_in + imu_synthetic == imu_out.
std::vector<StateBundle> associate(const std::vector<LogRecord>& records,
                                   const std::vector<Timestamp>& state_times,
                                   const AssociationOptions& options, AssociationReport* report);

}  // namespace uslam
