#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "uslam/io/calibration.hpp"
#include "uslam/io/log.hpp"
#include "uslam/semantics/types.hpp"
#include "uslam/sensors/imu.hpp"
#include "uslam/sim/trajectory.hpp"
#include "uslam/sim/world.hpp"

namespace uslam {

struct TimedNavState {
    Timestamp t = 0;
    NavState state;
};

struct SimOutput {
    /// One state per IMU sample time. Rotations, velocities, and biases are
    /// the exact values behind the emitted measurements.
    std::vector<TimedNavState> truth;
    std::vector<LogRecord> log;
    World world;
    /// Every emitted track id with the landmark it actually observes and the
    /// time the id first appeared.
    std::map<std::int64_t, std::int64_t> track_to_landmark;
    std::map<std::int64_t, Timestamp> track_first_seen;
    Timestamp duration_ns = 0;
};

/// Emits the multi-sensor log for a survey. Measurements are generated so
/// that a noiseless log is exactly consistent with `truth` under the
/// estimator's models: IMU rates/specific forces integrate to the truth
/// states, DVL and depth evaluate to zero residual, and landmarks reproject
/// onto their emitted pixels. Camera records are suppressed during blackout
/// intervals; landmarks re-observed after an absence of at least
/// `reobservation_gap_s` keep their track id with the applicable recognition
/// probability and restart under a fresh id (>= 1000000) otherwise.
/// Throws InvalidRates for non-positive rates and InvalidSpec for bad
/// blackout schedules or an unusable world/rig.
SimOutput synthesize_log(const SurveyTrajectory& traj, const World& world,
                         const CalibrationFile& calib, const SimConfig& config);

/// Track ids emitted up to time t mapped to their true landmark ids.
std::map<std::int64_t, std::int64_t> reassociation_oracle(const SimOutput& sim, Timestamp t);

/// Splats every landmark in range into a depth/label image pair from the
/// given camera pose (camera -> world), nearest landmark winning each pixel.
/// Pixels no landmark hits keep depth 0.
std::pair<DepthMap, LabelMap> render_oracle_maps(const World& world,
                                                 const CameraIntrinsics& intrinsics,
                                                 const Pose& camera_to_world, double max_range);

}  // namespace uslam
