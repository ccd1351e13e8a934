#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "uslam/graph/graph.hpp"
#include "uslam/io/associate.hpp"
#include "uslam/io/calibration.hpp"
#include "uslam/io/trajectory.hpp"
#include "uslam/sim/simulate.hpp"

namespace uslam {

struct EstimatorOptions {
    bool use_camera = true;
    bool use_imu = true;
    bool use_dvl = true;
    bool use_depth = true;

    double pixel_sigma = 1.0;   // px
    double dvl_sigma = 0.02;    // m/s
    double depth_sigma = 0.05;  // m
    double huber_delta = 1.345;  // threshold on the whitened pixel residual; <= 0 disables
    ImuNoiseSpec imu_noise;
    Eigen::Vector3d gravity = Eigen::Vector3d(0.0, 0.0, 9.81);

    bool optimize_extrinsics = false;
    double extrinsic_prior_sigma_t = 0.5;    // m; loose anchor, negligible bias
    double extrinsic_prior_sigma_r = 0.175;  // rad
    int min_track_length = 2;       // observations needed to instantiate a landmark
    double fallback_point_depth = 5.0;  // m along the first ray when triangulation fails

    AssociationOptions association;
    SolveOptions solve;
};

struct EstimatorResult {
    std::vector<TimedPose> trajectory;  // body -> world at each keyframe
    std::vector<Timestamp> state_times;
    std::map<std::int64_t, Eigen::Vector3d> landmarks;
    SolveReport report;
    AssociationReport association;
};

// Builds one nav state per camera keyframe time, wires the enabled factor
// kinds, and solves. Initial states come from `initial_override` when given
// (nearest-time lookup), otherwise from IMU/DVL/depth dead reckoning.
EstimatorResult run_estimator(const std::vector<LogRecord>& log, const CalibrationFile& calib,
                              const EstimatorOptions& options = {},
                              const std::vector<TimedNavState>* initial_override = nullptr);

}  // namespace uslam
