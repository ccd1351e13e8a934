#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/sensors/imu.hpp"

namespace uslam {

/// One closed loop per listed radius, smoothly transitioning between radii;
/// the last radius repeats until the survey duration is covered. Depth runs
/// from depth_start to depth_end over the whole survey.
struct ConcentricCirclesSpec {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    std::vector<double> radii = {5.0};
    double depth_start = 5.0;  // m, +down
    double depth_end = 5.0;
    double transition_s = 6.0;  // radius-change ramp duration
};

/// Boustrophedon lanes along +/-x. The serpentine marches in +y for `lanes`
/// lanes, then folds back, staying inside the extent for any duration.
struct LawnmowerSpec {
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();
    double lane_length = 20.0;  // m
    double spacing = 2.0;       // m between adjacent lanes
    int lanes = 5;
    double depth = 5.0;  // m, constant
};

/// Closed polygon through the waypoints with rounded corners; repeats until
/// the duration is covered. Corners are cut by the turn fillets, so waypoints
/// are passed within a few centimeters rather than exactly.
struct ReturnLoopSpec {
    std::vector<Eigen::Vector2d> waypoints;
    double depth = 5.0;
    double turn_radius = 1.5;  // m
};

struct SurveySpec {
    std::variant<ConcentricCirclesSpec, LawnmowerSpec, ReturnLoopSpec> pattern =
        ConcentricCirclesSpec{};
    double speed = 0.5;     // m/s, horizontal
    double duration = 60.0;  // s
    /// Amplitude of a smooth sinusoidal roll/pitch sway. Zero keeps the
    /// vehicle exactly level.
    double sigma_roll_pitch = 0.0;  // rad
    std::uint64_t seed = 0;
};

/// Landmarks drawn uniformly inside a box, or on the surface of a horizontal
/// tube along x (radius size.y / 2) for pipeline-like structure.
struct LandmarkCluster {
    enum class Shape { Box, Tube };
    Shape shape = Shape::Box;
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d size = Eigen::Vector3d::Ones();
    int count = 0;                 // explicit landmark count
    double density_per_m2 = 0.0;   // used when count == 0: count = density * size.x * size.y
    std::uint8_t semantic_class = 0;
};

struct WorldSpec {
    std::vector<LandmarkCluster> clusters;
};

/// Camera dropout interval. Recognition probability applies to landmarks
/// re-observed after the blackout: with probability p the track keeps its id,
/// otherwise the track restarts under a fresh id.
struct Blackout {
    double start_s = 0.0;
    double end_s = 0.0;
    double recognition_p = 1.0;
};

struct DegradationSchedule {
    std::vector<Blackout> blackouts;
    /// Recognition probability for re-observations after an out-of-view gap
    /// that contains no blackout (a loop-closure revisit).
    double recognition_p = 1.0;
    /// Minimum absence before a re-observation counts as a recognition event.
    double reobservation_gap_s = 5.0;
};

struct SensorRates {
    double camera_hz = 10.0;
    double imu_hz = 200.0;
    double dvl_hz = 7.0;
    double depth_hz = 5.0;
};

struct SimNoise {
    double pixel_sigma = 1.0;   // px
    double dvl_sigma = 0.02;    // m/s per axis
    double depth_sigma = 0.05;  // m
    ImuNoiseSpec imu;
    bool bias_random_walk = true;

    /// All-zero noise, no bias walk; measurements become exact.
    static SimNoise none() {
        SimNoise n;
        n.pixel_sigma = 0.0;
        n.dvl_sigma = 0.0;
        n.depth_sigma = 0.0;
        n.imu.gyro_noise_density = 0.0;
        n.imu.accel_noise_density = 0.0;
        n.imu.gyro_bias_random_walk = 0.0;
        n.imu.accel_bias_random_walk = 0.0;
        n.bias_random_walk = false;
        return n;
    }
};

struct SimConfig {
    SensorRates rates;
    SimNoise noise;
    DegradationSchedule degradation;
    double max_range_m = 8.0;      // visual range gate
    double min_cam_depth_m = 0.2;  // minimum z in the camera frame
    /// Uniform timestamp jitter half-width for camera/DVL/depth records; the
    /// IMU stays exactly periodic. Clamped below half the sensor period so
    /// per-sensor order is preserved.
    double timestamp_jitter_s = 0.0;
    std::uint64_t seed = 0;
};

}  // namespace uslam
