#pragma once

#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"
#include "uslam/sim/scenario.hpp"

namespace uslam {

struct TrajectorySample {
    Timestamp t = 0;
    Pose pose;  // body -> world
    Eigen::Vector3d velocity_world = Eigen::Vector3d::Zero();
    Eigen::Vector3d accel_world = Eigen::Vector3d::Zero();  // gravity not included
    Eigen::Vector3d omega_body = Eigen::Vector3d::Zero();
};

/// Analytic survey path: roll = pitch = 0, yaw along the horizontal velocity,
/// horizontal speed constant. Headings and rates are closed-form; positions
/// are closed-form on straights and constant-rate arcs and evaluated by a
/// fixed-order quadrature inside heading-rate ramps, so every evaluation is
/// deterministic.
class SurveyTrajectory {
public:
    /// State at t, clamped to the built range [0, duration + slack].
    TrajectorySample at(Timestamp t) const;

    double duration_s() const { return duration_; }
    Timestamp duration_ns() const { return to_nanoseconds(duration_); }

    /// Grid timestamps llround(k * 1e9 / rate) for t < duration; a zero
    /// duration yields the single time 0.
    std::vector<Timestamp> sample_times(double rate_hz) const;

    std::vector<TrajectorySample> sample_grid(double rate_hz) const;

private:
    friend SurveyTrajectory generate_trajectory(const SurveySpec& spec);

    struct Segment {
        double t0 = 0.0;  // survey time at segment start, s
        double T = 0.0;
        double c0 = 0.0, c1 = 0.0;  // heading rate at start / end; equal when constant
        double psi0 = 0.0;
        Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
    };

    TrajectorySample at_seconds(double t) const;

    std::vector<Segment> segments_;
    double speed_ = 0.0;
    double sigma_rp_ = 0.0;
    double duration_ = 0.0;
    double built_end_ = 0.0;
    double z_start_ = 0.0, z_end_ = 0.0;  // depth smoothstep endpoints
    bool static_ = false;
    Pose static_pose_;
};

/// Builds the survey path for the spec. Throws InvalidSpec for non-positive
/// radii/spacing/speed, an empty pattern, or a negative duration. A
/// single-waypoint ReturnLoop yields a static hover (duration 0 allowed).
SurveyTrajectory generate_trajectory(const SurveySpec& spec);

}  // namespace uslam
