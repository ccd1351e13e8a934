#pragma once

#include <array>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

struct DvlSample {
    Timestamp t = 0;
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s, instrument frame
    std::array<bool, 3> valid = {true, true, true};      // per-axis bottom-lock
};

/// Predicted instrument-frame velocity for a body with world velocity v_w,
/// angular rate omega (body frame, bias already removed), and instrument
/// mounted at extrinsic (instrument -> body).
Eigen::Vector3d dvl_predict_velocity(const Pose& body_pose, const Eigen::Vector3d& velocity_world,
                                     const Eigen::Vector3d& omega_body, const Pose& extrinsic);

/// measured - predicted; axes flagged invalid are zeroed.
Eigen::Vector3d dvl_residual(const DvlSample& sample, const Pose& body_pose,
                             const Eigen::Vector3d& velocity_world,
                             const Eigen::Vector3d& omega_body, const Pose& extrinsic);

}  // namespace uslam
