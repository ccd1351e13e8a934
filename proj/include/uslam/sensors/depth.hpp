#pragma once

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

struct DepthSample {
    Timestamp t = 0;
    double depth = 0.0;  // m, positive down
};

/// measured - p_z in a z-down world. The sensor offset along body z, rotated
/// into the world, shifts the prediction when supplied.
inline double depth_residual(const DepthSample& sample, const Pose& body_pose,
                             const Eigen::Vector3d& sensor_offset_body = Eigen::Vector3d::Zero()) {
    const Eigen::Vector3d p_sensor =
        body_pose.translation() + body_pose.rotation() * sensor_offset_body;
    return sample.depth - p_sensor.z();
}

}  // namespace uslam
