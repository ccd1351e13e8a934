#pragma once

#include <vector>

#include "uslam/geometry/camera.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

/// A rig-frame ray paired with the rig's pose in the world.
struct WorldRay {
    Ray ray;
    Pose rig_pose;
};

/// Linear least-squares midpoint of the world-frame rays: minimizes the sum
/// of squared orthogonal distances. Throws DegenerateGeometry when the 3x3
/// normal matrix has condition number > 1e8 (near-parallel rays).
Eigen::Vector3d triangulate(const std::vector<WorldRay>& rays);

}  // namespace uslam
