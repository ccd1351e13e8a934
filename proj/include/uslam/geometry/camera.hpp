#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

/// Pinhole intrinsics with a two-parameter radial distortion model.
struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;  // px
    double cx = 0.0, cy = 0.0;  // px
    int width = 0, height = 0;  // px
    double k1 = 0.0, k2 = 0.0;

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && cx > 0.0 && cx < width && cy > 0.0 && cy < height;
    }
};

/// One ray of the rig's generalized camera: origin and unit direction in the
/// rig body frame.
struct Ray {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

/// Per-camera intrinsics plus the rig-relative extrinsic (camera frame -> rig
/// body frame).
struct RigCamera {
    int camera_id = 0;
    CameraIntrinsics intrinsics;
    Pose extrinsic;  // camera -> body
};

struct RigCalibration {
    std::vector<RigCamera> cameras;

    const RigCamera& camera(int camera_id) const;
    bool has_camera(int camera_id) const;
};

/// Pinhole projection of a camera-frame point, distortion applied to the
/// normalized coordinates. Throws PointBehindCamera for z <= 1e-6.
Eigen::Vector2d project(const CameraIntrinsics& intr, const Eigen::Vector3d& point_cam);

/// Non-throwing variant used by the reprojection factor.
std::optional<Eigen::Vector2d> try_project(const CameraIntrinsics& intr,
                                           const Eigen::Vector3d& point_cam);

/// d(pixel)/d(point_cam) of project at point_cam, distortion included.
/// Same preconditions as project.
Eigen::Matrix<double, 2, 3> project_jacobian(const CameraIntrinsics& intr,
                                             const Eigen::Vector3d& point_cam);

/// Unit bearing in the camera frame for a pixel; distortion removed by 8
/// fixed-point iterations (sufficient for |k1| < 0.3).
Eigen::Vector3d pixel_to_bearing(const CameraIntrinsics& intr, const Eigen::Vector2d& pixel);

/// Ray of the generalized camera in the rig body frame.
/// Throws UnknownCamera / PixelOutOfBounds.
Ray pixel_to_ray(const RigCalibration& rig, int camera_id, const Eigen::Vector2d& pixel);

inline bool pixel_in_bounds(const CameraIntrinsics& intr, const Eigen::Vector2d& px) {
    return px.x() >= 0.0 && px.x() <= intr.width && px.y() >= 0.0 && px.y() <= intr.height;
}

}  // namespace uslam
