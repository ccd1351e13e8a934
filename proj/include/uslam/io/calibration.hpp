#pragma once

#include <filesystem>
#include <iosfwd>

#include <Eigen/Core>

#include "uslam/geometry/camera.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

struct CalibrationFile {
    RigCalibration rig;
    Pose dvl_extrinsic;  // instrument -> body
    Pose imu_extrinsic;  // IMU -> body; the estimator expects identity rotation or close
    Eigen::Vector3d depth_offset_body = Eigen::Vector3d::Zero();
};

/// JSON document with a `cameras` array (intrinsics plus an `extrinsic` pose)
/// and optional `dvl_extrinsic` / `imu_extrinsic` / `depth_offset`. Poses
/// carry `t` and either `q` = [qw,qx,qy,qz] or `R` row-major. Rotations with
/// orthonormality drift above 1e-6 are re-orthonormalized; above 1e-3 the
/// loader throws NonOrthonormalRotation. Structural problems (missing fields,
/// duplicate camera ids, invalid intrinsics) throw SchemaError.
CalibrationFile load_calibration(std::istream& in);
CalibrationFile load_calibration_file(const std::filesystem::path& path);

void write_calibration(const CalibrationFile& calib, std::ostream& out);
void save_calibration(const std::filesystem::path& path, const CalibrationFile& calib);

/// Extrinsic of a camera pitched down by `tilt` from the forward direction:
/// the optical axis is (cos tilt, 0, sin tilt) in the body frame and image
/// right stays starboard. tilt = pi/2 looks straight down.
Pose tilted_camera_extrinsic(double tilt,
                             const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());

}  // namespace uslam
