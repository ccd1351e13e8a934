#include "uslam/geometry/camera.hpp"

#include <cmath>

namespace uslam {

namespace {
constexpr double kMinDepth = 1e-6;
constexpr int kUndistortIterations = 8;

Eigen::Vector2d distort(const CameraIntrinsics& intr, const Eigen::Vector2d& normalized) {
    const double r2 = normalized.squaredNorm();
    const double d = 1.0 + r2 * (intr.k1 + r2 * intr.k2);
    return d * normalized;
}
}  // namespace

const RigCamera& RigCalibration::camera(int camera_id) const {
    for (const auto& cam : cameras) {
        if (cam.camera_id == camera_id) return cam;
    }
    throw UnknownCamera("camera_id " + std::to_string(camera_id) + " not in rig");
}

bool RigCalibration::has_camera(int camera_id) const {
    for (const auto& cam : cameras) {
        if (cam.camera_id == camera_id) return true;
    }
    return false;
}

std::optional<Eigen::Vector2d> try_project(const CameraIntrinsics& intr,
                                           const Eigen::Vector3d& p) {
    if (p.z() <= kMinDepth) return std::nullopt;
    const Eigen::Vector2d distorted = distort(intr, Eigen::Vector2d(p.x() / p.z(), p.y() / p.z()));
    return Eigen::Vector2d(intr.fx * distorted.x() + intr.cx, intr.fy * distorted.y() + intr.cy);
}

Eigen::Vector2d project(const CameraIntrinsics& intr, const Eigen::Vector3d& point_cam) {
    auto px = try_project(intr, point_cam);
    if (!px) {
        throw PointBehindCamera("z = " + std::to_string(point_cam.z()));
    }
    return *px;
}

Eigen::Matrix<double, 2, 3> project_jacobian(const CameraIntrinsics& intr,
                                             const Eigen::Vector3d& p) {
    if (p.z() <= kMinDepth) {
        throw PointBehindCamera("z = " + std::to_string(p.z()));
    }
    const double iz = 1.0 / p.z();
    const double xn = p.x() * iz;
    const double yn = p.y() * iz;
    const double r2 = xn * xn + yn * yn;
    const double d = 1.0 + r2 * (intr.k1 + r2 * intr.k2);
    const double g = intr.k1 + 2.0 * intr.k2 * r2;  // d(d)/d(r2)

    Eigen::Matrix2d dist;
    dist << d + 2.0 * xn * xn * g, 2.0 * xn * yn * g,
            2.0 * xn * yn * g, d + 2.0 * yn * yn * g;

    Eigen::Matrix<double, 2, 3> dnorm;
    dnorm << iz, 0.0, -xn * iz,
             0.0, iz, -yn * iz;

    Eigen::Matrix<double, 2, 3> J = dist * dnorm;
    J.row(0) *= intr.fx;
    J.row(1) *= intr.fy;
    return J;
}

Eigen::Vector3d pixel_to_bearing(const CameraIntrinsics& intr, const Eigen::Vector2d& pixel) {
    const Eigen::Vector2d distorted((pixel.x() - intr.cx) / intr.fx,
                                    (pixel.y() - intr.cy) / intr.fy);
    Eigen::Vector2d undistorted = distorted;
    for (int i = 0; i < kUndistortIterations; ++i) {
        const double r2 = undistorted.squaredNorm();
        const double d = 1.0 + r2 * (intr.k1 + r2 * intr.k2);
        undistorted = distorted / d;
    }
    return Eigen::Vector3d(undistorted.x(), undistorted.y(), 1.0).normalized();
}

Ray pixel_to_ray(const RigCalibration& rig, int camera_id, const Eigen::Vector2d& pixel) {
    const RigCamera& cam = rig.camera(camera_id);
    if (!pixel_in_bounds(cam.intrinsics, pixel)) {
        throw PixelOutOfBounds("pixel (" + std::to_string(pixel.x()) + ", " +
                               std::to_string(pixel.y()) + ") outside " +
                               std::to_string(cam.intrinsics.width) + "x" +
                               std::to_string(cam.intrinsics.height));
    }
    Ray ray;
    ray.origin = cam.extrinsic.translation();
    ray.direction = cam.extrinsic.rotation() * pixel_to_bearing(cam.intrinsics, pixel);
    return ray;
}

}  // namespace uslam
