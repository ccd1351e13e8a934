#include "uslam/geometry/triangulation.hpp"

#include <Eigen/Dense>

namespace uslam {

namespace {
constexpr double kMaxConditionNumber = 1e8;
}

Eigen::Vector3d triangulate(const std::vector<WorldRay>& rays) {
    if (rays.size() < 2) {
        throw DegenerateGeometry("triangulation needs >= 2 rays, got " +
                                 std::to_string(rays.size()));
    }
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& wr : rays) {
        const Eigen::Vector3d o = wr.rig_pose * wr.ray.origin;
        const Eigen::Vector3d d = (wr.rig_pose.rotation() * wr.ray.direction).normalized();
        const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - d * d.transpose();
        A += P;
        b += P * o;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A);
    const double lmin = eig.eigenvalues()(0);
    const double lmax = eig.eigenvalues()(2);
    if (lmin <= 0.0 || lmax / lmin > kMaxConditionNumber) {
        throw DegenerateGeometry("near-parallel rays, normal-matrix condition too high");
    }
    return A.ldlt().solve(b);
}

}  // namespace uslam
