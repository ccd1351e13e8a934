#include "uslam/geometry/pose.hpp"

namespace uslam {

Pose se3_exp(const Twist& twist) {
    Rotation r = Rotation::exp(twist.angular);
    Eigen::Vector3d t = so3_left_jacobian(twist.angular) * twist.linear;
    return Pose(r, t);
}

Twist se3_log(const Pose& pose) {
    Eigen::Vector3d omega = pose.rotation().log();
    Eigen::Vector3d v = so3_left_jacobian_inverse(omega) * pose.translation();
    return Twist(v, omega);
}

}  // namespace uslam
