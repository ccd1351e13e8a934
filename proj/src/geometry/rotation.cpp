#include "uslam/geometry/rotation.hpp"

#include <cmath>

namespace uslam {

namespace {
constexpr double kSmallAngle = 1e-8;
// The Jacobian closed forms divide by 1-cos(theta), which rounds to zero for
// theta below ~2e-8; the series must take over long before that.
constexpr double kJacobianSeries = 1e-4;
}

Rotation Rotation::exp(const Eigen::Vector3d& omega) {
    const double theta = omega.norm();
    double scale;
    if (theta < kSmallAngle) {
        scale = 0.5 - theta * theta / 48.0;
    } else {
        scale = std::sin(0.5 * theta) / theta;
    }
    Eigen::Quaterniond q(std::cos(0.5 * theta), scale * omega.x(), scale * omega.y(),
                         scale * omega.z());
    return Rotation(q);
}

Eigen::Vector3d Rotation::log() const {
    // qw >= 0 after canonicalization, so the angle 2*atan2(|v|, qw) is in [0, pi].
    const Eigen::Vector3d v(q_.x(), q_.y(), q_.z());
    const double n = v.norm();
    const double w = q_.w();
    if (n < kSmallAngle) {
        return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * v;
    }
    return (2.0 * std::atan2(n, w) / n) * v;
}

Eigen::Matrix3d hat(const Eigen::Vector3d& a) {
    Eigen::Matrix3d m;
    m << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
    return m;
}

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& omega) {
    const double theta2 = omega.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Eigen::Matrix3d W = hat(omega);
    double c1, c2;
    if (theta < kJacobianSeries) {
        c1 = 0.5 - theta2 / 24.0;
        c2 = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        c1 = (1.0 - std::cos(theta)) / theta2;
        c2 = (theta - std::sin(theta)) / (theta2 * theta);
    }
    return Eigen::Matrix3d::Identity() - c1 * W + c2 * W * W;
}

Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& omega) {
    const double theta2 = omega.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Eigen::Matrix3d W = hat(omega);
    double c;
    if (theta < 0.1) {
        // Bernoulli series; the closed form below loses ~theta^-2 digits to
        // cancellation, so it only takes over once theta is order one.
        c = 1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0;
    } else {
        // Equivalent to 1/t^2 - (1+cos)/(2 t sin), but stable up to t = pi.
        c = (1.0 - 0.5 * theta * std::sin(theta) / (1.0 - std::cos(theta))) / theta2;
    }
    return Eigen::Matrix3d::Identity() + 0.5 * W + c * W * W;
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& omega) {
    // J_l(w) = J_r(-w)
    return so3_right_jacobian(-omega);
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& omega) {
    return so3_right_jacobian_inverse(-omega);
}

}  // namespace uslam
