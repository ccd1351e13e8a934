#pragma once

#include <Eigen/Core>

#include "uslam/geometry/rotation.hpp"

namespace uslam {

/// Tangent-space element of SE(3), ordered (linear, angular).
struct Twist {
    Eigen::Vector3d linear = Eigen::Vector3d::Zero();   // m
    Eigen::Vector3d angular = Eigen::Vector3d::Zero();  // rad

    Twist() = default;
    Twist(const Eigen::Vector3d& lin, const Eigen::Vector3d& ang) : linear(lin), angular(ang) {}

    static Twist from_vector(const Eigen::Matrix<double, 6, 1>& v) {
        return Twist(v.head<3>(), v.tail<3>());
    }
    Eigen::Matrix<double, 6, 1> vector() const {
        Eigen::Matrix<double, 6, 1> v;
        v << linear, angular;
        return v;
    }
};

/// Rigid transform mapping points from the body/local frame to the world frame.
class Pose {
public:
    Pose() = default;
    Pose(const Rotation& r, const Eigen::Vector3d& t) : rotation_(r), translation_(t) {}

    static Pose identity() { return Pose(); }

    const Rotation& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    Pose operator*(const Pose& rhs) const {
        return Pose(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
    }

    Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
        return rotation_ * p + translation_;
    }

    Pose inverse() const {
        Rotation rinv = rotation_.inverse();
        return Pose(rinv, -(rinv * translation_));
    }

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotation_.matrix();
        m.topRightCorner<3, 1>() = translation_;
        return m;
    }

    bool is_approx(const Pose& other, double tol = 1e-12) const {
        return rotation_.is_approx(other.rotation_, tol) &&
               (translation_ - other.translation_).norm() <= tol;
    }

private:
    Rotation rotation_;
    Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Closed-form SE(3) exponential map; exact for pure rotations and translations.
Pose se3_exp(const Twist& twist);

/// Inverse of se3_exp on the principal branch (rotation angle in [0, pi]).
Twist se3_log(const Pose& pose);

/// Shorthand for pose * se3_exp(delta), the optimizer's retraction.
inline Pose retract(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
    return pose * se3_exp(Twist::from_vector(delta));
}

}  // namespace uslam
