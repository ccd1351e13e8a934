#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace uslam {

/// SO(3) element stored as a Hamilton unit quaternion (qw, qx, qy, qz).
/// The double cover is canonicalized to qw >= 0 on construction.
class Rotation {
public:
    Rotation() : q_(1.0, 0.0, 0.0, 0.0) {}

    /// From coefficients (qw first). Normalizes and canonicalizes.
    Rotation(double qw, double qx, double qy, double qz) : q_(qw, qx, qy, qz) { canonicalize(); }

    explicit Rotation(const Eigen::Quaterniond& q) : q_(q) { canonicalize(); }

    explicit Rotation(const Eigen::Matrix3d& R) : q_(R) { canonicalize(); }

    static Rotation identity() { return Rotation(); }

    /// Exponential map of an axis-angle vector (rad).
    static Rotation exp(const Eigen::Vector3d& omega);

    /// Principal-branch logarithm, angle in [0, pi].
    Eigen::Vector3d log() const;

    Rotation operator*(const Rotation& rhs) const {
        return Rotation(q_ * rhs.q_);
    }

    Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }

    Rotation inverse() const { return Rotation(q_.conjugate()); }

    Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }

    const Eigen::Quaterniond& quaternion() const { return q_; }
    double qw() const { return q_.w(); }
    double qx() const { return q_.x(); }
    double qy() const { return q_.y(); }
    double qz() const { return q_.z(); }

    double angle_to(const Rotation& other) const {
        return (inverse() * other).log().norm();
    }

    bool is_approx(const Rotation& other, double tol = 1e-12) const {
        return q_.angularDistance(other.q_) <= tol;
    }

private:
    void canonicalize() {
        q_.normalize();
        if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
    }

    Eigen::Quaterniond q_;
};

/// Skew-symmetric matrix such that hat(a) * b == a x b.
Eigen::Matrix3d hat(const Eigen::Vector3d& a);

/// Right Jacobian of SO(3) and its inverse; left Jacobian V used by the
/// SE(3) exponential. All spell out the small-angle series below 1e-8.
Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& omega);
Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& omega);
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& omega);
Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& omega);

}  // namespace uslam
