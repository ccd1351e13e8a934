#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"
#include "uslam/sensors/imu.hpp"

namespace uslam {

enum class VariableKind : std::uint8_t { NavState = 0, Landmark = 1, RigExtrinsic = 2 };

struct VariableKey {
    VariableKind kind = VariableKind::NavState;
    std::int64_t index = 0;

    bool operator<(const VariableKey& o) const {
        return std::tie(kind, index) < std::tie(o.kind, o.index);
    }
    bool operator==(const VariableKey& o) const {
        return kind == o.kind && index == o.index;
    }
    bool operator!=(const VariableKey& o) const { return !(*this == o); }
};

inline VariableKey nav_key(std::int64_t i) { return {VariableKind::NavState, i}; }
inline VariableKey landmark_key(std::int64_t i) { return {VariableKind::Landmark, i}; }
inline VariableKey extrinsic_key(std::int64_t i) { return {VariableKind::RigExtrinsic, i}; }

/// Tangent dimension per variable kind. NavState stacks
/// (translation, rotation, velocity, gyro bias, accel bias).
inline int tangent_dim(VariableKind kind) {
    switch (kind) {
        case VariableKind::NavState: return 15;
        case VariableKind::Landmark: return 3;
        case VariableKind::RigExtrinsic: return 6;
    }
    return 0;
}

/// Ordered container of current estimates. Iteration order is the key order,
/// which fixes the assembly order of the normal equations.
class Values {
public:
    void insert_nav(std::int64_t i, const NavState& s) { nav_[i] = s; }
    void insert_landmark(std::int64_t i, const Eigen::Vector3d& p) { landmarks_[i] = p; }
    void insert_extrinsic(std::int64_t i, const Pose& p) { extrinsics_[i] = p; }

    bool has(const VariableKey& key) const;
    const NavState& nav(std::int64_t i) const;
    const Eigen::Vector3d& landmark(std::int64_t i) const;
    const Pose& extrinsic(std::int64_t i) const;

    std::size_t nav_count() const { return nav_.size(); }
    std::size_t landmark_count() const { return landmarks_.size(); }
    std::size_t extrinsic_count() const { return extrinsics_.size(); }

    const std::map<std::int64_t, NavState>& navs() const { return nav_; }
    const std::map<std::int64_t, Eigen::Vector3d>& landmarks() const { return landmarks_; }
    const std::map<std::int64_t, Pose>& extrinsics() const { return extrinsics_; }

    /// All keys, nav states first, then landmarks, then extrinsics.
    std::vector<VariableKey> keys() const;

    /// Applies a tangent step to one variable. NavState: pose retracted on the
    /// right, velocity and biases additive.
    void retract_in_place(const VariableKey& key, const Eigen::VectorXd& delta);

private:
    std::map<std::int64_t, NavState> nav_;
    std::map<std::int64_t, Eigen::Vector3d> landmarks_;
    std::map<std::int64_t, Pose> extrinsics_;
};

}  // namespace uslam
