#include "uslam/graph/variables.hpp"

namespace uslam {

namespace {

template <typename Map>
const typename Map::mapped_type& lookup(const Map& m, std::int64_t i, const char* what) {
    auto it = m.find(i);
    if (it == m.end()) {
        throw UnknownLandmark(std::string("Values: no ") + what + " with index " +
                              std::to_string(i));
    }
    return it->second;
}

}  // namespace

bool Values::has(const VariableKey& key) const {
    switch (key.kind) {
        case VariableKind::NavState: return nav_.count(key.index) > 0;
        case VariableKind::Landmark: return landmarks_.count(key.index) > 0;
        case VariableKind::RigExtrinsic: return extrinsics_.count(key.index) > 0;
    }
    return false;
}

const NavState& Values::nav(std::int64_t i) const { return lookup(nav_, i, "nav state"); }

const Eigen::Vector3d& Values::landmark(std::int64_t i) const {
    return lookup(landmarks_, i, "landmark");
}

const Pose& Values::extrinsic(std::int64_t i) const {
    return lookup(extrinsics_, i, "extrinsic");
}

std::vector<VariableKey> Values::keys() const {
    std::vector<VariableKey> out;
    out.reserve(nav_.size() + landmarks_.size() + extrinsics_.size());
    for (const auto& [i, s] : nav_) out.push_back(nav_key(i));
    for (const auto& [i, p] : landmarks_) out.push_back(landmark_key(i));
    for (const auto& [i, p] : extrinsics_) out.push_back(extrinsic_key(i));
    return out;
}

void Values::retract_in_place(const VariableKey& key, const Eigen::VectorXd& delta) {
    if (delta.size() != tangent_dim(key.kind)) {
        throw DimensionMismatch("retract_in_place: delta size mismatch");
    }
    switch (key.kind) {
        case VariableKind::NavState: {
            NavState& s = nav_.at(key.index);
            s.pose = retract(s.pose, delta.head<6>());
            s.velocity_world += delta.segment<3>(6);
            s.bias.gyro += delta.segment<3>(9);
            s.bias.accel += delta.segment<3>(12);
            break;
        }
        case VariableKind::Landmark:
            landmarks_.at(key.index) += delta.head<3>();
            break;
        case VariableKind::RigExtrinsic: {
            Pose& p = extrinsics_.at(key.index);
            p = retract(p, delta.head<6>());
            break;
        }
    }
}

}  // namespace uslam
