#include "uslam/sensors/dvl.hpp"

namespace uslam {

Eigen::Vector3d dvl_predict_velocity(const Pose& body_pose, const Eigen::Vector3d& velocity_world,
                                     const Eigen::Vector3d& omega_body, const Pose& extrinsic) {
    // Lever arm: the instrument sweeps omega x t_d on top of the body velocity.
    const Eigen::Vector3d v_body = body_pose.rotation().inverse() * velocity_world;
    const Eigen::Vector3d v_at_instrument = v_body + omega_body.cross(extrinsic.translation());
    return extrinsic.rotation().inverse() * v_at_instrument;
}

Eigen::Vector3d dvl_residual(const DvlSample& sample, const Pose& body_pose,
                             const Eigen::Vector3d& velocity_world,
                             const Eigen::Vector3d& omega_body, const Pose& extrinsic) {
    Eigen::Vector3d r = sample.velocity - dvl_predict_velocity(body_pose, velocity_world,
                                                               omega_body, extrinsic);
    for (int i = 0; i < 3; ++i) {
        if (!sample.valid[i]) {
            r[i] = 0.0;
        }
    }
    return r;
}

}  // namespace uslam
