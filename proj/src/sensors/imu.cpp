#include "uslam/sensors/imu.hpp"

#include <cmath>
#include <cstdio>

#include "uslam/geometry/rotation.hpp"

namespace uslam {

namespace {
constexpr double kLongIntervalWarn = 0.020;  // s
}

void PreintegratedImu::corrected(const ImuBias& bias, Rotation* dR, Eigen::Vector3d* dv,
                                 Eigen::Vector3d* dp) const {
    const Eigen::Vector3d dbg = bias.gyro - bias_linearization.gyro;
    const Eigen::Vector3d dba = bias.accel - bias_linearization.accel;
    *dR = delta_R * Rotation::exp(bias_jacobian.block<3, 3>(0, 0) * dbg);
    *dv = delta_v + bias_jacobian.block<3, 3>(3, 0) * dbg + bias_jacobian.block<3, 3>(3, 3) * dba;
    *dp = delta_p + bias_jacobian.block<3, 3>(6, 0) * dbg + bias_jacobian.block<3, 3>(6, 3) * dba;
}

PreintegratedImu preintegrate(const std::vector<ImuSample>& samples, const ImuBias& bias,
                              const ImuNoiseSpec& noise) {
    if (samples.empty()) {
        throw EmptyBatch("preintegrate: no samples");
    }
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        if (samples[k + 1].t <= samples[k].t) {
            throw NonMonotonicTimestamps("preintegrate: timestamps must be strictly increasing");
        }
    }

    PreintegratedImu out;
    out.bias_linearization = bias;
    if (samples.size() == 1) {
        return out;
    }

    for (std::size_t k = 0; k < samples.size(); ++k) {
        // Sample k covers [t_k, t_{k+1}); the final sample replicates the
        // preceding interval so N uniform samples span N intervals.
        const double dt = (k + 1 < samples.size())
                              ? to_seconds(samples[k + 1].t - samples[k].t)
                              : to_seconds(samples[k].t - samples[k - 1].t);
        if (dt > kLongIntervalWarn) {
            std::fprintf(stderr, "preintegrate: interval %.4f s at sample %zu exceeds %.0f ms\n",
                         dt, k, kLongIntervalWarn * 1e3);
        }

        const Eigen::Vector3d w = samples[k].gyro - bias.gyro;
        const Eigen::Vector3d a = samples[k].accel - bias.accel;
        const Rotation dRk = Rotation::exp(w * dt);
        const Eigen::Matrix3d R = out.delta_R.matrix();
        const Eigen::Matrix3d A_hat = hat(a);
        const Eigen::Matrix3d Jr = so3_right_jacobian(w * dt);
        const double dt2 = dt * dt;

        // Covariance propagation: state order (dR, dv, dp), noise (gyro, accel).
        Eigen::Matrix<double, 9, 9> A = Eigen::Matrix<double, 9, 9>::Identity();
        A.block<3, 3>(0, 0) = dRk.matrix().transpose();
        A.block<3, 3>(3, 0) = -R * A_hat * dt;
        A.block<3, 3>(6, 0) = -0.5 * R * A_hat * dt2;
        A.block<3, 3>(6, 3) = Eigen::Matrix3d::Identity() * dt;

        Eigen::Matrix<double, 9, 6> B = Eigen::Matrix<double, 9, 6>::Zero();
        B.block<3, 3>(0, 0) = Jr * dt;
        B.block<3, 3>(3, 3) = R * dt;
        B.block<3, 3>(6, 3) = 0.5 * R * dt2;

        Eigen::Matrix<double, 6, 6> Qd = Eigen::Matrix<double, 6, 6>::Zero();
        const double gyro_var = noise.gyro_noise_density * noise.gyro_noise_density / dt;
        const double accel_var = noise.accel_noise_density * noise.accel_noise_density / dt;
        Qd.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity() * gyro_var;
        Qd.block<3, 3>(3, 3) = Eigen::Matrix3d::Identity() * accel_var;

        out.covariance = A * out.covariance * A.transpose() + B * Qd * B.transpose();

        // Bias Jacobians, updated before the deltas so the k-th values feed them.
        const Eigen::Matrix3d JRg = out.bias_jacobian.block<3, 3>(0, 0);
        out.bias_jacobian.block<3, 3>(6, 0) +=
            out.bias_jacobian.block<3, 3>(3, 0) * dt - 0.5 * R * A_hat * JRg * dt2;
        out.bias_jacobian.block<3, 3>(6, 3) +=
            out.bias_jacobian.block<3, 3>(3, 3) * dt - 0.5 * R * dt2;
        out.bias_jacobian.block<3, 3>(3, 0) += -R * A_hat * JRg * dt;
        out.bias_jacobian.block<3, 3>(3, 3) += -R * dt;
        out.bias_jacobian.block<3, 3>(0, 0) =
            dRk.matrix().transpose() * JRg - Jr * dt;

        out.delta_p += out.delta_v * dt + 0.5 * R * a * dt2;
        out.delta_v += R * a * dt;
        out.delta_R = out.delta_R * dRk;
        out.dt_total += dt;
    }
    return out;
}

PreintegratedImu compose(const PreintegratedImu& first, const PreintegratedImu& second) {
    PreintegratedImu out;
    out.bias_linearization = first.bias_linearization;
    const Eigen::Matrix3d R1 = first.delta_R.matrix();
    const double T2 = second.dt_total;

    out.delta_R = first.delta_R * second.delta_R;
    out.delta_v = first.delta_v + R1 * second.delta_v;
    out.delta_p = first.delta_p + first.delta_v * T2 + R1 * second.delta_p;
    out.dt_total = first.dt_total + T2;

    // Transport of the second batch through the first, for covariance and
    // bias Jacobians alike.
    Eigen::Matrix<double, 9, 9> A = Eigen::Matrix<double, 9, 9>::Identity();
    A.block<3, 3>(0, 0) = second.delta_R.matrix().transpose();
    A.block<3, 3>(3, 0) = -R1 * hat(second.delta_v);
    A.block<3, 3>(6, 0) = -R1 * hat(second.delta_p);
    A.block<3, 3>(6, 3) = Eigen::Matrix3d::Identity() * T2;

    Eigen::Matrix<double, 9, 9> B = Eigen::Matrix<double, 9, 9>::Zero();
    B.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();
    B.block<3, 3>(3, 3) = R1;
    B.block<3, 3>(6, 6) = R1;

    out.covariance = A * first.covariance * A.transpose() + B * second.covariance * B.transpose();
    out.bias_jacobian = A * first.bias_jacobian + B * second.bias_jacobian;
    return out;
}

NavState predict(const NavState& state_i, const PreintegratedImu& delta,
                 const Eigen::Vector3d& gravity) {
    Rotation dR;
    Eigen::Vector3d dv, dp;
    delta.corrected(state_i.bias, &dR, &dv, &dp);

    const Rotation& R_i = state_i.pose.rotation();
    const double T = delta.dt_total;

    NavState out;
    out.pose = Pose(R_i * dR, state_i.pose.translation() + state_i.velocity_world * T +
                                  0.5 * gravity * T * T + R_i * dp);
    out.velocity_world = state_i.velocity_world + gravity * T + R_i * dv;
    out.bias = state_i.bias;
    return out;
}

Eigen::Matrix<double, 9, 1> imu_residual(const NavState& state_i, const NavState& state_j,
                                         const PreintegratedImu& delta,
                                         const Eigen::Vector3d& gravity,
                                         Eigen::Matrix<double, 6, 1>* bias_residual) {
    Rotation dR;
    Eigen::Vector3d dv, dp;
    delta.corrected(state_i.bias, &dR, &dv, &dp);

    const Rotation& R_i = state_i.pose.rotation();
    const Rotation R_i_inv = R_i.inverse();
    const double T = delta.dt_total;

    Eigen::Matrix<double, 9, 1> r;
    r.segment<3>(0) = (dR.inverse() * (R_i_inv * state_j.pose.rotation())).log();
    r.segment<3>(3) = R_i_inv * (state_j.velocity_world - state_i.velocity_world - gravity * T) - dv;
    r.segment<3>(6) = R_i_inv * (state_j.pose.translation() - state_i.pose.translation() -
                                 state_i.velocity_world * T - 0.5 * gravity * T * T) -
                      dp;

    if (bias_residual != nullptr) {
        *bias_residual = state_j.bias.vector() - state_i.bias.vector();
    }
    return r;
}

}  // namespace uslam
