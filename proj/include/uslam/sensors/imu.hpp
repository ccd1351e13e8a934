#pragma once

#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"
#include "uslam/geometry/pose.hpp"

namespace uslam {

struct ImuSample {
    Timestamp t = 0;                                   // ns
    Eigen::Vector3d gyro = Eigen::Vector3d::Zero();    // rad/s, body frame
    Eigen::Vector3d accel = Eigen::Vector3d::Zero();   // m/s^2, specific force f = R^T (a - g)
};

struct ImuBias {
    Eigen::Vector3d gyro = Eigen::Vector3d::Zero();    // rad/s
    Eigen::Vector3d accel = Eigen::Vector3d::Zero();   // m/s^2

    Eigen::Matrix<double, 6, 1> vector() const {
        Eigen::Matrix<double, 6, 1> v;
        v << gyro, accel;
        return v;
    }
};

/// Continuous-time noise densities; discretized internally per sample interval.
struct ImuNoiseSpec {
    double gyro_noise_density = 4.4e-5;    // rad/s/sqrt(Hz)  (0.15 deg/sqrt(h) class)
    double accel_noise_density = 0.05;     // m/s^2/sqrt(Hz)
    double gyro_bias_random_walk = 1e-5;   // rad/s^2/sqrt(Hz)
    double accel_bias_random_walk = 1e-4;  // m/s^3/sqrt(Hz)
};

struct NavState {
    Pose pose;                                               // body -> world
    Eigen::Vector3d velocity_world = Eigen::Vector3d::Zero();  // m/s
    ImuBias bias;
};

/// Gravity-free relative motion between two nav states, integrated in the
/// frame of the first sample. Tangent ordering of the 9-dof blocks is
/// (rotation, velocity, position); bias Jacobian columns are (gyro, accel).
///
/// Sample k integrates over [t_k, t_{k+1}); the final sample replicates the
/// preceding interval, so N uniformly spaced samples cover N intervals. A
/// single sample yields the identity delta.
struct PreintegratedImu {
    Rotation delta_R;
    Eigen::Vector3d delta_v = Eigen::Vector3d::Zero();
    Eigen::Vector3d delta_p = Eigen::Vector3d::Zero();
    double dt_total = 0.0;
    ImuBias bias_linearization;
    Eigen::Matrix<double, 9, 9> covariance = Eigen::Matrix<double, 9, 9>::Zero();
    Eigen::Matrix<double, 9, 6> bias_jacobian = Eigen::Matrix<double, 9, 6>::Zero();

    /// Deltas corrected to a new bias via the stored first-order Jacobians.
    void corrected(const ImuBias& bias, Rotation* dR, Eigen::Vector3d* dv,
                   Eigen::Vector3d* dp) const;
};

/// Left-Riemann discrete integration with explicit 1/2*a*dt^2 position terms,
/// plus first-order bias Jacobians and discrete covariance propagation.
/// Throws EmptyBatch / NonMonotonicTimestamps. Intervals above 20 ms warn on
/// stderr.
PreintegratedImu preintegrate(const std::vector<ImuSample>& samples, const ImuBias& bias,
                              const ImuNoiseSpec& noise);

/// Composition of two contiguous batches into one.
PreintegratedImu compose(const PreintegratedImu& first, const PreintegratedImu& second);

/// Standard preintegration prediction; bias carried over unchanged.
NavState predict(const NavState& state_i, const PreintegratedImu& delta,
                 const Eigen::Vector3d& gravity);

/// 9-vector residual (rotation, velocity, position); zero when state_j equals
/// predict(state_i, delta). Optionally also the bias random-walk residual.
Eigen::Matrix<double, 9, 1> imu_residual(const NavState& state_i, const NavState& state_j,
                                         const PreintegratedImu& delta,
                                         const Eigen::Vector3d& gravity,
                                         Eigen::Matrix<double, 6, 1>* bias_residual = nullptr);

}  // namespace uslam
