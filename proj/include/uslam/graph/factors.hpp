#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uslam/geometry/camera.hpp"
#include "uslam/graph/variables.hpp"
#include "uslam/sensors/depth.hpp"
#include "uslam/sensors/dvl.hpp"
#include "uslam/sensors/imu.hpp"

namespace uslam {

/// Measurement constraint on one or more variables. Residuals and Jacobians
/// are raw; whitening (sqrt information) and the optional Huber reweighting
/// happen in linearize(). Jacobians are with respect to each variable's
/// tangent space under right perturbation, x * exp(delta).
class Factor {
public:
    Factor(std::string kind, std::vector<VariableKey> keys, Eigen::MatrixXd sqrt_info);
    virtual ~Factor() = default;

    const std::string& kind() const { return kind_; }
    const std::vector<VariableKey>& keys() const { return keys_; }
    int dim() const { return static_cast<int>(sqrt_info_.rows()); }

    virtual Eigen::VectorXd residual(const Values& values) const = 0;
    virtual void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const = 0;

    Eigen::VectorXd whitened_residual(const Values& values) const;

    /// Cost contribution: Huber rho when robust, else 0.5 |r|^2 (whitened).
    double cost(const Values& values) const;

    struct Linearization {
        Eigen::VectorXd residual;                // whitened, robust-weighted
        std::vector<Eigen::MatrixXd> jacobians;  // whitened, robust-weighted
        double cost = 0.0;
    };
    Linearization linearize(const Values& values, bool apply_robust = true) const;

    /// Huber threshold on the whitened residual norm; <= 0 disables.
    void set_robust(double huber_delta) { huber_delta_ = huber_delta; }
    double huber_delta() const { return huber_delta_; }

    static Eigen::MatrixXd diagonal_sqrt_info(const Eigen::VectorXd& sigmas);

private:
    std::string kind_;
    std::vector<VariableKey> keys_;
    Eigen::MatrixXd sqrt_info_;
    double huber_delta_ = 0.0;
};

/// r = observed_pixel - project(intrinsics, (X_i * C_p)^-1 * landmark).
/// Keys: nav state, landmark, rig extrinsic (frozen unless extrinsic
/// optimization is enabled). Throws PointBehindCamera from residual().
class ReprojectionFactor : public Factor {
public:
    ReprojectionFactor(std::int64_t nav_index, std::int64_t landmark_index, int camera_id,
                       const CameraIntrinsics& intrinsics, const Eigen::Vector2d& pixel,
                       double sigma_px);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

    int camera_id() const { return camera_id_; }
    const Eigen::Vector2d& pixel() const { return pixel_; }

private:
    int camera_id_;
    CameraIntrinsics intrinsics_;
    Eigen::Vector2d pixel_;
};

/// 15-dim residual between two nav states: 9 preintegrated-motion rows
/// (rotation, velocity, position) whitened by the propagated covariance, plus
/// 6 bias random-walk rows. Deltas are bias-corrected to state_i's current
/// bias estimate via the stored first-order Jacobians.
class ImuPreintegrationFactor : public Factor {
public:
    ImuPreintegrationFactor(std::int64_t nav_i, std::int64_t nav_j, PreintegratedImu delta,
                            const Eigen::Vector3d& gravity, const ImuNoiseSpec& noise);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

    const PreintegratedImu& delta() const { return delta_; }

private:
    PreintegratedImu delta_;
    Eigen::Vector3d gravity_;
};

/// Instrument-frame velocity residual with gyro lever-arm term. The gyro
/// sample is the raw measurement nearest the DVL time; the state's gyro bias
/// estimate is subtracted inside the residual. Invalid axes are zeroed in
/// residual and Jacobian alike.
class DvlFactor : public Factor {
public:
    DvlFactor(std::int64_t nav_index, const DvlSample& sample,
              const Eigen::Vector3d& gyro_measured, const Pose& extrinsic, double sigma);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

private:
    DvlSample sample_;
    Eigen::Vector3d gyro_measured_;
    Pose extrinsic_;
};

/// r = measured_depth - world z of the (offset) sensor position, z-down world.
class DepthFactor : public Factor {
public:
    DepthFactor(std::int64_t nav_index, const DepthSample& sample, double sigma,
                const Eigen::Vector3d& sensor_offset_body = Eigen::Vector3d::Zero());

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

private:
    DepthSample sample_;
    Eigen::Vector3d offset_;
};

/// 6-dim pose prior, rows (translation in the prior frame, rotation log).
/// Accepts a NavState key (pose part) or a RigExtrinsic key; the Jacobian is
/// exactly identity on the pose tangent at the anchor.
class PriorPoseFactor : public Factor {
public:
    PriorPoseFactor(const VariableKey& key, const Pose& prior, const Eigen::VectorXd& sigmas);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

    const Pose& prior() const { return prior_; }

private:
    const Pose& resolve(const Values& values) const;
    Pose prior_;
};

/// 15-dim prior in tangent order (translation, rotation, velocity, biases).
class PriorNavStateFactor : public Factor {
public:
    PriorNavStateFactor(std::int64_t nav_index, const NavState& prior,
                        const Eigen::VectorXd& sigmas);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

private:
    NavState prior_;
};

/// World-frame velocity prior; the gauge anchor for velocity when no DVL
/// factors exist.
class VelocityPriorFactor : public Factor {
public:
    VelocityPriorFactor(std::int64_t nav_index, const Eigen::Vector3d& prior, double sigma);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

private:
    Eigen::Vector3d prior_;
};

/// Bias anchor used when no IMU factors constrain the bias block.
class BiasPriorFactor : public Factor {
public:
    BiasPriorFactor(std::int64_t nav_index, const ImuBias& prior, double sigma);

    Eigen::VectorXd residual(const Values& values) const override;
    void jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const override;

private:
    ImuBias prior_;
};

}  // namespace uslam
