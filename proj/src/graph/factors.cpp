#include "uslam/graph/factors.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace uslam {

Factor::Factor(std::string kind, std::vector<VariableKey> keys, Eigen::MatrixXd sqrt_info)
    : kind_(std::move(kind)), keys_(std::move(keys)), sqrt_info_(std::move(sqrt_info)) {}

Eigen::MatrixXd Factor::diagonal_sqrt_info(const Eigen::VectorXd& sigmas) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(sigmas.size(), sigmas.size());
    for (int i = 0; i < sigmas.size(); ++i) {
        m(i, i) = 1.0 / sigmas[i];
    }
    return m;
}

Eigen::VectorXd Factor::whitened_residual(const Values& values) const {
    return sqrt_info_ * residual(values);
}

double Factor::cost(const Values& values) const {
    const double norm = whitened_residual(values).norm();
    if (huber_delta_ > 0.0 && norm > huber_delta_) {
        return huber_delta_ * (norm - 0.5 * huber_delta_);
    }
    return 0.5 * norm * norm;
}

Factor::Linearization Factor::linearize(const Values& values, bool apply_robust) const {
    Linearization lin;
    lin.residual = whitened_residual(values);
    std::vector<Eigen::MatrixXd> raw;
    jacobians(values, &raw);
    lin.jacobians.reserve(raw.size());
    for (const auto& J : raw) {
        lin.jacobians.push_back(sqrt_info_ * J);
    }

    const double norm = lin.residual.norm();
    lin.cost = 0.5 * norm * norm;
    if (huber_delta_ > 0.0 && norm > huber_delta_) {
        lin.cost = huber_delta_ * (norm - 0.5 * huber_delta_);
        if (apply_robust) {
            const double w = std::sqrt(huber_delta_ / norm);
            lin.residual *= w;
            for (auto& J : lin.jacobians) {
                J *= w;
            }
        }
    }
    return lin;
}

// --- Reprojection ---

ReprojectionFactor::ReprojectionFactor(std::int64_t nav_index, std::int64_t landmark_index,
                                       int camera_id, const CameraIntrinsics& intrinsics,
                                       const Eigen::Vector2d& pixel, double sigma_px)
    : Factor("reprojection",
             {nav_key(nav_index), landmark_key(landmark_index), extrinsic_key(camera_id)},
             diagonal_sqrt_info(Eigen::Vector2d::Constant(sigma_px))),
      camera_id_(camera_id),
      intrinsics_(intrinsics),
      pixel_(pixel) {}

Eigen::VectorXd ReprojectionFactor::residual(const Values& values) const {
    const NavState& state = values.nav(keys()[0].index);
    const Eigen::Vector3d& l = values.landmark(keys()[1].index);
    const Pose& extrinsic = values.extrinsic(keys()[2].index);
    const Eigen::Vector3d point_cam = (state.pose * extrinsic).inverse() * l;
    return pixel_ - project(intrinsics_, point_cam);
}

void ReprojectionFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    const NavState& state = values.nav(keys()[0].index);
    const Eigen::Vector3d& l = values.landmark(keys()[1].index);
    const Pose& extrinsic = values.extrinsic(keys()[2].index);

    const Eigen::Vector3d y = state.pose.inverse() * l;        // body frame
    const Eigen::Vector3d q = extrinsic.inverse() * y;         // camera frame
    const Eigen::Matrix<double, 2, 3> P = project_jacobian(intrinsics_, q);
    const Eigen::Matrix3d Rc_t = extrinsic.rotation().inverse().matrix();
    const Eigen::Matrix3d Ri_t = state.pose.rotation().inverse().matrix();

    // r = measured - projected, so each block is -dpi/dq * dq/dx.
    Eigen::MatrixXd J_nav = Eigen::MatrixXd::Zero(2, 15);
    J_nav.block<2, 3>(0, 0) = P * Rc_t;                 // dq/dt_i = -Rc^T
    J_nav.block<2, 3>(0, 3) = -P * Rc_t * hat(y);       // dq/dtheta_i = Rc^T [y]x

    Eigen::MatrixXd J_lm = -P * Rc_t * Ri_t;            // dq/dl = (R_i R_c)^T

    Eigen::MatrixXd J_ext = Eigen::MatrixXd::Zero(2, 6);
    J_ext.block<2, 3>(0, 0) = P;                        // dq/dt_c = -I
    J_ext.block<2, 3>(0, 3) = -P * hat(q);              // dq/dtheta_c = [q]x

    *J = {std::move(J_nav), std::move(J_lm), std::move(J_ext)};
}

// --- IMU preintegration ---

namespace {

Eigen::MatrixXd imu_sqrt_info(const PreintegratedImu& delta, const ImuNoiseSpec& noise) {
    Eigen::Matrix<double, 9, 9> cov = delta.covariance;
    cov.diagonal().array() += 1e-16;
    const Eigen::Matrix<double, 9, 9> L = cov.llt().matrixL();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(15, 15);
    info.topLeftCorner<9, 9>() =
        L.triangularView<Eigen::Lower>().solve(Eigen::Matrix<double, 9, 9>::Identity());
    const double dt = std::max(delta.dt_total, 1e-9);
    const double sg = noise.gyro_bias_random_walk * std::sqrt(dt);
    const double sa = noise.accel_bias_random_walk * std::sqrt(dt);
    info.block<3, 3>(9, 9) = Eigen::Matrix3d::Identity() / sg;
    info.block<3, 3>(12, 12) = Eigen::Matrix3d::Identity() / sa;
    return info;
}

}  // namespace

ImuPreintegrationFactor::ImuPreintegrationFactor(std::int64_t nav_i, std::int64_t nav_j,
                                                 PreintegratedImu delta,
                                                 const Eigen::Vector3d& gravity,
                                                 const ImuNoiseSpec& noise)
    : Factor("imu_preintegration", {nav_key(nav_i), nav_key(nav_j)}, imu_sqrt_info(delta, noise)),
      delta_(std::move(delta)),
      gravity_(gravity) {}

Eigen::VectorXd ImuPreintegrationFactor::residual(const Values& values) const {
    const NavState& si = values.nav(keys()[0].index);
    const NavState& sj = values.nav(keys()[1].index);
    Eigen::Matrix<double, 6, 1> bias_r;
    const Eigen::Matrix<double, 9, 1> motion = imu_residual(si, sj, delta_, gravity_, &bias_r);
    Eigen::VectorXd r(15);
    r << motion, bias_r;
    return r;
}

void ImuPreintegrationFactor::jacobians(const Values& values,
                                        std::vector<Eigen::MatrixXd>* J) const {
    const NavState& si = values.nav(keys()[0].index);
    const NavState& sj = values.nav(keys()[1].index);
    const double T = delta_.dt_total;

    const Eigen::Matrix3d Ri = si.pose.rotation().matrix();
    const Eigen::Matrix3d Rj = sj.pose.rotation().matrix();
    const Eigen::Matrix3d Ri_t = Ri.transpose();

    const Eigen::Matrix3d JRg = delta_.bias_jacobian.block<3, 3>(0, 0);
    const Eigen::Matrix3d Jvg = delta_.bias_jacobian.block<3, 3>(3, 0);
    const Eigen::Matrix3d Jva = delta_.bias_jacobian.block<3, 3>(3, 3);
    const Eigen::Matrix3d Jpg = delta_.bias_jacobian.block<3, 3>(6, 0);
    const Eigen::Matrix3d Jpa = delta_.bias_jacobian.block<3, 3>(6, 3);

    const Eigen::Vector3d dbg = si.bias.gyro - delta_.bias_linearization.gyro;
    const Eigen::Vector3d phi = JRg * dbg;

    Rotation dR;
    Eigen::Vector3d dv, dp;
    delta_.corrected(si.bias, &dR, &dv, &dp);
    const Eigen::Vector3d r_R = (dR.inverse() * (si.pose.rotation().inverse() *
                                                 sj.pose.rotation())).log();
    const Eigen::Matrix3d Jr_inv = so3_right_jacobian_inverse(r_R);
    // C = deltaR_bar^T R_i^T R_j; the bias-rotation column transports the
    // current correction Exp(J_Rg dbg) through it.
    const Eigen::Matrix3d C = delta_.delta_R.matrix().transpose() * Ri_t * Rj;

    const Eigen::Vector3d u = sj.velocity_world - si.velocity_world - gravity_ * T;
    const Eigen::Vector3d w = sj.pose.translation() - si.pose.translation() -
                              si.velocity_world * T - 0.5 * gravity_ * T * T;

    Eigen::MatrixXd Ji = Eigen::MatrixXd::Zero(15, 15);
    Ji.block<3, 3>(0, 3) = -Jr_inv * (Rj.transpose() * Ri);
    Ji.block<3, 3>(0, 9) = -Jr_inv * C.transpose() * so3_right_jacobian(-phi) * JRg;
    Ji.block<3, 3>(3, 3) = hat(Ri_t * u);
    Ji.block<3, 3>(3, 6) = -Ri_t;
    Ji.block<3, 3>(3, 9) = -Jvg;
    Ji.block<3, 3>(3, 12) = -Jva;
    Ji.block<3, 3>(6, 0) = -Eigen::Matrix3d::Identity();
    Ji.block<3, 3>(6, 3) = hat(Ri_t * w);
    Ji.block<3, 3>(6, 6) = -Ri_t * T;
    Ji.block<3, 3>(6, 9) = -Jpg;
    Ji.block<3, 3>(6, 12) = -Jpa;
    Ji.block<6, 6>(9, 9) = -Eigen::Matrix<double, 6, 6>::Identity();

    Eigen::MatrixXd Jj = Eigen::MatrixXd::Zero(15, 15);
    Jj.block<3, 3>(0, 3) = Jr_inv;
    Jj.block<3, 3>(3, 6) = Ri_t;
    Jj.block<3, 3>(6, 0) = Ri_t * Rj;
    Jj.block<6, 6>(9, 9) = Eigen::Matrix<double, 6, 6>::Identity();

    *J = {std::move(Ji), std::move(Jj)};
}

// --- DVL ---

DvlFactor::DvlFactor(std::int64_t nav_index, const DvlSample& sample,
                     const Eigen::Vector3d& gyro_measured, const Pose& extrinsic, double sigma)
    : Factor("dvl_velocity", {nav_key(nav_index)},
             diagonal_sqrt_info(Eigen::Vector3d::Constant(sigma))),
      sample_(sample),
      gyro_measured_(gyro_measured),
      extrinsic_(extrinsic) {}

Eigen::VectorXd DvlFactor::residual(const Values& values) const {
    const NavState& s = values.nav(keys()[0].index);
    const Eigen::Vector3d omega = gyro_measured_ - s.bias.gyro;
    return dvl_residual(sample_, s.pose, s.velocity_world, omega, extrinsic_);
}

void DvlFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    const NavState& s = values.nav(keys()[0].index);
    const Eigen::Matrix3d Rd_t = extrinsic_.rotation().inverse().matrix();
    const Eigen::Matrix3d Rb_t = s.pose.rotation().inverse().matrix();

    Eigen::MatrixXd Jn = Eigen::MatrixXd::Zero(3, 15);
    Jn.block<3, 3>(0, 3) = -Rd_t * hat(Rb_t * s.velocity_world);
    Jn.block<3, 3>(0, 6) = -Rd_t * Rb_t;
    Jn.block<3, 3>(0, 9) = -Rd_t * hat(extrinsic_.translation());
    for (int i = 0; i < 3; ++i) {
        if (!sample_.valid[i]) {
            Jn.row(i).setZero();
        }
    }
    *J = {std::move(Jn)};
}

// --- Depth ---

DepthFactor::DepthFactor(std::int64_t nav_index, const DepthSample& sample, double sigma,
                         const Eigen::Vector3d& sensor_offset_body)
    : Factor("depth", {nav_key(nav_index)},
             diagonal_sqrt_info(Eigen::VectorXd::Constant(1, sigma))),
      sample_(sample),
      offset_(sensor_offset_body) {}

Eigen::VectorXd DepthFactor::residual(const Values& values) const {
    const NavState& s = values.nav(keys()[0].index);
    return Eigen::VectorXd::Constant(1, depth_residual(sample_, s.pose, offset_));
}

void DepthFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    const NavState& s = values.nav(keys()[0].index);
    const Eigen::Matrix3d R = s.pose.rotation().matrix();
    Eigen::MatrixXd Jn = Eigen::MatrixXd::Zero(1, 15);
    Jn.block<1, 3>(0, 0) = -R.row(2);
    Jn.block<1, 3>(0, 3) = R.row(2) * hat(offset_);
    *J = {std::move(Jn)};
}

// --- Priors ---

PriorPoseFactor::PriorPoseFactor(const VariableKey& key, const Pose& prior,
                                 const Eigen::VectorXd& sigmas)
    : Factor("prior_pose", {key}, diagonal_sqrt_info(sigmas)), prior_(prior) {}

const Pose& PriorPoseFactor::resolve(const Values& values) const {
    const VariableKey& key = keys()[0];
    if (key.kind == VariableKind::RigExtrinsic) {
        return values.extrinsic(key.index);
    }
    return values.nav(key.index).pose;
}

Eigen::VectorXd PriorPoseFactor::residual(const Values& values) const {
    const Pose& pose = resolve(values);
    const Rotation Rp_inv = prior_.rotation().inverse();
    Eigen::VectorXd r(6);
    r.head<3>() = Rp_inv * (pose.translation() - prior_.translation());
    r.tail<3>() = (Rp_inv * pose.rotation()).log();
    return r;
}

void PriorPoseFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    const Pose& pose = resolve(values);
    const Rotation Rp_inv = prior_.rotation().inverse();
    const Eigen::Vector3d r_R = (Rp_inv * pose.rotation()).log();

    const int cols = tangent_dim(keys()[0].kind);
    Eigen::MatrixXd Jp = Eigen::MatrixXd::Zero(6, cols);
    Jp.block<3, 3>(0, 0) = (Rp_inv * pose.rotation()).matrix();
    Jp.block<3, 3>(3, 3) = so3_right_jacobian_inverse(r_R);
    *J = {std::move(Jp)};
}

PriorNavStateFactor::PriorNavStateFactor(std::int64_t nav_index, const NavState& prior,
                                         const Eigen::VectorXd& sigmas)
    : Factor("prior_nav_state", {nav_key(nav_index)}, diagonal_sqrt_info(sigmas)),
      prior_(prior) {}

Eigen::VectorXd PriorNavStateFactor::residual(const Values& values) const {
    const NavState& s = values.nav(keys()[0].index);
    const Rotation Rp_inv = prior_.pose.rotation().inverse();
    Eigen::VectorXd r(15);
    r.segment<3>(0) = Rp_inv * (s.pose.translation() - prior_.pose.translation());
    r.segment<3>(3) = (Rp_inv * s.pose.rotation()).log();
    r.segment<3>(6) = s.velocity_world - prior_.velocity_world;
    r.segment<3>(9) = s.bias.gyro - prior_.bias.gyro;
    r.segment<3>(12) = s.bias.accel - prior_.bias.accel;
    return r;
}

void PriorNavStateFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    const NavState& s = values.nav(keys()[0].index);
    const Rotation Rp_inv = prior_.pose.rotation().inverse();
    const Eigen::Vector3d r_R = (Rp_inv * s.pose.rotation()).log();

    Eigen::MatrixXd Jp = Eigen::MatrixXd::Zero(15, 15);
    Jp.block<3, 3>(0, 0) = (Rp_inv * s.pose.rotation()).matrix();
    Jp.block<3, 3>(3, 3) = so3_right_jacobian_inverse(r_R);
    Jp.block<9, 9>(6, 6) = Eigen::Matrix<double, 9, 9>::Identity();
    *J = {std::move(Jp)};
}

VelocityPriorFactor::VelocityPriorFactor(std::int64_t nav_index, const Eigen::Vector3d& prior,
                                         double sigma)
    : Factor("prior_velocity", {nav_key(nav_index)},
             diagonal_sqrt_info(Eigen::Vector3d::Constant(sigma))),
      prior_(prior) {}

Eigen::VectorXd VelocityPriorFactor::residual(const Values& values) const {
    return values.nav(keys()[0].index).velocity_world - prior_;
}

void VelocityPriorFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    (void)values;
    Eigen::MatrixXd Jv = Eigen::MatrixXd::Zero(3, 15);
    Jv.block<3, 3>(0, 6) = Eigen::Matrix3d::Identity();
    *J = {std::move(Jv)};
}

BiasPriorFactor::BiasPriorFactor(std::int64_t nav_index, const ImuBias& prior, double sigma)
    : Factor("prior_bias", {nav_key(nav_index)},
             diagonal_sqrt_info(Eigen::VectorXd::Constant(6, sigma))),
      prior_(prior) {}

Eigen::VectorXd BiasPriorFactor::residual(const Values& values) const {
    const NavState& s = values.nav(keys()[0].index);
    Eigen::VectorXd r(6);
    r.head<3>() = s.bias.gyro - prior_.gyro;
    r.tail<3>() = s.bias.accel - prior_.accel;
    return r;
}

void BiasPriorFactor::jacobians(const Values& values, std::vector<Eigen::MatrixXd>* J) const {
    (void)values;
    Eigen::MatrixXd Jb = Eigen::MatrixXd::Zero(6, 15);
    Jb.block<6, 6>(0, 9) = Eigen::Matrix<double, 6, 6>::Identity();
    *J = {std::move(Jb)};
}

}  // namespace uslam
