#include "uslam/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <Eigen/SVD>

namespace uslam {

namespace {

// Indices (i, j) into est/ref for poses whose stamps agree within tolerance.
std::vector<std::pair<std::size_t, std::size_t>> pair_by_time(
    const std::vector<TimedPose>& est, const std::vector<TimedPose>& ref,
    Timestamp tolerance) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t j = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        while (j + 1 < ref.size() &&
               std::llabs(ref[j + 1].t - est[i].t) < std::llabs(ref[j].t - est[i].t)) {
            ++j;
        }
        if (j < ref.size() && std::llabs(ref[j].t - est[i].t) <= tolerance) {
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

}  // namespace

AlignmentResult align(const std::vector<TimedPose>& est, const std::vector<TimedPose>& ref,
                      AlignmentMode mode, Timestamp tolerance) {
    const auto pairs = pair_by_time(est, ref, tolerance);
    const std::size_t n = pairs.size();
    if (n < 3) {
        throw InsufficientOverlap("alignment needs at least 3 associated poses, got " +
                                  std::to_string(n));
    }

    Eigen::Vector3d est_mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d ref_mean = Eigen::Vector3d::Zero();
    for (const auto& [i, j] : pairs) {
        est_mean += est[i].pose.translation();
        ref_mean += ref[j].pose.translation();
    }
    est_mean /= static_cast<double>(n);
    ref_mean /= static_cast<double>(n);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    double est_var = 0.0;
    for (const auto& [i, j] : pairs) {
        const Eigen::Vector3d e = est[i].pose.translation() - est_mean;
        const Eigen::Vector3d r = ref[j].pose.translation() - ref_mean;
        cov += r * e.transpose();
        est_var += e.squaredNorm();
    }
    cov /= static_cast<double>(n);
    est_var /= static_cast<double>(n);

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sigma = svd.singularValues();
    if (sigma(1) < 1e-9 * sigma(0)) {
        throw DegenerateConfiguration("trajectory positions are collinear");
    }
    Eigen::Vector3d d = Eigen::Vector3d::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2) = -1.0;
    const Eigen::Matrix3d R =
        svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();

    AlignmentResult result;
    result.scale = mode == AlignmentMode::Similarity ? sigma.dot(d) / est_var : 1.0;
    result.transform = Pose(Rotation(R), ref_mean - result.scale * (R * est_mean));
    result.pairs = static_cast<int>(n);

    double sum_sq = 0.0;
    result.per_pose_error.reserve(n);
    for (const auto& [i, j] : pairs) {
        const Eigen::Vector3d mapped =
            result.scale * (R * est[i].pose.translation()) + result.transform.translation();
        const double err = (ref[j].pose.translation() - mapped).norm();
        result.per_pose_error.push_back(err);
        sum_sq += err * err;
    }
    result.ate_rmse = std::sqrt(sum_sq / static_cast<double>(n));
    return result;
}

RpeResult rpe(const std::vector<TimedPose>& est, const std::vector<TimedPose>& ref,
              double delta_s, Timestamp tolerance) {
    const auto pairs = pair_by_time(est, ref, tolerance);
    const Timestamp delta = to_nanoseconds(delta_s);

    RpeResult result;
    double sum_t = 0.0, sum_r = 0.0;
    std::size_t k = 0;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        const Timestamp target = est[pairs[a].first].t + delta;
        while (k + 1 < pairs.size() &&
               std::llabs(est[pairs[k + 1].first].t - target) <
                   std::llabs(est[pairs[k].first].t - target)) {
            ++k;
        }
        if (k <= a || std::llabs(est[pairs[k].first].t - target) > tolerance) continue;
        const auto& [ia, ja] = pairs[a];
        const auto& [ib, jb] = pairs[k];
        const Pose error = (ref[ja].pose.inverse() * ref[jb].pose).inverse() *
                           (est[ia].pose.inverse() * est[ib].pose);
        const double et = error.translation().norm();
        const double er = error.rotation().log().norm();
        result.translation_errors.push_back(et);
        result.rotation_errors.push_back(er);
        sum_t += et * et;
        sum_r += er * er;
    }
    result.pairs = static_cast<int>(result.translation_errors.size());
    if (result.pairs == 0) {
        throw InsufficientSpan("no pose pairs separated by " + std::to_string(delta_s) + " s");
    }
    result.translation_rmse = std::sqrt(sum_t / result.pairs);
    result.rotation_rmse = std::sqrt(sum_r / result.pairs);
    return result;
}

}  // namespace uslam
