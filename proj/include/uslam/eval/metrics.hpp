#pragma once

#include <vector>

#include "uslam/io/trajectory.hpp"

namespace uslam {

enum class AlignmentMode { Rigid, Similarity };

// Transform maps estimate positions into the reference frame:
// ref ≈ scale * (transform.rotation() * est) + transform.translation().
struct AlignmentResult {
    Pose transform;
    double scale = 1.0;
    double ate_rmse = 0.0;
    std::vector<double> per_pose_error;
    int pairs = 0;
};

struct RpeResult {
    double translation_rmse = 0.0;
    double rotation_rmse = 0.0;  // radians
    std::vector<double> translation_errors;
    std::vector<double> rotation_errors;
    int pairs = 0;
};

// Pairs poses whose timestamps agree within `tolerance`, then solves the
// closed-form least-squares position alignment. Needs at least three
// non-collinear pairs.
AlignmentResult align(const std::vector<TimedPose>& est, const std::vector<TimedPose>& ref,
                      AlignmentMode mode = AlignmentMode::Rigid,
                      Timestamp tolerance = 10'000'000);

// Relative-pose error over all associated pairs separated by `delta_s`
// seconds. A pair contributes (ref_i^-1 ref_j)^-1 (est_i^-1 est_j).
RpeResult rpe(const std::vector<TimedPose>& est, const std::vector<TimedPose>& ref,
              double delta_s, Timestamp tolerance = 10'000'000);

}  // namespace uslam
