#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "uslam/geometry/camera.hpp"
#include "uslam/semantics/types.hpp"
#include "uslam/sim/world.hpp"

namespace uslam {

// Back-projects sampled pixels with valid depth into world points carrying
// the pixel's class. Pixels are sampled at block centers every `stride`
// columns and rows; depth is meters along the optical axis, 0 marks invalid.
LabeledPointCloud project_labels(const Pose& camera_to_world, const CameraIntrinsics& intrinsics,
                                 const DepthMap& depth, const LabelMap& labels, int stride = 4);

// Voxel-grid downsample: one point per occupied voxel at the member
// centroid, class by majority vote with ties going to the lowest id, color
// re-derived from the winning class.
LabeledPointCloud fuse(const std::vector<LabeledPointCloud>& clouds, double voxel);

struct ConsistencyReport {
    // confusion[true_class][predicted_class] over matched points.
    std::array<std::array<std::int64_t, kSemanticClassCount>, kSemanticClassCount> confusion{};
    std::array<double, kSemanticClassCount> precision{};  // NaN when nothing predicted
    std::array<double, kSemanticClassCount> recall{};
    double accuracy = 0.0;
    std::int64_t matched = 0;
    std::int64_t unmatched = 0;
};

// Matches each cloud point to the nearest ground-truth landmark within
// `radius`. Precision is point-based; recall counts landmarks covered by at
// least one correctly labeled point.
ConsistencyReport consistency_report(const LabeledPointCloud& cloud, const World& world,
                                     double radius = 0.2);

}  // namespace uslam
