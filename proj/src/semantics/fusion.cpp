#include "uslam/semantics/fusion.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace uslam {

namespace {

using VoxelKey = std::array<std::int64_t, 3>;

VoxelKey voxel_of(const Eigen::Vector3d& p, double voxel) {
    return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
            static_cast<std::int64_t>(std::floor(p.y() / voxel)),
            static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

}  // namespace

LabeledPointCloud project_labels(const Pose& camera_to_world, const CameraIntrinsics& intrinsics,
                                 const DepthMap& depth, const LabelMap& labels, int stride) {
    if (depth.width != labels.width || depth.height != labels.height) {
        throw DimensionMismatch("depth map " + std::to_string(depth.width) + "x" +
                                std::to_string(depth.height) + " vs label map " +
                                std::to_string(labels.width) + "x" +
                                std::to_string(labels.height));
    }
    if (stride < 1) throw InvalidSpec("stride must be >= 1");

    LabeledPointCloud cloud;
    for (int y = stride / 2; y < depth.height; y += stride) {
        for (int x = stride / 2; x < depth.width; x += stride) {
            const double d = depth.at(x, y);
            if (!(d > 0.0)) continue;
            LabeledPoint pt;
            pt.class_id = labels.at(x, y);
            pt.color = class_color(pt.class_id);
            const Eigen::Vector3d bearing =
                pixel_to_bearing(intrinsics, Eigen::Vector2d(x, y));
            pt.position = camera_to_world * (bearing * (d / bearing.z()));
            cloud.points.push_back(pt);
        }
    }
    return cloud;
}

LabeledPointCloud fuse(const std::vector<LabeledPointCloud>& clouds, double voxel) {
    if (!(voxel > 0.0)) throw InvalidSpec("voxel size must be positive");

    struct Cell {
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        std::int64_t count = 0;
        std::array<std::int64_t, kSemanticClassCount> votes{};
    };
    std::map<VoxelKey, Cell> cells;
    for (const auto& cloud : clouds) {
        for (const auto& pt : cloud.points) {
            class_color(pt.class_id);  // validates the id
            Cell& cell = cells[voxel_of(pt.position, voxel)];
            cell.sum += pt.position;
            ++cell.count;
            ++cell.votes[pt.class_id];
        }
    }

    LabeledPointCloud out;
    out.points.reserve(cells.size());
    for (const auto& [key, cell] : cells) {
        LabeledPoint pt;
        pt.position = cell.sum / static_cast<double>(cell.count);
        std::uint8_t best = 0;
        for (std::uint8_t c = 1; c < kSemanticClassCount; ++c) {
            if (cell.votes[c] > cell.votes[best]) best = c;
        }
        pt.class_id = best;
        pt.color = class_color(best);
        out.points.push_back(pt);
    }
    return out;
}

ConsistencyReport consistency_report(const LabeledPointCloud& cloud, const World& world,
                                     double radius) {
    if (world.landmarks.empty()) throw EmptyGroundTruth("world has no landmarks");
    if (!(radius > 0.0)) throw InvalidSpec("match radius must be positive");

    std::map<VoxelKey, std::vector<std::size_t>> grid;
    for (std::size_t i = 0; i < world.landmarks.size(); ++i) {
        grid[voxel_of(world.landmarks[i].position, radius)].push_back(i);
    }

    ConsistencyReport report;
    std::vector<bool> covered(world.landmarks.size(), false);
    const double radius_sq = radius * radius;
    for (const auto& pt : cloud.points) {
        class_color(pt.class_id);
        const VoxelKey center = voxel_of(pt.position, radius);
        double best_sq = radius_sq;
        std::size_t best = world.landmarks.size();
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it =
                        grid.find({center[0] + dx, center[1] + dy, center[2] + dz});
                    if (it == grid.end()) continue;
                    for (const std::size_t i : it->second) {
                        const double d_sq =
                            (world.landmarks[i].position - pt.position).squaredNorm();
                        if (d_sq <= best_sq) {
                            best_sq = d_sq;
                            best = i;
                        }
                    }
                }
            }
        }
        if (best == world.landmarks.size()) {
            ++report.unmatched;
            continue;
        }
        const std::uint8_t truth = world.landmarks[best].semantic_class;
        ++report.confusion[truth][pt.class_id];
        ++report.matched;
        if (truth == pt.class_id) covered[best] = true;
    }

    std::array<std::int64_t, kSemanticClassCount> predicted{};
    std::int64_t correct = 0;
    for (int t = 0; t < kSemanticClassCount; ++t) {
        for (int p = 0; p < kSemanticClassCount; ++p) predicted[p] += report.confusion[t][p];
        correct += report.confusion[t][t];
    }
    std::array<std::int64_t, kSemanticClassCount> class_total{}, class_covered{};
    for (std::size_t i = 0; i < world.landmarks.size(); ++i) {
        ++class_total[world.landmarks[i].semantic_class];
        if (covered[i]) ++class_covered[world.landmarks[i].semantic_class];
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int c = 0; c < kSemanticClassCount; ++c) {
        report.precision[c] =
            predicted[c] > 0 ? static_cast<double>(report.confusion[c][c]) / predicted[c] : nan;
        report.recall[c] = class_total[c] > 0
                               ? static_cast<double>(class_covered[c]) / class_total[c]
                               : nan;
    }
    report.accuracy =
        report.matched > 0 ? static_cast<double>(correct) / report.matched : nan;
    return report;
}

}  // namespace uslam
