#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "uslam/common.hpp"

namespace uslam {

enum class SemanticClass : std::uint8_t {
    Seabed = 0,
    Pipeline = 1,
    PipelineSupport = 2,
};

inline constexpr int kSemanticClassCount = 3;

/// RGB for a class id: seabed blue, pipeline yellow, supports green.
/// Throws UnknownClassId for anything else.
inline std::array<std::uint8_t, 3> class_color(std::uint8_t class_id) {
    switch (class_id) {
        case 0: return {0, 0, 255};
        case 1: return {255, 255, 0};
        case 2: return {0, 255, 0};
        default: throw UnknownClassId("unknown semantic class id " + std::to_string(class_id));
    }
}

struct LabeledPoint {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  // world, m
    std::uint8_t class_id = 0;
    std::array<std::uint8_t, 3> color = {0, 0, 255};
};

struct LabeledPointCloud {
    std::vector<LabeledPoint> points;
};

/// Per-pixel depth in meters along the optical axis; 0 marks invalid pixels.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    std::uint8_t at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

}  // namespace uslam
