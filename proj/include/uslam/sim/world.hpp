#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "uslam/sim/scenario.hpp"

namespace uslam {

struct SimLandmark {
    std::int64_t id = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  // world, m
    std::uint8_t semantic_class = 0;
};

struct World {
    std::vector<SimLandmark> landmarks;
};

/// Draws the landmark clusters with ids 0..N-1 in cluster order. Box clusters
/// fill the volume uniformly; tube clusters sample the surface of a
/// horizontal cylinder along x (length size.x, radius size.y / 2). A cluster
/// with count == 0 uses density_per_m2 over its x-y footprint. Throws
/// InvalidSpec when the world ends up empty or a class id is unknown.
World generate_world(const WorldSpec& spec, std::uint64_t seed);

}  // namespace uslam
