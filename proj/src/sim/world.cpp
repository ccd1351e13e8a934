#include "uslam/sim/world.hpp"

#include <cmath>

#include "uslam/semantics/types.hpp"
#include "uslam/sim/random.hpp"

namespace uslam {

World generate_world(const WorldSpec& spec, std::uint64_t seed) {
    RandomStream rng(derive_seed(seed, 3));
    World world;
    for (const auto& cluster : spec.clusters) {
        class_color(cluster.semantic_class);  // validates the id
        int count = cluster.count;
        if (count == 0) {
            count = static_cast<int>(
                std::lround(cluster.density_per_m2 * cluster.size.x() * cluster.size.y()));
        }
        if (count < 0) throw InvalidSpec("negative landmark count");
        for (int i = 0; i < count; ++i) {
            SimLandmark lm;
            lm.id = static_cast<std::int64_t>(world.landmarks.size());
            lm.semantic_class = cluster.semantic_class;
            if (cluster.shape == LandmarkCluster::Shape::Box) {
                const Eigen::Vector3d u(rng.uniform(), rng.uniform(), rng.uniform());
                lm.position =
                    cluster.center + (u - Eigen::Vector3d::Constant(0.5)).cwiseProduct(cluster.size);
            } else {
                const double x = (rng.uniform() - 0.5) * cluster.size.x();
                const double theta = 2.0 * M_PI * rng.uniform();
                const double r = 0.5 * cluster.size.y();
                lm.position = cluster.center +
                              Eigen::Vector3d(x, r * std::cos(theta), r * std::sin(theta));
            }
            world.landmarks.push_back(lm);
        }
    }
    if (world.landmarks.empty()) throw InvalidSpec("world has no landmarks");
    return world;
}

}  // namespace uslam
