#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace uslam {

/// splitmix64 of (seed, stream); derives independent stream seeds from one
/// master seed so that consuming one stream never shifts another.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// mt19937_64 with explicit uniform and Box-Muller transforms. The standard
/// distributions are implementation-defined, so sequences would differ across
/// standard libraries; these transforms make logs reproducible everywhere.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// [0, 1), 53-bit resolution.
    double uniform();

    /// Standard normal. Draws two uniforms per pair and caches the second.
    double gaussian();

    Eigen::Vector3d gaussian3();

    /// uniform() < p; always consumes exactly one draw.
    bool bernoulli(double p);

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace uslam
