#include <cmath>
#include <vector>

#include "doctest.h"
#include "uslam/semantics/fusion.hpp"
#include "uslam/sim/random.hpp"

using namespace uslam;

namespace {

CameraIntrinsics simple_intrinsics() {
    CameraIntrinsics intr;
    intr.fx = 100.0;
    intr.fy = 100.0;
    intr.cx = 2.0;
    intr.cy = 2.0;
    intr.width = 4;
    intr.height = 4;
    return intr;
}

DepthMap constant_depth(int w, int h, float d) {
    DepthMap map;
    map.width = w;
    map.height = h;
    map.values.assign(static_cast<std::size_t>(w) * h, d);
    return map;
}

LabelMap constant_label(int w, int h, std::uint8_t c) {
    LabelMap map;
    map.width = w;
    map.height = h;
    map.values.assign(static_cast<std::size_t>(w) * h, c);
    return map;
}

}  // namespace

TEST_CASE("projection back-projects sampled pixels through the pinhole") {
    const auto depth = constant_depth(4, 4, 2.0f);
    const auto labels = constant_label(4, 4, 1);
    const auto cloud = project_labels(Pose(), simple_intrinsics(), depth, labels, 2);

    // Stride 2 on a 4x4 grid samples pixels (1,1), (3,1), (1,3), (3,3).
    REQUIRE(cloud.points.size() == 4);
    const Eigen::Vector3d expected = Eigen::Vector3d((1.0 - 2.0) / 100.0 * 2.0,
                                                     (1.0 - 2.0) / 100.0 * 2.0, 2.0);
    CHECK((cloud.points[0].position - expected).norm() < 1e-12);
    for (const auto& pt : cloud.points) {
        CHECK(pt.position.z() == doctest::Approx(2.0));
        CHECK(pt.class_id == 1);
        CHECK(pt.color == std::array<std::uint8_t, 3>{255, 255, 0});
    }
}

TEST_CASE("only pixels with positive depth produce points") {
    auto depth = constant_depth(4, 4, 0.0f);
    const auto labels = constant_label(4, 4, 0);
    CHECK(project_labels(Pose(), simple_intrinsics(), depth, labels, 1).points.empty());

    depth.values[1 * 4 + 3] = 1.5f;  // pixel (3,1), on the stride-2 sample grid
    const auto cloud = project_labels(Pose(), simple_intrinsics(), depth, labels, 2);
    CHECK(cloud.points.size() == 1);
}

TEST_CASE("projection count equals valid sampled pixels exactly") {
    CameraIntrinsics intr = simple_intrinsics();
    intr.width = 37;
    intr.height = 23;
    intr.cx = 18.0;
    intr.cy = 11.0;
    RandomStream rng(5);
    DepthMap depth = constant_depth(37, 23, 0.0f);
    for (auto& v : depth.values) {
        if (rng.uniform() < 0.4) v = static_cast<float>(1.0 + rng.uniform());
    }
    const auto labels = constant_label(37, 23, 2);
    const int stride = 3;
    std::size_t expected = 0;
    for (int y = stride / 2; y < 23; y += stride) {
        for (int x = stride / 2; x < 37; x += stride) {
            if (depth.at(x, y) > 0.0f) ++expected;
        }
    }
    CHECK(project_labels(Pose(), intr, depth, labels, stride).points.size() == expected);
}

TEST_CASE("projection rejects bad inputs") {
    const auto depth = constant_depth(4, 4, 1.0f);
    CHECK_THROWS_AS(
        project_labels(Pose(), simple_intrinsics(), depth, constant_label(4, 3, 0), 1),
        DimensionMismatch);
    CHECK_THROWS_AS(
        project_labels(Pose(), simple_intrinsics(), depth, constant_label(4, 4, 0), 0),
        InvalidSpec);
    CHECK_THROWS_AS(
        project_labels(Pose(), simple_intrinsics(), depth, constant_label(4, 4, 7), 1),
        UnknownClassId);
}

TEST_CASE("projection is rigidly consistent") {
    CameraIntrinsics intr = simple_intrinsics();
    intr.width = 20;
    intr.height = 16;
    intr.cx = 10.0;
    intr.cy = 8.0;
    intr.k1 = -0.1;
    RandomStream rng(9);
    DepthMap depth = constant_depth(20, 16, 0.0f);
    for (auto& v : depth.values) v = static_cast<float>(1.0 + 3.0 * rng.uniform());
    const auto labels = constant_label(20, 16, 1);

    const Pose T(Rotation::exp(Eigen::Vector3d(0.3, -0.5, 0.8)), Eigen::Vector3d(2, -1, 4));
    const auto moved = project_labels(T, intr, depth, labels, 2);
    const auto base = project_labels(Pose(), intr, depth, labels, 2);
    REQUIRE(moved.points.size() == base.points.size());
    const Pose T_inv = T.inverse();
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        CHECK((T_inv * moved.points[i].position - base.points[i].position).norm() < 1e-9);
    }
}

TEST_CASE("fusion averages voxels and votes on class") {
    LabeledPointCloud cloud;
    LabeledPoint a;
    a.position = Eigen::Vector3d(0.1, 0.1, 0.1);
    a.class_id = 1;
    a.color = class_color(1);
    cloud.points.push_back(a);

    const auto single = fuse({cloud}, 0.5);
    REQUIRE(single.points.size() == 1);
    CHECK((single.points[0].position - a.position).norm() < 1e-15);
    CHECK(single.points[0].class_id == 1);

    LabeledPoint b = a;
    b.position = Eigen::Vector3d(0.3, 0.1, 0.1);
    cloud.points.push_back(b);
    const auto merged = fuse({cloud}, 0.5);
    REQUIRE(merged.points.size() == 1);
    CHECK((merged.points[0].position - Eigen::Vector3d(0.2, 0.1, 0.1)).norm() < 1e-15);
    CHECK(merged.points[0].class_id == 1);

    // Split across two input clouds; a seabed point forces a 2:1 vote.
    LabeledPointCloud second;
    LabeledPoint c = a;
    c.class_id = 0;
    c.color = class_color(0);
    second.points.push_back(c);
    const auto voted = fuse({cloud, second}, 0.5);
    REQUIRE(voted.points.size() == 1);
    CHECK(voted.points[0].class_id == 1);
}

TEST_CASE("fusion ties go to the lowest class id") {
    LabeledPointCloud cloud;
    LabeledPoint a;
    a.position = Eigen::Vector3d(0.1, 0.0, 0.0);
    a.class_id = 1;
    cloud.points.push_back(a);
    LabeledPoint b = a;
    b.class_id = 0;
    cloud.points.push_back(b);
    const auto fused = fuse({cloud}, 1.0);
    REQUIRE(fused.points.size() == 1);
    CHECK(fused.points[0].class_id == 0);
    CHECK(fused.points[0].color == std::array<std::uint8_t, 3>{0, 0, 255});

    LabeledPoint tie2 = a;
    tie2.class_id = 2;
    LabeledPointCloud other;
    other.points = {a, tie2};
    const auto fused2 = fuse({other}, 1.0);
    CHECK(fused2.points[0].class_id == 1);
}

TEST_CASE("fusion is idempotent and preserves the class support") {
    RandomStream rng(21);
    LabeledPointCloud cloud;
    for (int i = 0; i < 500; ++i) {
        LabeledPoint pt;
        pt.position =
            Eigen::Vector3d(8.0 * rng.uniform() - 4.0, 8.0 * rng.uniform() - 4.0,
                            2.0 * rng.uniform());
        pt.class_id = static_cast<std::uint8_t>(rng.uniform() < 0.8 ? 0 : 1);
        pt.color = class_color(pt.class_id);
        cloud.points.push_back(pt);
    }
    const auto once = fuse({cloud}, 0.25);
    const auto twice = fuse({once}, 0.25);
    REQUIRE(once.points.size() == twice.points.size());
    for (std::size_t i = 0; i < once.points.size(); ++i) {
        CHECK((once.points[i].position - twice.points[i].position).norm() < 1e-12);
        CHECK(once.points[i].class_id == twice.points[i].class_id);
    }
    for (const auto& pt : once.points) {
        CHECK(pt.class_id <= 1);  // class 2 absent from input stays absent
        CHECK(pt.color == class_color(pt.class_id));
    }

    CHECK_THROWS_AS(fuse({cloud}, 0.0), InvalidSpec);
    CHECK_THROWS_AS(fuse({cloud}, -1.0), InvalidSpec);
}

namespace {

World two_class_world() {
    World world;
    RandomStream rng(17);
    for (int i = 0; i < 200; ++i) {
        SimLandmark lm;
        lm.id = i + 1;
        lm.position = Eigen::Vector3d(10.0 * rng.uniform(), 10.0 * rng.uniform(), 5.0);
        lm.semantic_class = static_cast<std::uint8_t>(i % 2);
        world.landmarks.push_back(lm);
    }
    return world;
}

LabeledPointCloud cloud_from_world(const World& world) {
    LabeledPointCloud cloud;
    for (const auto& lm : world.landmarks) {
        LabeledPoint pt;
        pt.position = lm.position;
        pt.class_id = lm.semantic_class;
        pt.color = class_color(pt.class_id);
        cloud.points.push_back(pt);
    }
    return cloud;
}

}  // namespace

TEST_CASE("a perfect cloud scores unit precision and recall") {
    const World world = two_class_world();
    const ConsistencyReport report = consistency_report(cloud_from_world(world), world);
    CHECK(report.matched == 200);
    CHECK(report.unmatched == 0);
    CHECK(report.accuracy == 1.0);
    for (int c = 0; c < 2; ++c) {
        CHECK(report.precision[c] == 1.0);
        CHECK(report.recall[c] == 1.0);
    }
    CHECK(std::isnan(report.precision[2]));  // class absent from world and cloud
}

TEST_CASE("corrupting a tenth of the labels drops accuracy to about 0.9") {
    const World world = two_class_world();
    LabeledPointCloud cloud = cloud_from_world(world);
    RandomStream rng(33);
    int flipped = 0;
    for (auto& pt : cloud.points) {
        if (rng.uniform() < 0.1) {
            pt.class_id = static_cast<std::uint8_t>(1 - pt.class_id);
            pt.color = class_color(pt.class_id);
            ++flipped;
        }
    }
    const ConsistencyReport report = consistency_report(cloud, world);
    CHECK(report.accuracy == doctest::Approx(1.0 - flipped / 200.0));
    CHECK(report.accuracy > 0.8);
    CHECK(report.accuracy < 0.97);
}

TEST_CASE("points outside the match radius are unmatched") {
    World world;
    SimLandmark lm;
    lm.id = 1;
    lm.position = Eigen::Vector3d::Zero();
    lm.semantic_class = 1;
    world.landmarks.push_back(lm);

    LabeledPointCloud cloud;
    LabeledPoint near, far;
    near.position = Eigen::Vector3d(0.05, 0.0, 0.0);
    near.class_id = 1;
    far.position = Eigen::Vector3d(0.5, 0.0, 0.0);
    far.class_id = 1;
    cloud.points = {near, far};

    const ConsistencyReport report = consistency_report(cloud, world, 0.2);
    CHECK(report.matched == 1);
    CHECK(report.unmatched == 1);
    CHECK(report.recall[1] == 1.0);
}

TEST_CASE("consistency edge cases: empty cloud, empty world") {
    const World world = two_class_world();
    const ConsistencyReport report = consistency_report(LabeledPointCloud{}, world);
    CHECK(report.matched == 0);
    CHECK(report.recall[0] == 0.0);
    CHECK(report.recall[1] == 0.0);
    CHECK(std::isnan(report.precision[0]));
    CHECK(std::isnan(report.accuracy));

    CHECK_THROWS_AS(consistency_report(LabeledPointCloud{}, World{}), EmptyGroundTruth);
}

TEST_CASE("confusion matrix attributes mistakes to the true class") {
    World world;
    for (int i = 0; i < 4; ++i) {
        SimLandmark lm;
        lm.id = i + 1;
        lm.position = Eigen::Vector3d(double(i), 0.0, 0.0);
        lm.semantic_class = static_cast<std::uint8_t>(i < 2 ? 0 : 1);
        world.landmarks.push_back(lm);
    }
    LabeledPointCloud cloud;
    for (int i = 0; i < 4; ++i) {
        LabeledPoint pt;
        pt.position = Eigen::Vector3d(double(i) + 0.01, 0.0, 0.0);
        pt.class_id = static_cast<std::uint8_t>(i == 0 ? 1 : (i < 2 ? 0 : 1));
        cloud.points.push_back(pt);
    }
    const ConsistencyReport report = consistency_report(cloud, world);
    CHECK(report.confusion[0][1] == 1);  // seabed landmark called pipeline
    CHECK(report.confusion[0][0] == 1);
    CHECK(report.confusion[1][1] == 2);
    CHECK(report.precision[1] == doctest::Approx(2.0 / 3.0));
    CHECK(report.recall[0] == 0.5);
    CHECK(report.recall[1] == 1.0);
}
