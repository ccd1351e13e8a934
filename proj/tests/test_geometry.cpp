#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "uslam/geometry/camera.hpp"
#include "uslam/geometry/pose.hpp"
#include "uslam/geometry/rotation.hpp"
#include "uslam/geometry/triangulation.hpp"

using namespace uslam;

namespace {

// Truncated matrix-exponential series, the independent oracle for se3_exp.
Eigen::Matrix4d matrix_exp_series(const Twist& xi, int terms = 20) {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.topLeftCorner<3, 3>() = hat(xi.angular);
    A.topRightCorner<3, 1>() = xi.linear;
    Eigen::Matrix4d result = Eigen::Matrix4d::Identity();
    Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
    for (int n = 1; n < terms; ++n) {
        term = term * A / static_cast<double>(n);
        result += term;
    }
    return result;
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    return v.normalized();
}

}  // namespace

TEST_CASE("se3_exp basic cases") {
    CHECK(se3_exp(Twist()).is_approx(Pose::identity(), 1e-15));

    const Pose t = se3_exp(Twist(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d::Zero()));
    CHECK(t.rotation().is_approx(Rotation::identity(), 1e-15));
    CHECK((t.translation() - Eigen::Vector3d(1, 2, 3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("se3_exp matches the truncated matrix-exponential series") {
    const Twist yaw90(Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, M_PI / 2));
    CHECK((se3_exp(yaw90).matrix() - matrix_exp_series(yaw90)).cwiseAbs().maxCoeff() <= 1e-10);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Twist xi(Eigen::Vector3d(u(rng), u(rng), u(rng)),
                       random_unit(rng) * std::abs(u(rng)) * 2.0);
        CHECK((se3_exp(xi).matrix() - matrix_exp_series(xi)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("se3_log round-trips") {
    CHECK(se3_log(Pose::identity()).vector().norm() == doctest::Approx(0.0));

    const Twist t = se3_log(Pose(Rotation::identity(), Eigen::Vector3d(4, 5, 6)));
    CHECK((t.linear - Eigen::Vector3d(4, 5, 6)).norm() <= 1e-12);
    CHECK(t.angular.norm() <= 1e-12);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> angle(0.0, M_PI - 0.1);
    for (int i = 0; i < 1000; ++i) {
        const Twist xi(Eigen::Vector3d(u(rng), u(rng), u(rng)), random_unit(rng) * angle(rng));
        const Twist back = se3_log(se3_exp(xi));
        CHECK((back.vector() - xi.vector()).norm() <= 1e-9);
    }
}

TEST_CASE("rotation jacobians are finite and mutually inverse at all scales") {
    std::mt19937_64 rng(41);
    for (const double theta : {1e-12, 1e-9, 5e-9, 1e-8, 1.5e-8, 2e-8, 1e-7, 1e-6, 1e-5,
                               9.9e-5, 1.01e-4, 1e-3, 1e-2, 0.5, 2.0, 3.1}) {
        const Eigen::Vector3d w = random_unit(rng) * theta;
        const Eigen::Matrix3d Jr = so3_right_jacobian(w);
        const Eigen::Matrix3d Jr_inv = so3_right_jacobian_inverse(w);
        REQUIRE(Jr.allFinite());
        REQUIRE(Jr_inv.allFinite());
        CHECK((Jr * Jr_inv - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((so3_left_jacobian(w) * so3_left_jacobian_inverse(w) -
               Eigen::Matrix3d::Identity())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
    }

    // Jr maps tangent steps to rotation composition: exp(w + Jr_inv' ...)
    // checked directly against the defining relation exp(w)exp(Jr d) ~ exp(w+d).
    for (int i = 0; i < 50; ++i) {
        std::uniform_real_distribution<double> u(0.0, 2.5);
        const Eigen::Vector3d w = random_unit(rng) * u(rng);
        const Eigen::Vector3d d = random_unit(rng) * 1e-6;
        const Rotation lhs = Rotation::exp(w + d);
        const Rotation rhs = Rotation::exp(w) * Rotation::exp(so3_right_jacobian(w) * d);
        CHECK(lhs.angle_to(rhs) <= 1e-11);
    }
}

TEST_CASE("rotation composition keeps quaternions normalized") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> angle(0.0, M_PI);
    Rotation acc;
    for (int i = 0; i < 1000000; ++i) {
        acc = acc * Rotation::exp(random_unit(rng) * angle(rng));
    }
    CHECK(std::abs(acc.quaternion().norm() - 1.0) <= 1e-9);
}

TEST_CASE("pose inverse of a product") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const Pose p1(Rotation::exp(random_unit(rng) * u(rng)),
                      Eigen::Vector3d(u(rng), u(rng), u(rng)));
        const Pose p2(Rotation::exp(random_unit(rng) * u(rng)),
                      Eigen::Vector3d(u(rng), u(rng), u(rng)));
        CHECK((p1 * p2).inverse().is_approx(p2.inverse() * p1.inverse(), 1e-9));
        CHECK((p1 * p1.inverse()).is_approx(Pose::identity(), 1e-9));
    }
}

namespace {

CameraIntrinsics paper_rate_intrinsics() {
    // Focal from f = (W/2) / tan(FoV/2), W = 1600 px, FoV = 82 deg.
    CameraIntrinsics intr;
    intr.fx = intr.fy = 920.3;
    intr.cx = 800.0;
    intr.cy = 600.0;
    intr.width = 1600;
    intr.height = 1200;
    return intr;
}

}  // namespace

TEST_CASE("pinhole projection") {
    const CameraIntrinsics intr = paper_rate_intrinsics();
    CHECK((project(intr, {0, 0, 2}) - Eigen::Vector2d(800, 600)).norm() <= 1e-12);
    CHECK((project(intr, {0.5, 0, 2}) - Eigen::Vector2d(1030.075, 600)).norm() <= 0.01);
    CHECK_THROWS_AS(project(intr, {0, 0, -1}), PointBehindCamera);
    CHECK_THROWS_AS(project(intr, {0, 0, 0}), PointBehindCamera);
}

TEST_CASE("projection jacobian matches finite differences") {
    CameraIntrinsics intr = paper_rate_intrinsics();
    intr.k1 = -0.12;
    intr.k2 = 0.03;
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> depth(0.5, 6.0);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Vector3d q(u(rng), u(rng), depth(rng));
        const Eigen::Matrix<double, 2, 3> J = project_jacobian(intr, q);
        const double eps = 1e-6;
        for (int a = 0; a < 3; ++a) {
            Eigen::Vector3d hi = q, lo = q;
            hi[a] += eps;
            lo[a] -= eps;
            const Eigen::Vector2d fd = (project(intr, hi) - project(intr, lo)) / (2 * eps);
            CHECK((fd - J.col(a)).norm() <= 1e-4 * std::max(1.0, J.col(a).norm()));
        }
    }
}

TEST_CASE("pixel_to_ray principal ray and tilt") {
    RigCalibration rig;
    rig.cameras.push_back({0, paper_rate_intrinsics(), Pose::identity()});

    const Ray principal = pixel_to_ray(rig, 0, {800, 600});
    CHECK(principal.origin.norm() <= 1e-12);
    CHECK((principal.direction - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-12);

    // 30 degree downward tilt option.
    const Rotation tilt(Eigen::Quaterniond(
        Eigen::AngleAxisd(30.0 * M_PI / 180.0, Eigen::Vector3d(-1, 0, 0))));
    rig.cameras.push_back({1, paper_rate_intrinsics(), Pose(tilt, Eigen::Vector3d::Zero())});
    const Ray tilted = pixel_to_ray(rig, 1, {800, 600});
    const Eigen::Vector3d expected(0.0, std::sin(30.0 * M_PI / 180.0),
                                   std::cos(30.0 * M_PI / 180.0));
    CHECK((tilted.direction - expected).norm() <= 1e-12);

    CHECK_THROWS_AS(pixel_to_ray(rig, 9, {800, 600}), UnknownCamera);
    CHECK_THROWS_AS(pixel_to_ray(rig, 0, {-1, 600}), PixelOutOfBounds);
    CHECK_THROWS_AS(pixel_to_ray(rig, 0, {800, 1201}), PixelOutOfBounds);
}

TEST_CASE("projection round-trip through pixel_to_ray") {
    RigCalibration rig;
    rig.cameras.push_back({0, paper_rate_intrinsics(), Pose::identity()});

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ux(0.0, 1600.0);
    std::uniform_real_distribution<double> uy(0.0, 1200.0);
    std::uniform_real_distribution<double> depth(0.5, 8.0);

    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector2d px(ux(rng), uy(rng));
        const Ray ray = pixel_to_ray(rig, 0, px);
        const Eigen::Vector3d point = ray.origin + ray.direction * depth(rng) / ray.direction.z();
        const Eigen::Vector2d back = project(rig.cameras[0].intrinsics, point);
        CHECK((back - px).norm() <= 1e-6);
    }
}

TEST_CASE("projection round-trip with distortion") {
    CameraIntrinsics intr = paper_rate_intrinsics();
    intr.k1 = -0.2;
    intr.k2 = 0.05;
    std::mt19937_64 rng(29);
    // Stay away from the extreme corners, where the distortion model folds.
    std::uniform_real_distribution<double> ux(200.0, 1400.0);
    std::uniform_real_distribution<double> uy(150.0, 1050.0);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector2d px(ux(rng), uy(rng));
        const Eigen::Vector3d bearing = pixel_to_bearing(intr, px);
        const Eigen::Vector2d back = project(intr, bearing * 3.0);
        CHECK((back - px).norm() <= 1e-3);
    }
}

TEST_CASE("triangulation exact intersection") {
    std::vector<WorldRay> rays;
    for (const double ox : {-0.1, 0.1}) {
        Ray r;
        r.origin = Eigen::Vector3d(ox, 0, 0);
        r.direction = (Eigen::Vector3d(0, 0, 5) - r.origin).normalized();
        rays.push_back({r, Pose::identity()});
    }
    CHECK((triangulate(rays) - Eigen::Vector3d(0, 0, 5)).norm() <= 1e-9);
}

TEST_CASE("triangulation rejects parallel rays") {
    std::vector<WorldRay> rays;
    for (const double ox : {-0.1, 0.1}) {
        Ray r;
        r.origin = Eigen::Vector3d(ox, 0, 0);
        r.direction = Eigen::Vector3d(0, 0, 1);
        rays.push_back({r, Pose::identity()});
    }
    CHECK_THROWS_AS(triangulate(rays), DegenerateGeometry);
}

TEST_CASE("triangulation matches a dense normal-equations oracle") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Vector3d target(0.4, -0.2, 4.0);

    std::vector<WorldRay> rays;
    for (int i = 0; i < 5; ++i) {
        Ray r;
        r.origin = Eigen::Vector3d(n(rng), n(rng), 0.0) * 0.5;
        Eigen::Vector3d d = (target - r.origin).normalized();
        // 0.2 degree direction noise.
        const Eigen::Vector3d axis = random_unit(rng);
        d = Rotation::exp(axis * (0.2 * M_PI / 180.0) * n(rng)) * d;
        r.direction = d.normalized();
        rays.push_back({r, Pose::identity()});
    }

    // Independent oracle: stack M = I - d d^T per ray, solve the dense
    // normal equations by full-pivot LU.
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& wr : rays) {
        const Eigen::Matrix3d M =
            Eigen::Matrix3d::Identity() - wr.ray.direction * wr.ray.direction.transpose();
        A += M.transpose() * M;
        b += M.transpose() * M * wr.ray.origin;
    }
    const Eigen::Vector3d oracle = A.fullPivLu().solve(b);

    CHECK((triangulate(rays) - oracle).norm() <= 1e-9);
}

TEST_CASE("triangulation is rigid-invariant") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Vector3d target(0.3, 0.6, 3.0);

    std::vector<WorldRay> rays;
    for (int i = 0; i < 4; ++i) {
        Ray r;
        r.origin = Eigen::Vector3d(n(rng), n(rng), n(rng)) * 0.3;
        r.direction = (target - r.origin).normalized();
        rays.push_back({r, Pose::identity()});
    }
    const Eigen::Vector3d x = triangulate(rays);

    for (int trial = 0; trial < 20; ++trial) {
        const Pose T(Rotation::exp(random_unit(rng) * n(rng)),
                     Eigen::Vector3d(n(rng), n(rng), n(rng)) * 3.0);
        std::vector<WorldRay> moved = rays;
        for (auto& wr : moved) {
            wr.rig_pose = T * wr.rig_pose;
        }
        CHECK((triangulate(moved) - T * x).norm() <= 1e-8);
    }
}
