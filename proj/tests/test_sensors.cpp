#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "uslam/sensors/depth.hpp"
#include "uslam/sensors/dvl.hpp"
#include "uslam/sensors/imu.hpp"

using namespace uslam;

namespace {

const Eigen::Vector3d kGravity(0.0, 0.0, kGravityMagnitude);

// Uniformly spaced batch of constant-input samples covering [0, duration).
std::vector<ImuSample> constant_batch(double rate_hz, double duration,
                                      const Eigen::Vector3d& gyro,
                                      const Eigen::Vector3d& accel) {
    std::vector<ImuSample> out;
    const int n = static_cast<int>(std::lround(rate_hz * duration));
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        ImuSample s;
        s.t = static_cast<Timestamp>(std::llround(k * 1e9 / rate_hz));
        s.gyro = gyro;
        s.accel = accel;
        out.push_back(s);
    }
    return out;
}

// Deterministic smoothly varying batch, for tests that need non-commuting
// increments.
std::vector<ImuSample> wavy_batch(double rate_hz, double duration) {
    std::vector<ImuSample> out;
    const int n = static_cast<int>(std::lround(rate_hz * duration));
    for (int k = 0; k < n; ++k) {
        const double t = k / rate_hz;
        ImuSample s;
        s.t = static_cast<Timestamp>(std::llround(k * 1e9 / rate_hz));
        s.gyro = Eigen::Vector3d(0.3 * std::sin(2.0 * t), 0.2 * std::cos(3.0 * t), 0.1);
        s.accel = Eigen::Vector3d(0.4 * std::cos(t), -0.3 * std::sin(2.0 * t), 9.7);
        out.push_back(s);
    }
    return out;
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    return v.normalized();
}

}  // namespace

TEST_CASE("preintegrate input validation") {
    const ImuBias zero;
    const ImuNoiseSpec noise;
    CHECK_THROWS_AS(preintegrate({}, zero, noise), EmptyBatch);

    std::vector<ImuSample> bad(3);
    bad[0].t = 0;
    bad[1].t = 2000000;
    bad[2].t = 2000000;
    CHECK_THROWS_AS(preintegrate(bad, zero, noise), NonMonotonicTimestamps);

    const PreintegratedImu single = preintegrate({ImuSample{}}, zero, noise);
    CHECK(single.delta_R.is_approx(Rotation::identity(), 1e-15));
    CHECK(single.delta_v.norm() == doctest::Approx(0.0));
    CHECK(single.delta_p.norm() == doctest::Approx(0.0));
    CHECK(single.dt_total == doctest::Approx(0.0));
}

TEST_CASE("constant acceleration closed form") {
    const auto batch = constant_batch(500.0, 1.0, Eigen::Vector3d::Zero(),
                                      Eigen::Vector3d(0, 0, 9.81));
    const PreintegratedImu d = preintegrate(batch, ImuBias{}, ImuNoiseSpec{});

    CHECK(d.dt_total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((d.delta_v - Eigen::Vector3d(0, 0, 9.81)).norm() <= 1e-12);
    // Left-Riemann velocity chaining plus the 1/2*a*dt^2 terms telescope to
    // exactly 1/2*a*T^2 for constant acceleration.
    CHECK((d.delta_p - Eigen::Vector3d(0, 0, 4.905)).norm() <= 1e-12);

    const auto fine = constant_batch(10000.0, 1.0, Eigen::Vector3d::Zero(),
                                     Eigen::Vector3d(0, 0, 9.81));
    const PreintegratedImu df = preintegrate(fine, ImuBias{}, ImuNoiseSpec{});
    CHECK((d.delta_v - df.delta_v).norm() <= 1e-4);
    CHECK((d.delta_p - df.delta_p).norm() <= 1e-4);
}

TEST_CASE("constant rotation closed form") {
    const auto batch = constant_batch(500.0, 1.0, Eigen::Vector3d(0, 0, M_PI),
                                      Eigen::Vector3d::Zero());
    const PreintegratedImu d = preintegrate(batch, ImuBias{}, ImuNoiseSpec{});
    CHECK(d.delta_R.angle_to(Rotation::exp(Eigen::Vector3d(0, 0, M_PI))) <= 1e-6);
    CHECK(d.delta_v.norm() <= 1e-12);
    CHECK(d.delta_p.norm() <= 1e-12);
}

TEST_CASE("mixed constant inputs against a 20x finer integrator") {
    const Eigen::Vector3d gyro(0.02, -0.01, 0.03);
    const Eigen::Vector3d accel(0.1, -0.05, 9.7);
    const PreintegratedImu coarse =
        preintegrate(constant_batch(500.0, 1.0, gyro, accel), ImuBias{}, ImuNoiseSpec{});
    const PreintegratedImu fine =
        preintegrate(constant_batch(10000.0, 1.0, gyro, accel), ImuBias{}, ImuNoiseSpec{});

    CHECK(coarse.delta_R.angle_to(fine.delta_R) <= 1e-9);
    CHECK((coarse.delta_v - fine.delta_v).norm() <= 1e-3);
    CHECK((coarse.delta_p - fine.delta_p).norm() <= 1e-3);
}

TEST_CASE("predict at hover and in free fall") {
    NavState rest;

    // Hovering: the accelerometer reads -g in body coordinates.
    const auto hover = constant_batch(500.0, 1.0, Eigen::Vector3d::Zero(),
                                      Eigen::Vector3d(0, 0, -9.81));
    const NavState h = predict(rest, preintegrate(hover, ImuBias{}, ImuNoiseSpec{}), kGravity);
    CHECK(h.velocity_world.norm() <= 1e-6);
    CHECK(h.pose.translation().norm() <= 1e-6);

    // Free fall: zero specific force, gravity pulls +z (down).
    const auto fall = constant_batch(500.0, 1.0, Eigen::Vector3d::Zero(),
                                     Eigen::Vector3d::Zero());
    const NavState f = predict(rest, preintegrate(fall, ImuBias{}, ImuNoiseSpec{}), kGravity);
    CHECK((f.velocity_world - Eigen::Vector3d(0, 0, 9.81)).norm() <= 1e-9);
    CHECK(std::abs(f.pose.translation().z() - 4.905) <= 1e-9);

    const PreintegratedImu identity_delta = preintegrate({ImuSample{}}, ImuBias{}, ImuNoiseSpec{});
    const NavState same = predict(rest, identity_delta, kGravity);
    CHECK(same.pose.is_approx(rest.pose, 1e-15));
    CHECK(same.velocity_world.norm() <= 1e-15);
}

TEST_CASE("imu_residual vanishes at the prediction") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.5);

    for (int trial = 0; trial < 1000; ++trial) {
        NavState si;
        si.pose = Pose(Rotation::exp(random_unit(rng) * angle(rng)),
                       Eigen::Vector3d(n(rng), n(rng), n(rng)) * 5.0);
        si.velocity_world = Eigen::Vector3d(n(rng), n(rng), n(rng));
        si.bias.gyro = Eigen::Vector3d(n(rng), n(rng), n(rng)) * 1e-3;
        si.bias.accel = Eigen::Vector3d(n(rng), n(rng), n(rng)) * 1e-2;

        const Eigen::Vector3d w(n(rng) * 0.5, n(rng) * 0.5, n(rng) * 0.5);
        const Eigen::Vector3d a(n(rng), n(rng), 9.81 + n(rng));
        const PreintegratedImu delta =
            preintegrate(constant_batch(100.0, 0.2, w, a), ImuBias{}, ImuNoiseSpec{});

        const NavState sj = predict(si, delta, kGravity);
        Eigen::Matrix<double, 6, 1> bias_r;
        const Eigen::Matrix<double, 9, 1> r = imu_residual(si, sj, delta, kGravity, &bias_r);
        CHECK(r.norm() <= 1e-9);
        CHECK(bias_r.norm() <= 1e-15);
    }
}

TEST_CASE("position offset appears in the position block") {
    NavState si;
    si.pose = Pose(Rotation::exp(Eigen::Vector3d(0.2, -0.1, 0.7)), Eigen::Vector3d(1, 2, 3));
    si.velocity_world = Eigen::Vector3d(0.3, -0.2, 0.1);

    const PreintegratedImu delta = preintegrate(
        constant_batch(100.0, 0.2, Eigen::Vector3d(0, 0, 0.1), Eigen::Vector3d(0.2, 0, 9.81)),
        ImuBias{}, ImuNoiseSpec{});

    NavState sj = predict(si, delta, kGravity);
    sj.pose = Pose(sj.pose.rotation(), sj.pose.translation() + Eigen::Vector3d(0.1, 0, 0));

    const Eigen::Matrix<double, 9, 1> r = imu_residual(si, sj, delta, kGravity);
    const Eigen::Vector3d expected =
        si.pose.rotation().inverse() * Eigen::Vector3d(0.1, 0, 0);
    CHECK(r.head<3>().norm() <= 1e-9);
    CHECK(r.segment<3>(3).norm() <= 1e-9);
    CHECK((r.tail<3>() - expected).norm() <= 1e-9);
}

TEST_CASE("first-order bias correction tracks re-preintegration") {
    const auto batch = wavy_batch(200.0, 0.5);
    const PreintegratedImu at_zero = preintegrate(batch, ImuBias{}, ImuNoiseSpec{});

    ImuBias shifted;
    shifted.accel = Eigen::Vector3d(0.01, 0, 0);
    shifted.gyro = Eigen::Vector3d(1e-3, -5e-4, 8e-4);

    Rotation dR;
    Eigen::Vector3d dv, dp;
    at_zero.corrected(shifted, &dR, &dv, &dp);

    const PreintegratedImu exact = preintegrate(batch, shifted, ImuNoiseSpec{});
    CHECK(dR.angle_to(exact.delta_R) <= 1e-5);
    CHECK((dv - exact.delta_v).norm() <= 1e-5);
    CHECK((dp - exact.delta_p).norm() <= 1e-5);
}

TEST_CASE("composition of contiguous batches") {
    const auto batch = wavy_batch(200.0, 1.0);
    const std::vector<ImuSample> first(batch.begin(), batch.begin() + 100);
    const std::vector<ImuSample> second(batch.begin() + 100, batch.end());

    const ImuNoiseSpec noise;
    const PreintegratedImu whole = preintegrate(batch, ImuBias{}, noise);
    const PreintegratedImu joined =
        compose(preintegrate(first, ImuBias{}, noise), preintegrate(second, ImuBias{}, noise));

    CHECK(joined.delta_R.angle_to(whole.delta_R) <= 1e-8);
    CHECK((joined.delta_v - whole.delta_v).norm() <= 1e-8);
    CHECK((joined.delta_p - whole.delta_p).norm() <= 1e-8);
    CHECK(joined.dt_total == doctest::Approx(whole.dt_total).epsilon(1e-12));

    const double cov_scale = whole.covariance.norm();
    CHECK((joined.covariance - whole.covariance).norm() <= 1e-6 * cov_scale);
    const double bj_scale = whole.bias_jacobian.norm();
    CHECK((joined.bias_jacobian - whole.bias_jacobian).norm() <= 1e-6 * bj_scale);
}

TEST_CASE("covariance grows with batch length and stays PSD") {
    const auto batch = wavy_batch(200.0, 1.0);
    double prev_trace = -1.0;
    for (int len : {50, 100, 150, 200}) {
        const std::vector<ImuSample> prefix(batch.begin(), batch.begin() + len);
        const PreintegratedImu d = preintegrate(prefix, ImuBias{}, ImuNoiseSpec{});
        const double tr = d.covariance.trace();
        CHECK(tr >= prev_trace);
        prev_trace = tr;

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(d.covariance);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-18);
        CHECK((d.covariance - d.covariance.transpose()).norm() <= 1e-15);
    }
}

TEST_CASE("dvl residual examples") {
    DvlSample sample;
    sample.velocity = Eigen::Vector3d(1, 0, 0);
    CHECK(dvl_residual(sample, Pose::identity(), Eigen::Vector3d(1, 0, 0),
                       Eigen::Vector3d::Zero(), Pose::identity())
              .norm() <= 1e-12);

    // Body yawed 90 degrees, body x along world y: world (1,0,0) reads as
    // body (0,-1,0).
    const Pose yawed(Rotation::exp(Eigen::Vector3d(0, 0, M_PI / 2)), Eigen::Vector3d::Zero());
    const Eigen::Vector3d predicted = dvl_predict_velocity(
        yawed, Eigen::Vector3d(1, 0, 0), Eigen::Vector3d::Zero(), Pose::identity());
    CHECK((predicted - Eigen::Vector3d(0, -1, 0)).norm() <= 1e-12);

    sample.velocity = Eigen::Vector3d(0, -1, 0);
    CHECK(dvl_residual(sample, yawed, Eigen::Vector3d(1, 0, 0), Eigen::Vector3d::Zero(),
                       Pose::identity())
              .norm() <= 1e-12);

    sample.velocity = Eigen::Vector3d(1, 0, 0);
    const Eigen::Vector3d r = dvl_residual(sample, yawed, Eigen::Vector3d(1, 0, 0),
                                           Eigen::Vector3d::Zero(), Pose::identity());
    CHECK((r - Eigen::Vector3d(1, 1, 0)).norm() <= 1e-12);
}

TEST_CASE("dvl lever arm and axis masking") {
    const Pose mount(Rotation::identity(), Eigen::Vector3d(0.5, 0, 0));
    const Eigen::Vector3d omega(0, 0, 1);
    const Eigen::Vector3d predicted =
        dvl_predict_velocity(Pose::identity(), Eigen::Vector3d::Zero(), omega, mount);
    CHECK((predicted - Eigen::Vector3d(0, 0.5, 0)).norm() <= 1e-12);

    DvlSample sample;
    sample.velocity = Eigen::Vector3d(3, 4, 5);
    sample.valid = {true, false, true};
    const Eigen::Vector3d r = dvl_residual(sample, Pose::identity(), Eigen::Vector3d::Zero(),
                                           Eigen::Vector3d::Zero(), Pose::identity());
    CHECK(r.x() == doctest::Approx(3.0));
    CHECK(r.y() == doctest::Approx(0.0));
    CHECK(r.z() == doctest::Approx(5.0));
}

TEST_CASE("dvl residual is invariant to rigid world moves") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> n(0.0, 1.0);

    const Pose body(Rotation::exp(Eigen::Vector3d(0.1, 0.4, -0.2)), Eigen::Vector3d(2, -1, 5));
    const Eigen::Vector3d v_world(0.8, -0.3, 0.1);
    const Eigen::Vector3d omega(0.05, -0.02, 0.3);
    const Pose mount(Rotation::exp(Eigen::Vector3d(0, 0.3, 0)), Eigen::Vector3d(0.2, 0, 0.1));
    DvlSample sample;
    sample.velocity = Eigen::Vector3d(0.7, -0.2, 0.05);

    const Eigen::Vector3d base = dvl_residual(sample, body, v_world, omega, mount);
    for (int i = 0; i < 100; ++i) {
        const Pose T(Rotation::exp(random_unit(rng) * n(rng)),
                     Eigen::Vector3d(n(rng), n(rng), n(rng)) * 10.0);
        const Eigen::Vector3d moved =
            dvl_residual(sample, T * body, T.rotation() * v_world, omega, mount);
        CHECK((moved - base).norm() <= 1e-9);
    }
}

TEST_CASE("depth residual examples") {
    DepthSample sample;
    sample.depth = 30.0;
    const Pose at30(Rotation::identity(), Eigen::Vector3d(7, -2, 30));
    CHECK(depth_residual(sample, at30) == doctest::Approx(0.0));

    sample.depth = 31.5;
    CHECK(depth_residual(sample, at30) == doctest::Approx(1.5));

    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int i = 0; i < 100; ++i) {
        const Pose yawed(Rotation::exp(Eigen::Vector3d(0, 0, u(rng))), at30.translation());
        CHECK(depth_residual(sample, yawed) == doctest::Approx(1.5));
    }

    // A sensor mounted below the body center reads deeper.
    sample.depth = 30.2;
    CHECK(depth_residual(sample, at30, Eigen::Vector3d(0, 0, 0.2)) == doctest::Approx(0.0));
}
