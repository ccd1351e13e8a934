#include "uslam/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uslam/sim/random.hpp"

namespace uslam {
namespace {

// Seed-stream tags; changing one resamples only that sensor.
constexpr std::uint64_t kStreamReassoc = 2;
constexpr std::uint64_t kStreamImuNoise = 10;
constexpr std::uint64_t kStreamDvlNoise = 11;
constexpr std::uint64_t kStreamDepthNoise = 12;
constexpr std::uint64_t kStreamPixelNoise = 13;
constexpr std::uint64_t kStreamBiasWalk = 14;
constexpr std::uint64_t kStreamJitter = 15;

constexpr std::int64_t kFreshTrackBase = 1'000'000;

struct BlackoutNs {
    Timestamp start = 0;
    Timestamp end = 0;
    double recognition_p = 1.0;
};

std::vector<BlackoutNs> validate_schedule(const DegradationSchedule& schedule,
                                          Timestamp duration_ns) {
    auto check_p = [](double p) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvalidSpec("recognition probability must be in [0, 1]");
        }
    };
    check_p(schedule.recognition_p);
    std::vector<BlackoutNs> out;
    for (const auto& b : schedule.blackouts) {
        check_p(b.recognition_p);
        BlackoutNs ns{to_nanoseconds(b.start_s), to_nanoseconds(b.end_s), b.recognition_p};
        if (ns.start < 0 || ns.end < ns.start || ns.end > duration_ns) {
            throw InvalidSpec("blackout interval outside the survey");
        }
        out.push_back(ns);
    }
    std::sort(out.begin(), out.end(),
              [](const BlackoutNs& a, const BlackoutNs& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].start < out[i - 1].end) throw InvalidSpec("blackout intervals overlap");
    }
    return out;
}

bool in_blackout(const std::vector<BlackoutNs>& blackouts, Timestamp t) {
    for (const auto& b : blackouts) {
        if (t >= b.start && t < b.end) return true;
    }
    return false;
}

// Jittered copy of a periodic grid; the half-width is capped below half the
// period so per-sensor order survives.
std::vector<Timestamp> jitter_times(const std::vector<Timestamp>& times, double rate_hz,
                                    double jitter_s, Timestamp duration_ns, RandomStream* rng) {
    if (jitter_s <= 0.0 || times.size() <= 1) return times;
    const double amp = std::min(jitter_s, 0.45 / rate_hz);
    std::vector<Timestamp> out;
    out.reserve(times.size());
    for (Timestamp t : times) {
        const double shift = (2.0 * rng->uniform() - 1.0) * amp;
        Timestamp tj = t + to_nanoseconds(shift);
        tj = std::clamp<Timestamp>(tj, 0, std::max<Timestamp>(duration_ns - 1, 0));
        out.push_back(tj);
    }
    return out;
}

}  // namespace

SimOutput synthesize_log(const SurveyTrajectory& traj, const World& world,
                         const CalibrationFile& calib, const SimConfig& config) {
    const auto& rates = config.rates;
    if (rates.camera_hz <= 0.0 || rates.imu_hz <= 0.0 || rates.dvl_hz <= 0.0 ||
        rates.depth_hz <= 0.0) {
        throw InvalidRates("sensor rates must be positive");
    }
    if (calib.rig.cameras.empty()) throw InvalidSpec("rig has no cameras");
    for (const auto& lm : world.landmarks) {
        if (lm.id < 0 || lm.id >= kFreshTrackBase) {
            throw InvalidSpec("landmark ids must stay below the fresh-track range");
        }
    }

    SimOutput sim;
    sim.world = world;
    sim.duration_ns = traj.duration_ns();
    const std::vector<BlackoutNs> blackouts =
        validate_schedule(config.degradation, sim.duration_ns);

    const Eigen::Vector3d gravity(0.0, 0.0, kGravityMagnitude);
    const SimNoise& noise = config.noise;

    // Truth on the IMU grid: rotations and velocities are analytic; positions
    // chain the trapezoid rule over the grid so that the emitted rates and
    // specific forces integrate to the truth states exactly.
    const std::vector<Timestamp> imu_times = traj.sample_times(rates.imu_hz);
    const std::size_t n = imu_times.size();
    auto grid_time = [&rates](std::size_t k) {
        return static_cast<Timestamp>(std::llround(static_cast<double>(k) * 1e9 / rates.imu_hz));
    };

    std::vector<TrajectorySample> samples(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        samples[j] = traj.at(j < n ? imu_times[j] : grid_time(n));
    }

    std::vector<Eigen::Vector3d> positions(n + 1);
    positions[0] = samples[0].pose.translation();
    for (std::size_t j = 0; j < n; ++j) {
        const double dt = to_seconds((j < n - 1 ? imu_times[j + 1] : grid_time(n)) - imu_times[j]);
        positions[j + 1] = positions[j] +
                           0.5 * dt * (samples[j].velocity_world + samples[j + 1].velocity_world);
    }

    RandomStream walk_rng(derive_seed(config.seed, kStreamBiasWalk));
    std::vector<ImuBias> biases(n);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        biases[j + 1] = biases[j];
        if (noise.bias_random_walk) {
            const double sdt = std::sqrt(to_seconds(imu_times[j + 1] - imu_times[j]));
            biases[j + 1].gyro += noise.imu.gyro_bias_random_walk * sdt * walk_rng.gaussian3();
            biases[j + 1].accel += noise.imu.accel_bias_random_walk * sdt * walk_rng.gaussian3();
        }
    }

    sim.truth.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        NavState state;
        state.pose = Pose(samples[j].pose.rotation(), positions[j]);
        state.velocity_world = samples[j].velocity_world;
        state.bias = biases[j];
        sim.truth.push_back({imu_times[j], state});
    }

    // IMU records: the discrete rate over each interval and the specific
    // force that reproduces the velocity difference, plus bias and white
    // noise at the sample rate.
    RandomStream imu_rng(derive_seed(config.seed, kStreamImuNoise));
    const double gyro_sigma = noise.imu.gyro_noise_density * std::sqrt(rates.imu_hz);
    const double accel_sigma = noise.imu.accel_noise_density * std::sqrt(rates.imu_hz);
    std::vector<LogRecord> records;
    records.reserve(n + 64);
    for (std::size_t j = 0; j < n; ++j) {
        const double dt = to_seconds((j < n - 1 ? imu_times[j + 1] : grid_time(n)) - imu_times[j]);
        const Rotation& R_j = samples[j].pose.rotation();
        ImuSample s;
        s.t = imu_times[j];
        s.gyro = (R_j.inverse() * samples[j + 1].pose.rotation()).log() / dt +
                 biases[j].gyro + gyro_sigma * imu_rng.gaussian3();
        s.accel = R_j.inverse() *
                      ((samples[j + 1].velocity_world - samples[j].velocity_world) / dt - gravity) +
                  biases[j].accel + accel_sigma * imu_rng.gaussian3();
        records.emplace_back(s);
    }

    // Truth pose off the IMU grid: analytic rotation, position by the partial
    // trapezoid step from the grid state just before t.
    auto pose_at = [&](Timestamp t, TrajectorySample* sample_out) {
        const TrajectorySample s = traj.at(t);
        auto it = std::upper_bound(imu_times.begin(), imu_times.end(), t);
        const std::size_t j = static_cast<std::size_t>(it - imu_times.begin()) - 1;
        Eigen::Vector3d p = positions[j];
        if (t != imu_times[j]) {
            const double dt = to_seconds(t - imu_times[j]);
            p += 0.5 * dt * (samples[j].velocity_world + s.velocity_world);
        }
        if (sample_out != nullptr) *sample_out = s;
        return Pose(s.pose.rotation(), p);
    };

    RandomStream jitter_rng(derive_seed(config.seed, kStreamJitter));
    const std::vector<Timestamp> cam_times =
        jitter_times(traj.sample_times(rates.camera_hz), rates.camera_hz,
                     config.timestamp_jitter_s, sim.duration_ns, &jitter_rng);
    const std::vector<Timestamp> dvl_times =
        jitter_times(traj.sample_times(rates.dvl_hz), rates.dvl_hz, config.timestamp_jitter_s,
                     sim.duration_ns, &jitter_rng);
    const std::vector<Timestamp> depth_times =
        jitter_times(traj.sample_times(rates.depth_hz), rates.depth_hz,
                     config.timestamp_jitter_s, sim.duration_ns, &jitter_rng);

    RandomStream dvl_rng(derive_seed(config.seed, kStreamDvlNoise));
    for (Timestamp t : dvl_times) {
        TrajectorySample s;
        const Pose body = pose_at(t, &s);
        DvlSample d;
        d.t = t;
        d.velocity = dvl_predict_velocity(body, s.velocity_world, s.omega_body,
                                          calib.dvl_extrinsic) +
                     noise.dvl_sigma * dvl_rng.gaussian3();
        records.emplace_back(d);
    }

    RandomStream depth_rng(derive_seed(config.seed, kStreamDepthNoise));
    for (Timestamp t : depth_times) {
        const Pose body = pose_at(t, nullptr);
        DepthSample d;
        d.t = t;
        d.depth = (body.translation() + body.rotation() * calib.depth_offset_body).z() +
                  noise.depth_sigma * depth_rng.gaussian();
        records.emplace_back(d);
    }

    // Camera frames with track management. A landmark coming back after at
    // least the re-observation gap triggers one recognition draw; the draw is
    // taken regardless of p so the noise realization does not depend on p.
    RandomStream px_rng(derive_seed(config.seed, kStreamPixelNoise));
    RandomStream reassoc_rng(derive_seed(config.seed, kStreamReassoc));
    const Timestamp gap_ns = to_nanoseconds(config.degradation.reobservation_gap_s);
    struct TrackState {
        std::int64_t track = -1;
        Timestamp last_seen = -1;
    };
    std::map<std::int64_t, TrackState> tracks;
    std::int64_t next_fresh = kFreshTrackBase;

    auto recognition_p_for = [&](Timestamp last_seen, Timestamp now) {
        double p = config.degradation.recognition_p;
        for (const auto& b : blackouts) {
            if (b.start >= last_seen && b.end <= now) p = b.recognition_p;
        }
        return p;
    };

    for (Timestamp t : cam_times) {
        if (in_blackout(blackouts, t)) continue;
        for (const auto& cam : calib.rig.cameras) {
            const Pose cam_to_world = pose_at(t, nullptr) * cam.extrinsic;
            const Pose world_to_cam = cam_to_world.inverse();
            CameraFrame frame;
            frame.t = t;
            frame.camera_id = cam.camera_id;
            for (const auto& lm : world.landmarks) {
                const Eigen::Vector3d x_cam = world_to_cam * lm.position;
                if (x_cam.z() < config.min_cam_depth_m) continue;
                if (x_cam.norm() > config.max_range_m) continue;
                const auto px = try_project(cam.intrinsics, x_cam);
                if (!px || !pixel_in_bounds(cam.intrinsics, *px)) continue;

                auto [it, fresh] = tracks.try_emplace(lm.id);
                TrackState& ts = it->second;
                if (fresh) {
                    ts.track = lm.id;
                    sim.track_to_landmark[ts.track] = lm.id;
                    sim.track_first_seen[ts.track] = t;
                } else if (t - ts.last_seen >= gap_ns) {
                    const double p = recognition_p_for(ts.last_seen, t);
                    const double u = reassoc_rng.uniform();
                    if (!(u < p)) {
                        ts.track = next_fresh++;
                        sim.track_to_landmark[ts.track] = lm.id;
                        sim.track_first_seen[ts.track] = t;
                    }
                }
                ts.last_seen = t;

                CameraObservation obs;
                obs.track_id = ts.track;
                obs.pixel = *px + noise.pixel_sigma *
                                      Eigen::Vector2d(px_rng.gaussian(), px_rng.gaussian());
                frame.observations.push_back(obs);
            }
            records.emplace_back(std::move(frame));
        }
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const LogRecord& a, const LogRecord& b) {
                         const Timestamp ta = record_time(a);
                         const Timestamp tb = record_time(b);
                         if (ta != tb) return ta < tb;
                         if (a.index() != b.index()) return a.index() < b.index();
                         if (const auto* fa = std::get_if<CameraFrame>(&a)) {
                             return fa->camera_id < std::get<CameraFrame>(b).camera_id;
                         }
                         return false;
                     });
    sim.log = std::move(records);
    return sim;
}

std::map<std::int64_t, std::int64_t> reassociation_oracle(const SimOutput& sim, Timestamp t) {
    std::map<std::int64_t, std::int64_t> out;
    for (const auto& [track, first_seen] : sim.track_first_seen) {
        if (first_seen <= t) out[track] = sim.track_to_landmark.at(track);
    }
    return out;
}

std::pair<DepthMap, LabelMap> render_oracle_maps(const World& world,
                                                 const CameraIntrinsics& intrinsics,
                                                 const Pose& camera_to_world, double max_range) {
    DepthMap depth;
    depth.width = intrinsics.width;
    depth.height = intrinsics.height;
    depth.values.assign(static_cast<std::size_t>(depth.width) * depth.height, 0.0f);
    LabelMap labels;
    labels.width = intrinsics.width;
    labels.height = intrinsics.height;
    labels.values.assign(depth.values.size(), 0);

    const Pose world_to_cam = camera_to_world.inverse();
    for (const auto& lm : world.landmarks) {
        const Eigen::Vector3d x_cam = world_to_cam * lm.position;
        if (x_cam.z() <= 1e-6 || x_cam.norm() > max_range) continue;
        const auto px = try_project(intrinsics, x_cam);
        if (!px) continue;
        const int u = static_cast<int>(std::llround(px->x()));
        const int v = static_cast<int>(std::llround(px->y()));
        if (u < 0 || u >= depth.width || v < 0 || v >= depth.height) continue;
        float& d = depth.at(u, v);
        if (d == 0.0f || x_cam.z() < d) {
            d = static_cast<float>(x_cam.z());
            labels.at(u, v) = lm.semantic_class;
        }
    }
    return {depth, labels};
}

}  // namespace uslam
