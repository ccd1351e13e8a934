#include "uslam/pipeline/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>

#include "uslam/geometry/triangulation.hpp"

namespace uslam {

namespace {

std::vector<Timestamp> keyframe_times(const std::vector<LogRecord>& log) {
    std::vector<Timestamp> times;
    for (const auto& rec : log) {
        if (const auto* frame = std::get_if<CameraFrame>(&rec)) times.push_back(frame->t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

const ImuSample* nearest_imu(const std::vector<ImuSample>& stream, Timestamp t) {
    if (stream.empty()) return nullptr;
    const auto it = std::lower_bound(
        stream.begin(), stream.end(), t,
        [](const ImuSample& s, Timestamp value) { return s.t < value; });
    if (it == stream.begin()) return &*it;
    if (it == stream.end()) return &stream.back();
    return std::llabs(it->t - t) < std::llabs((it - 1)->t - t) ? &*it : &*(it - 1);
}

// Forward propagation through the IMU batches, with velocity reset from DVL
// and vertical position reset from depth wherever those samples attach.
std::vector<NavState> dead_reckon(const std::vector<StateBundle>& bundles,
                                  const CalibrationFile& calib,
                                  const EstimatorOptions& options) {
    std::vector<NavState> states(bundles.size());

    NavState state;
    if (!bundles[0].dvl.empty()) {
        state.velocity_world =
            state.pose.rotation() *
            (calib.dvl_extrinsic.rotation() * bundles[0].dvl[0].velocity);
    }
    if (!bundles[0].depth.empty()) {
        state.pose = Pose(state.pose.rotation(),
                          Eigen::Vector3d(0.0, 0.0, bundles[0].depth[0].depth));
    }

    for (std::size_t i = 0; i < bundles.size(); ++i) {
        if (i > 0) {
            const auto& batch = bundles[i - 1].imu;
            if (!batch.empty()) {
                const PreintegratedImu delta =
                    preintegrate(batch, states[i - 1].bias, options.imu_noise);
                state = predict(states[i - 1], delta, options.gravity);
            } else {
                const double dt = to_seconds(bundles[i].t - bundles[i - 1].t);
                state = states[i - 1];
                state.pose = Pose(state.pose.rotation(),
                                  state.pose.translation() + dt * state.velocity_world);
            }
        }
        if (!bundles[i].dvl.empty()) {
            state.velocity_world =
                state.pose.rotation() *
                (calib.dvl_extrinsic.rotation() * bundles[i].dvl[0].velocity);
        }
        if (!bundles[i].depth.empty()) {
            Eigen::Vector3d p = state.pose.translation();
            p.z() = bundles[i].depth[0].depth -
                    (state.pose.rotation() * calib.depth_offset_body).z();
            state.pose = Pose(state.pose.rotation(), p);
        }
        states[i] = state;
    }
    return states;
}

std::vector<NavState> sample_override(const std::vector<TimedNavState>& override_states,
                                      const std::vector<Timestamp>& times) {
    if (override_states.empty()) throw InvalidSpec("initial state override is empty");
    std::vector<NavState> states;
    states.reserve(times.size());
    std::size_t j = 0;
    for (const Timestamp t : times) {
        while (j + 1 < override_states.size() &&
               std::llabs(override_states[j + 1].t - t) < std::llabs(override_states[j].t - t)) {
            ++j;
        }
        states.push_back(override_states[j].state);
    }
    return states;
}

struct TrackObservation {
    std::int64_t nav_index;
    int camera_id;
    Eigen::Vector2d pixel;
};

}  // namespace

EstimatorResult run_estimator(const std::vector<LogRecord>& log, const CalibrationFile& calib,
                              const EstimatorOptions& options,
                              const std::vector<TimedNavState>* initial_override) {
    if (calib.rig.cameras.empty()) throw InvalidSpec("calibration has no cameras");
    if (!options.use_camera && !options.use_imu && !options.use_dvl && !options.use_depth) {
        throw InvalidSpec("all sensors disabled");
    }
    if (options.use_camera && !options.use_imu && !options.use_dvl && !options.use_depth &&
        calib.rig.cameras.size() < 2) {
        throw InvalidSpec(
            "vision-only with a single camera has no metric scale; enable another sensor");
    }

    const std::vector<Timestamp> times = keyframe_times(log);
    if (times.size() < 2) {
        throw InvalidSpec("log contains " + std::to_string(times.size()) +
                          " camera keyframes, need at least 2");
    }

    EstimatorResult result;
    result.state_times = times;
    const std::vector<StateBundle> bundles =
        associate(log, times, options.association, &result.association);

    std::vector<ImuSample> imu_stream;
    for (const auto& rec : log) {
        if (const auto* s = std::get_if<ImuSample>(&rec)) imu_stream.push_back(*s);
    }

    const std::vector<NavState> init = initial_override
                                           ? sample_override(*initial_override, times)
                                           : dead_reckon(bundles, calib, options);

    FactorGraph graph;
    graph.set_rig(calib.rig);
    for (std::size_t i = 0; i < times.size(); ++i) {
        graph.values.insert_nav(static_cast<std::int64_t>(i), init[i]);
    }
    for (const auto& cam : calib.rig.cameras) {
        graph.values.insert_extrinsic(cam.camera_id, cam.extrinsic);
        graph.set_extrinsic_optimization(cam.camera_id, false);
    }
    graph.freeze(nav_key(0));

    const std::size_t n = times.size();
    std::vector<bool> bias_constrained(n, false), velocity_constrained(n, false);

    if (options.use_camera) {
        std::map<std::int64_t, std::vector<TrackObservation>> tracks;
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& frame : bundles[i].frames) {
                for (const auto& obs : frame.observations) {
                    tracks[obs.track_id].push_back(
                        {static_cast<std::int64_t>(i), frame.camera_id, obs.pixel});
                }
            }
        }
        for (const auto& [id, obs_list] : tracks) {
            if (static_cast<int>(obs_list.size()) < options.min_track_length) continue;

            // Noise can push logged pixels marginally outside the sensor, so
            // rays are built without the bounds check of pixel_to_ray.
            std::vector<WorldRay> rays;
            rays.reserve(obs_list.size());
            for (const auto& obs : obs_list) {
                const RigCamera& cam = calib.rig.camera(obs.camera_id);
                WorldRay ray;
                ray.ray.origin = cam.extrinsic.translation();
                ray.ray.direction =
                    cam.extrinsic.rotation() * pixel_to_bearing(cam.intrinsics, obs.pixel);
                ray.rig_pose = init[obs.nav_index].pose;
                rays.push_back(ray);
            }
            const auto depth_in_camera = [&](const Eigen::Vector3d& p, std::size_t k) {
                const Pose cam_to_world =
                    rays[k].rig_pose * calib.rig.camera(obs_list[k].camera_id).extrinsic;
                return (cam_to_world.inverse() * p).z();
            };
            const auto in_front_of_all = [&](const Eigen::Vector3d& p) {
                if (!p.allFinite()) return false;
                for (std::size_t k = 0; k < rays.size(); ++k) {
                    if (depth_in_camera(p, k) < 0.05) return false;
                }
                return true;
            };
            Eigen::Vector3d point;
            bool have_point = false;
            try {
                point = triangulate(rays);
                have_point = in_front_of_all(point);
            } catch (const DegenerateGeometry&) {
            }
            if (!have_point) {
                point = rays[0].rig_pose *
                        (rays[0].ray.origin +
                         options.fallback_point_depth * rays[0].ray.direction);
            }
            // The solver needs two live factors per landmark; an observation
            // whose camera starts behind the point would only get skipped.
            std::vector<std::size_t> usable;
            for (std::size_t k = 0; k < rays.size(); ++k) {
                if (depth_in_camera(point, k) > 1e-3) usable.push_back(k);
            }
            if (static_cast<int>(usable.size()) < options.min_track_length) continue;

            graph.values.insert_landmark(id, point);
            for (const std::size_t k : usable) {
                const auto& obs = obs_list[k];
                const RigCamera& cam = calib.rig.camera(obs.camera_id);
                auto factor = std::make_shared<ReprojectionFactor>(
                    obs.nav_index, id, obs.camera_id, cam.intrinsics, obs.pixel,
                    options.pixel_sigma);
                if (options.huber_delta > 0.0) factor->set_robust(options.huber_delta);
                graph.add(std::move(factor));
            }
        }
    }

    if (options.use_imu) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (bundles[i].imu.empty()) continue;
            const PreintegratedImu delta =
                preintegrate(bundles[i].imu, init[i].bias, options.imu_noise);
            graph.add(std::make_shared<ImuPreintegrationFactor>(
                static_cast<std::int64_t>(i), static_cast<std::int64_t>(i + 1), delta,
                options.gravity, options.imu_noise));
            bias_constrained[i] = bias_constrained[i + 1] = true;
            velocity_constrained[i] = velocity_constrained[i + 1] = true;
        }
    }

    if (options.use_dvl) {
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& sample : bundles[i].dvl) {
                const ImuSample* gyro = nearest_imu(imu_stream, sample.t);
                graph.add(std::make_shared<DvlFactor>(
                    static_cast<std::int64_t>(i), sample,
                    gyro ? gyro->gyro : Eigen::Vector3d::Zero(), calib.dvl_extrinsic,
                    options.dvl_sigma));
                velocity_constrained[i] = true;
            }
        }
    }

    if (options.use_depth) {
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& sample : bundles[i].depth) {
                graph.add(std::make_shared<DepthFactor>(static_cast<std::int64_t>(i), sample,
                                                        options.depth_sigma,
                                                        calib.depth_offset_body));
            }
        }
    }

    // Anchor blocks nothing above constrains, so the system stays full rank.
    for (std::size_t i = 1; i < n; ++i) {
        if (!bias_constrained[i]) {
            graph.add(std::make_shared<BiasPriorFactor>(static_cast<std::int64_t>(i), ImuBias{},
                                                        1e-3));
        }
        if (!velocity_constrained[i]) {
            graph.add(std::make_shared<VelocityPriorFactor>(static_cast<std::int64_t>(i),
                                                            init[i].velocity_world, 1.0));
        }
    }

    if (options.optimize_extrinsics) {
        for (const auto& cam : calib.rig.cameras) {
            graph.set_extrinsic_optimization(cam.camera_id, true,
                                             options.extrinsic_prior_sigma_t,
                                             options.extrinsic_prior_sigma_r);
        }
    }

    result.report = solve(graph, options.solve);

    result.trajectory.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        TimedPose tp;
        tp.t = times[i];
        tp.pose = result.report.estimates.nav(static_cast<std::int64_t>(i)).pose;
        result.trajectory.push_back(tp);
    }
    result.landmarks = result.report.estimates.landmarks();
    return result;
}

}  // namespace uslam
