#include "uslam/io/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace uslam {
namespace {

using nlohmann::ordered_json;

Eigen::Vector2d parse_vec2(const ordered_json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) {
        throw SchemaError(std::string(what) + " must be a 2-element array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::Vector3d parse_vec3(const ordered_json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw SchemaError(std::string(what) + " must be a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

SurveySpec parse_survey(const ordered_json& j) {
    SurveySpec spec;
    spec.speed = j.value("speed", spec.speed);
    spec.duration = j.value("duration", spec.duration);
    spec.sigma_roll_pitch = j.value("sigma_roll_pitch", spec.sigma_roll_pitch);
    if (!j.contains("pattern") || !j["pattern"].is_object() ||
        !j["pattern"].contains("type")) {
        throw SchemaError("survey needs a pattern object with a type");
    }
    const auto& jp = j["pattern"];
    const std::string type = jp["type"].get<std::string>();
    if (type == "concentric_circles") {
        ConcentricCirclesSpec c;
        if (jp.contains("center")) c.center = parse_vec2(jp["center"], "circle center");
        if (jp.contains("radii")) {
            c.radii.clear();
            for (const auto& r : jp["radii"]) c.radii.push_back(r.get<double>());
        }
        c.depth_start = jp.value("depth_start", c.depth_start);
        c.depth_end = jp.value("depth_end", c.depth_end);
        c.transition_s = jp.value("transition_s", c.transition_s);
        spec.pattern = c;
    } else if (type == "lawnmower") {
        LawnmowerSpec m;
        if (jp.contains("origin")) m.origin = parse_vec2(jp["origin"], "lawnmower origin");
        m.lane_length = jp.value("lane_length", m.lane_length);
        m.spacing = jp.value("spacing", m.spacing);
        m.lanes = jp.value("lanes", m.lanes);
        m.depth = jp.value("depth", m.depth);
        spec.pattern = m;
    } else if (type == "return_loop") {
        ReturnLoopSpec rl;
        if (!jp.contains("waypoints") || !jp["waypoints"].is_array()) {
            throw SchemaError("return loop needs a waypoints array");
        }
        for (const auto& w : jp["waypoints"]) {
            rl.waypoints.push_back(parse_vec2(w, "waypoint"));
        }
        rl.depth = jp.value("depth", rl.depth);
        rl.turn_radius = jp.value("turn_radius", rl.turn_radius);
        spec.pattern = rl;
    } else {
        throw SchemaError("unknown survey pattern type \"" + type + "\"");
    }
    return spec;
}

WorldSpec parse_world(const ordered_json& j) {
    WorldSpec spec;
    if (!j.contains("clusters") || !j["clusters"].is_array()) {
        throw SchemaError("world needs a clusters array");
    }
    for (const auto& jc : j["clusters"]) {
        LandmarkCluster c;
        const std::string shape = jc.value("shape", std::string("box"));
        if (shape == "box") {
            c.shape = LandmarkCluster::Shape::Box;
        } else if (shape == "tube") {
            c.shape = LandmarkCluster::Shape::Tube;
        } else {
            throw SchemaError("unknown cluster shape \"" + shape + "\"");
        }
        if (jc.contains("center")) c.center = parse_vec3(jc["center"], "cluster center");
        if (jc.contains("size")) c.size = parse_vec3(jc["size"], "cluster size");
        c.count = jc.value("count", c.count);
        c.density_per_m2 = jc.value("density_per_m2", c.density_per_m2);
        c.semantic_class = static_cast<std::uint8_t>(jc.value("class", 0));
        spec.clusters.push_back(c);
    }
    return spec;
}

SimConfig parse_config(const ordered_json& j) {
    SimConfig config;
    if (j.contains("rates")) {
        const auto& jr = j["rates"];
        config.rates.camera_hz = jr.value("camera_hz", config.rates.camera_hz);
        config.rates.imu_hz = jr.value("imu_hz", config.rates.imu_hz);
        config.rates.dvl_hz = jr.value("dvl_hz", config.rates.dvl_hz);
        config.rates.depth_hz = jr.value("depth_hz", config.rates.depth_hz);
    }
    if (j.contains("noise")) {
        const auto& jn = j["noise"];
        auto& n = config.noise;
        n.pixel_sigma = jn.value("pixel_sigma", n.pixel_sigma);
        n.dvl_sigma = jn.value("dvl_sigma", n.dvl_sigma);
        n.depth_sigma = jn.value("depth_sigma", n.depth_sigma);
        n.imu.gyro_noise_density = jn.value("gyro_noise_density", n.imu.gyro_noise_density);
        n.imu.accel_noise_density = jn.value("accel_noise_density", n.imu.accel_noise_density);
        n.imu.gyro_bias_random_walk =
            jn.value("gyro_bias_random_walk", n.imu.gyro_bias_random_walk);
        n.imu.accel_bias_random_walk =
            jn.value("accel_bias_random_walk", n.imu.accel_bias_random_walk);
        n.bias_random_walk = jn.value("bias_random_walk", n.bias_random_walk);
    }
    if (j.contains("blackouts")) {
        for (const auto& jb : j["blackouts"]) {
            Blackout b;
            b.start_s = jb.value("start_s", 0.0);
            b.end_s = jb.value("end_s", 0.0);
            b.recognition_p = jb.value("recognition_p", 1.0);
            config.degradation.blackouts.push_back(b);
        }
    }
    config.degradation.recognition_p =
        j.value("recognition_p", config.degradation.recognition_p);
    config.degradation.reobservation_gap_s =
        j.value("reobservation_gap_s", config.degradation.reobservation_gap_s);
    config.max_range_m = j.value("max_range_m", config.max_range_m);
    config.min_cam_depth_m = j.value("min_cam_depth_m", config.min_cam_depth_m);
    config.timestamp_jitter_s = j.value("timestamp_jitter_s", config.timestamp_jitter_s);
    return config;
}

}  // namespace

Scenario load_scenario(std::istream& in) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("scenario must be a JSON object");

    Scenario scenario;
    scenario.name = doc.value("name", std::string("unnamed"));
    if (!doc.contains("survey")) throw SchemaError("scenario needs a survey");
    scenario.survey = parse_survey(doc["survey"]);
    if (doc.contains("world")) {
        scenario.world = parse_world(doc["world"]);
    } else {
        // 120-landmark seabed patch under the origin.
        LandmarkCluster cluster;
        cluster.center = Eigen::Vector3d(0.0, 0.0, 10.0);
        cluster.size = Eigen::Vector3d(14.0, 14.0, 0.5);
        cluster.count = 120;
        scenario.world.clusters.push_back(cluster);
    }
    if (doc.contains("config")) scenario.config = parse_config(doc["config"]);
    const auto seed = doc.value("seed", std::uint64_t{0});
    scenario.survey.seed = seed;
    scenario.config.seed = seed;
    if (doc.contains("calibration")) {
        std::stringstream calib_stream(doc["calibration"].dump());
        scenario.calibration = load_calibration(calib_stream);
    }
    return scenario;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    return load_scenario(in);
}

CalibrationFile default_calibration() {
    CalibrationFile calib;
    RigCamera cam;
    cam.camera_id = 0;
    cam.intrinsics.fx = cam.intrinsics.fy = 920.3;
    cam.intrinsics.cx = 800.0;
    cam.intrinsics.cy = 600.0;
    cam.intrinsics.width = 1600;
    cam.intrinsics.height = 1200;
    cam.extrinsic = tilted_camera_extrinsic(0.5 * M_PI);
    calib.rig.cameras.push_back(cam);
    return calib;
}

}  // namespace uslam
