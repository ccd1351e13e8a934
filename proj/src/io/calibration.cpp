#include "uslam/io/calibration.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "uslam/common.hpp"

namespace uslam {
namespace {

using nlohmann::ordered_json;

Eigen::Vector3d parse_vec3(const ordered_json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw SchemaError(std::string(what) + " must be a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Rotation parse_rotation(const ordered_json& j) {
    if (j.contains("q")) {
        const auto& q = j["q"];
        if (!q.is_array() || q.size() != 4) {
            throw SchemaError("pose q must be [qw, qx, qy, qz]");
        }
        Eigen::Vector4d v(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                          q[3].get<double>());
        const double drift = std::abs(v.norm() - 1.0);
        if (drift > 1e-3) throw NonOrthonormalRotation("quaternion norm off by " + std::to_string(drift));
        if (drift > 1e-6) v.normalize();
        return Rotation(v[0], v[1], v[2], v[3]);
    }
    if (j.contains("R")) {
        const auto& r = j["R"];
        if (!r.is_array() || r.size() != 9) throw SchemaError("pose R must be 9 row-major values");
        Eigen::Matrix3d R;
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) R(i, k) = r[3 * i + k].get<double>();
        }
        const double drift =
            (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
        if (drift > 1e-3) {
            throw NonOrthonormalRotation("rotation orthonormality drift " + std::to_string(drift));
        }
        if (drift > 1e-6) {
            const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
                R, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Eigen::Matrix3d fixed = svd.matrixU() * svd.matrixV().transpose();
            if (fixed.determinant() < 0.0) {
                fixed = svd.matrixU() * Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal() *
                        svd.matrixV().transpose();
            }
            R = fixed;
        }
        return Rotation(R);
    }
    throw SchemaError("pose needs q or R");
}

Pose parse_pose(const ordered_json& j) {
    if (!j.is_object()) throw SchemaError("pose must be an object");
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    if (j.contains("t")) t = parse_vec3(j["t"], "pose t");
    return Pose(parse_rotation(j), t);
}

ordered_json pose_json(const Pose& pose) {
    const Eigen::Quaterniond q = pose.rotation().quaternion();
    ordered_json j;
    j["q"] = {q.w(), q.x(), q.y(), q.z()};
    j["t"] = {pose.translation().x(), pose.translation().y(), pose.translation().z()};
    return j;
}

double require_number(const ordered_json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw SchemaError(std::string("camera missing numeric field ") + key);
    }
    return j[key].get<double>();
}

}  // namespace

CalibrationFile load_calibration(std::istream& in) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("calibration is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array() ||
        doc["cameras"].empty()) {
        throw SchemaError("calibration needs a non-empty cameras array");
    }

    CalibrationFile calib;
    std::set<int> seen_ids;
    for (const auto& jc : doc["cameras"]) {
        RigCamera cam;
        if (!jc.contains("camera_id") || !jc["camera_id"].is_number_integer()) {
            throw SchemaError("camera missing integer camera_id");
        }
        cam.camera_id = jc["camera_id"].get<int>();
        if (!seen_ids.insert(cam.camera_id).second) {
            throw SchemaError("duplicate camera_id " + std::to_string(cam.camera_id));
        }
        cam.intrinsics.fx = require_number(jc, "fx");
        cam.intrinsics.fy = require_number(jc, "fy");
        cam.intrinsics.cx = require_number(jc, "cx");
        cam.intrinsics.cy = require_number(jc, "cy");
        cam.intrinsics.width = static_cast<int>(require_number(jc, "width"));
        cam.intrinsics.height = static_cast<int>(require_number(jc, "height"));
        cam.intrinsics.k1 = jc.value("k1", 0.0);
        cam.intrinsics.k2 = jc.value("k2", 0.0);
        if (!cam.intrinsics.valid()) {
            throw SchemaError("camera " + std::to_string(cam.camera_id) + " intrinsics invalid");
        }
        if (!jc.contains("extrinsic")) throw SchemaError("camera missing extrinsic");
        cam.extrinsic = parse_pose(jc["extrinsic"]);
        calib.rig.cameras.push_back(cam);
    }
    if (doc.contains("dvl_extrinsic")) calib.dvl_extrinsic = parse_pose(doc["dvl_extrinsic"]);
    if (doc.contains("imu_extrinsic")) calib.imu_extrinsic = parse_pose(doc["imu_extrinsic"]);
    if (doc.contains("depth_offset")) {
        calib.depth_offset_body = parse_vec3(doc["depth_offset"], "depth_offset");
    }
    return calib;
}

CalibrationFile load_calibration_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    return load_calibration(in);
}

void write_calibration(const CalibrationFile& calib, std::ostream& out) {
    ordered_json doc;
    doc["cameras"] = ordered_json::array();
    for (const auto& cam : calib.rig.cameras) {
        ordered_json jc;
        jc["camera_id"] = cam.camera_id;
        jc["fx"] = cam.intrinsics.fx;
        jc["fy"] = cam.intrinsics.fy;
        jc["cx"] = cam.intrinsics.cx;
        jc["cy"] = cam.intrinsics.cy;
        jc["width"] = cam.intrinsics.width;
        jc["height"] = cam.intrinsics.height;
        jc["k1"] = cam.intrinsics.k1;
        jc["k2"] = cam.intrinsics.k2;
        jc["extrinsic"] = pose_json(cam.extrinsic);
        doc["cameras"].push_back(std::move(jc));
    }
    doc["dvl_extrinsic"] = pose_json(calib.dvl_extrinsic);
    doc["imu_extrinsic"] = pose_json(calib.imu_extrinsic);
    doc["depth_offset"] = {calib.depth_offset_body.x(), calib.depth_offset_body.y(),
                           calib.depth_offset_body.z()};
    out << doc.dump(2) << '\n';
}

void save_calibration(const std::filesystem::path& path, const CalibrationFile& calib) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot open " + path.string() + " for writing");
    write_calibration(calib, out);
}

Pose tilted_camera_extrinsic(double tilt, const Eigen::Vector3d& translation) {
    const double c = std::cos(tilt);
    const double s = std::sin(tilt);
    Eigen::Matrix3d R;
    // Columns: camera x (image right), y (image down), z (optical axis) in
    // the body frame.
    R.col(0) = Eigen::Vector3d(0.0, 1.0, 0.0);
    R.col(1) = Eigen::Vector3d(-s, 0.0, c);
    R.col(2) = Eigen::Vector3d(c, 0.0, s);
    return Pose(Rotation(R), translation);
}

}  // namespace uslam
