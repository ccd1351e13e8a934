#include "uslam/io/log.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

namespace uslam {
namespace {

using nlohmann::ordered_json;

constexpr const char* kHeader = "# uslam-log v1";

ordered_json vec3(const Eigen::Vector3d& v) { return ordered_json{v.x(), v.y(), v.z()}; }

Eigen::Vector3d parse_vec3(const ordered_json& j) {
    if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

struct TimeOf {
    Timestamp operator()(const ImuSample& s) const { return s.t; }
    Timestamp operator()(const DvlSample& s) const { return s.t; }
    Timestamp operator()(const DepthSample& s) const { return s.t; }
    Timestamp operator()(const CameraFrame& s) const { return s.t; }
};

ordered_json to_json(const LogRecord& record) {
    ordered_json j;
    j["t"] = record_time(record);
    if (const auto* imu = std::get_if<ImuSample>(&record)) {
        j["type"] = "imu";
        j["gyro"] = vec3(imu->gyro);
        j["accel"] = vec3(imu->accel);
    } else if (const auto* dvl = std::get_if<DvlSample>(&record)) {
        j["type"] = "dvl";
        j["velocity"] = vec3(dvl->velocity);
        j["valid"] = ordered_json{dvl->valid[0], dvl->valid[1], dvl->valid[2]};
    } else if (const auto* depth = std::get_if<DepthSample>(&record)) {
        j["type"] = "depth";
        j["depth"] = depth->depth;
    } else {
        const auto& frame = std::get<CameraFrame>(record);
        j["type"] = "camera";
        j["camera_id"] = frame.camera_id;
        ordered_json obs = ordered_json::array();
        for (const auto& o : frame.observations) {
            obs.push_back(ordered_json{o.track_id, o.pixel.x(), o.pixel.y()});
        }
        j["obs"] = std::move(obs);
    }
    return j;
}

LogRecord from_json(const ordered_json& j) {
    const Timestamp t = j.at("t").get<Timestamp>();
    const std::string type = j.at("type").get<std::string>();
    if (type == "imu") {
        ImuSample s;
        s.t = t;
        s.gyro = parse_vec3(j.at("gyro"));
        s.accel = parse_vec3(j.at("accel"));
        return s;
    }
    if (type == "dvl") {
        DvlSample s;
        s.t = t;
        s.velocity = parse_vec3(j.at("velocity"));
        const auto& valid = j.at("valid");
        if (!valid.is_array() || valid.size() != 3) {
            throw std::runtime_error("expected 3-element valid array");
        }
        for (int k = 0; k < 3; ++k) s.valid[k] = valid[k].get<bool>();
        return s;
    }
    if (type == "depth") {
        DepthSample s;
        s.t = t;
        s.depth = j.at("depth").get<double>();
        return s;
    }
    if (type == "camera") {
        CameraFrame f;
        f.t = t;
        f.camera_id = j.at("camera_id").get<int>();
        for (const auto& o : j.at("obs")) {
            if (!o.is_array() || o.size() != 3) {
                throw std::runtime_error("expected [track_id, u, v] observation");
            }
            f.observations.push_back(
                {o[0].get<std::int64_t>(), {o[1].get<double>(), o[2].get<double>()}});
        }
        return f;
    }
    throw std::runtime_error("unknown record type \"" + type + "\"");
}

}  // namespace

Timestamp record_time(const LogRecord& record) { return std::visit(TimeOf{}, record); }

void write_log(const std::vector<LogRecord>& records, std::ostream& out) {
    out << kHeader << '\n';
    Timestamp prev = 0;
    for (const auto& record : records) {
        const Timestamp t = record_time(record);
        if (t < prev) {
            throw NonMonotonicTimestamps("log records out of order or negative at t=" +
                                         std::to_string(t));
        }
        prev = t;
        out << to_json(record).dump() << '\n';
    }
}

std::vector<LogRecord> read_log(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty log stream");
    ++line_no;
    if (line == kHeader + std::string("\r")) line.pop_back();
    if (line != kHeader) throw ParseError("line 1: expected header \"" + std::string(kHeader) + "\"");

    std::vector<LogRecord> records;
    Timestamp prev = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        LogRecord record;
        try {
            record = from_json(ordered_json::parse(line));
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        const Timestamp t = record_time(record);
        if (t < 0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative timestamp");
        }
        if (t < prev) {
            throw NonMonotonicTimestamps("line " + std::to_string(line_no) +
                                         ": timestamp decreases");
        }
        prev = t;
        records.push_back(std::move(record));
    }
    return records;
}

void save_log(const std::filesystem::path& path, const std::vector<LogRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    write_log(records, out);
}

std::vector<LogRecord> load_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_log(in);
}

}  // namespace uslam
