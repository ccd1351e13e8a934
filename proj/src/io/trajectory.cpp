#include "uslam/io/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace uslam {

void write_trajectory(const std::vector<TimedPose>& poses, std::ostream& out) {
    Timestamp prev = std::numeric_limits<Timestamp>::min();
    char line[256];
    for (const auto& tp : poses) {
        if (tp.t <= prev) {
            throw NonMonotonicTimestamps("trajectory times must strictly increase");
        }
        prev = tp.t;
        const Eigen::Vector3d& p = tp.pose.translation();
        const Eigen::Quaterniond q = tp.pose.rotation().quaternion();
        std::snprintf(line, sizeof(line), "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                      to_seconds(tp.t), p.x(), p.y(), p.z(), q.x(), q.y(), q.z(), q.w());
        out << line;
    }
}

std::vector<TimedPose> read_trajectory(std::istream& in) {
    std::vector<TimedPose> poses;
    std::string line;
    int line_no = 0;
    Timestamp prev = std::numeric_limits<Timestamp>::min();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        double t, x, y, z, qx, qy, qz, qw;
        if (!(fields >> t >> x >> y >> z >> qx >> qy >> qz >> qw)) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 8 numeric fields");
        }
        const double qnorm = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
        if (std::abs(qnorm - 1.0) > 1e-6) {
            throw ParseError("line " + std::to_string(line_no) + ": quaternion norm " +
                             std::to_string(qnorm));
        }
        TimedPose tp;
        tp.t = to_nanoseconds(t);
        if (tp.t <= prev) {
            throw NonMonotonicTimestamps("line " + std::to_string(line_no) +
                                         ": timestamp does not increase");
        }
        prev = tp.t;
        tp.pose = Pose(Rotation(Eigen::Quaterniond(qw, qx, qy, qz).normalized()),
                       Eigen::Vector3d(x, y, z));
        poses.push_back(tp);
    }
    return poses;
}

void save_trajectory(const std::filesystem::path& path, const std::vector<TimedPose>& poses) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    write_trajectory(poses, out);
}

std::vector<TimedPose> load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_trajectory(in);
}

}  // namespace uslam
