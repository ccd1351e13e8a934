#include "uslam/io/ply.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace uslam {
namespace {

void write_header(std::size_t count, bool binary, std::ostream& out) {
    out << "ply\n"
        << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
        << "element vertex " << count << "\n"
        << "property float x\n"
        << "property float y\n"
        << "property float z\n"
        << "property uchar red\n"
        << "property uchar green\n"
        << "property uchar blue\n"
        << "property uchar label\n"
        << "end_header\n";
}

}  // namespace

void export_ply(const LabeledPointCloud& cloud, bool binary, std::ostream& out) {
    for (const auto& pt : cloud.points) {
        if (!pt.position.allFinite()) {
            throw NonFinitePoint("point cloud contains a non-finite coordinate");
        }
    }
    write_header(cloud.points.size(), binary, out);
    if (binary) {
        static_assert(sizeof(float) == 4);
        for (const auto& pt : cloud.points) {
            const float xyz[3] = {static_cast<float>(pt.position.x()),
                                  static_cast<float>(pt.position.y()),
                                  static_cast<float>(pt.position.z())};
            char row[16];
            std::memcpy(row, xyz, 12);
            row[12] = static_cast<char>(pt.color[0]);
            row[13] = static_cast<char>(pt.color[1]);
            row[14] = static_cast<char>(pt.color[2]);
            row[15] = static_cast<char>(pt.class_id);
            out.write(row, sizeof(row));
        }
    } else {
        char line[128];
        for (const auto& pt : cloud.points) {
            std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %u %u %u %u\n",
                          static_cast<double>(static_cast<float>(pt.position.x())),
                          static_cast<double>(static_cast<float>(pt.position.y())),
                          static_cast<double>(static_cast<float>(pt.position.z())),
                          pt.color[0], pt.color[1], pt.color[2], pt.class_id);
            out << line;
        }
    }
}

void save_ply(const std::filesystem::path& path, const LabeledPointCloud& cloud, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    export_ply(cloud, binary, out);
}

}  // namespace uslam
