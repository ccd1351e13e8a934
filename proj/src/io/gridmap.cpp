#include "uslam/io/gridmap.hpp"

#include <cstring>
#include <fstream>
#include <string>

namespace uslam {
namespace {

void write_header(const char* type, int width, int height, std::ostream& out) {
    out << "uslam-grid v1\n"
        << "type " << type << "\n"
        << "width " << width << "\n"
        << "height " << height << "\n"
        << "data\n";
}

struct GridHeader {
    std::string type;
    int width = 0;
    int height = 0;
};

GridHeader read_header(std::istream& in) {
    auto next_line = [&in](const char* what) {
        std::string line;
        if (!std::getline(in, line)) throw ParseError(std::string("grid truncated before ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next_line("magic") != "uslam-grid v1") throw ParseError("not a uslam-grid v1 file");
    GridHeader h;
    const std::string type_line = next_line("type");
    if (type_line.rfind("type ", 0) != 0) throw ParseError("grid missing type line");
    h.type = type_line.substr(5);
    const std::string width_line = next_line("width");
    const std::string height_line = next_line("height");
    try {
        if (width_line.rfind("width ", 0) != 0 || height_line.rfind("height ", 0) != 0) {
            throw std::invalid_argument("");
        }
        h.width = std::stoi(width_line.substr(6));
        h.height = std::stoi(height_line.substr(7));
    } catch (const std::exception&) {
        throw ParseError("grid dimensions malformed");
    }
    if (h.width <= 0 || h.height <= 0) throw ParseError("grid dimensions must be positive");
    if (next_line("data") != "data") throw ParseError("grid missing data line");
    return h;
}

}  // namespace

void write_depth_map(const DepthMap& map, std::ostream& out) {
    write_header("depth", map.width, map.height, out);
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(map.values.data()),
              static_cast<std::streamsize>(map.values.size() * sizeof(float)));
}

DepthMap read_depth_map(std::istream& in) {
    const GridHeader h = read_header(in);
    if (h.type != "depth") throw ParseError("expected a depth grid, got " + h.type);
    DepthMap map;
    map.width = h.width;
    map.height = h.height;
    map.values.resize(static_cast<std::size_t>(h.width) * h.height);
    in.read(reinterpret_cast<char*>(map.values.data()),
            static_cast<std::streamsize>(map.values.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != map.values.size() * sizeof(float)) {
        throw ParseError("depth grid data truncated");
    }
    return map;
}

void write_label_map(const LabelMap& map, std::ostream& out) {
    write_header("label", map.width, map.height, out);
    out.write(reinterpret_cast<const char*>(map.values.data()),
              static_cast<std::streamsize>(map.values.size()));
}

LabelMap read_label_map(std::istream& in) {
    const GridHeader h = read_header(in);
    if (h.type != "label") throw ParseError("expected a label grid, got " + h.type);
    LabelMap map;
    map.width = h.width;
    map.height = h.height;
    map.values.resize(static_cast<std::size_t>(h.width) * h.height);
    in.read(reinterpret_cast<char*>(map.values.data()),
            static_cast<std::streamsize>(map.values.size()));
    if (static_cast<std::size_t>(in.gcount()) != map.values.size()) {
        throw ParseError("label grid data truncated");
    }
    return map;
}

void save_depth_map(const std::filesystem::path& path, const DepthMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    write_depth_map(map, out);
}

DepthMap load_depth_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_depth_map(in);
}

void save_label_map(const std::filesystem::path& path, const LabelMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    write_label_map(map, out);
}

LabelMap load_label_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_label_map(in);
}

}  // namespace uslam
