#include "ospde/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ospde/errors.hpp"

namespace ospde {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::string field_csv(const SpaceTimeGrid& grid, const SpaceTimeField& field, const std::string& column) {
    if (field.nodes() != grid.nodes() || field.slices() != grid.time_steps() + 1) {
        throw ShapeError("field_csv: field does not live on the grid");
    }
    std::ostringstream out;
    out << "t,x";
    if (grid.dim() == 2) out << ",y";
    if (field.width() == 1) {
        out << ',' << column;
    } else {
        for (std::size_t c = 0; c < field.width(); ++c) out << ',' << column << c;
    }
    out << '\n';
    for (std::size_t k = 0; k < field.slices(); ++k) {
        const std::string t = format_number(grid.time(k));
        for (std::size_t n = 0; n < grid.nodes(); ++n) {
            const Point p = grid.point(n);
            out << t << ',' << format_number(p[0]);
            if (grid.dim() == 2) out << ',' << format_number(p[1]);
            for (std::size_t c = 0; c < field.width(); ++c) out << ',' << format_number(field.at(k, n, c));
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace ospde
