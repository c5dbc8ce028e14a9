#include "parajulia/cloud_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "parajulia/error.hpp"

namespace parajulia {

namespace {

constexpr char kMagic[8] = {'P', 'D', 'C', 'L', 'O', 'U', 'D', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw Error(ErrorCode::IoError, "truncated cloud file");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

} // namespace

void write_cloud_binary(std::ostream& out, const PointCloud& cloud) {
    out.write(kMagic, 8);
    put_u64(out, cloud.points.size());
    for (const Complex& z : cloud.points) {
        put_u64(out, std::bit_cast<std::uint64_t>(z.real()));
        put_u64(out, std::bit_cast<std::uint64_t>(z.imag()));
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing cloud");
    }
}

PointCloud read_cloud_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw Error(ErrorCode::ParseError, "missing PDCLOUD1 magic");
    }
    const std::uint64_t n = get_u64(in);
    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1U << 26)));
    for (std::uint64_t i = 0; i < n; ++i) {
        const double re = std::bit_cast<double>(get_u64(in));
        const double im = std::bit_cast<double>(get_u64(in));
        cloud.points.emplace_back(re, im);
    }
    return cloud;
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
    out << "re,im\n";
    for (const Complex& z : cloud.points) {
        out << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing cloud");
    }
}

PointCloud read_cloud_csv(std::istream& in) {
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line == "re,im")) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::ParseError, "expected re,im", static_cast<long>(line_no));
        }
        try {
            std::size_t used_re = 0, used_im = 0;
            const std::string re_text = line.substr(0, comma);
            const std::string im_text = line.substr(comma + 1);
            const double re = std::stod(re_text, &used_re);
            const double im = std::stod(im_text, &used_im);
            if (used_re != re_text.size() || used_im != im_text.size()) throw std::invalid_argument("trailing");
            cloud.points.emplace_back(re, im);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "bad number in cloud CSV", static_cast<long>(line_no));
        }
    }
    return cloud;
}

void save_cloud(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        write_cloud_csv(out, cloud);
    } else {
        write_cloud_binary(out, cloud);
    }
}

PointCloud load_cloud(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    char head[8] = {};
    in.read(head, 8);
    in.clear();
    in.seekg(0);
    if (std::memcmp(head, kMagic, 8) == 0) return read_cloud_binary(in);
    return read_cloud_csv(in);
}

} // namespace parajulia
