#pragma once

#include <iosfwd>
#include <string>

#include "parajulia/sampler.hpp"

namespace parajulia {

/// Binary layout, little-endian: 8-byte magic "PDCLOUD1", uint64 count,
/// then count pairs of IEEE-754 doubles (re, im).
void write_cloud_binary(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_binary(std::istream& in);

/// CSV with header `re,im`; values in shortest round-trip form.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_csv(std::istream& in);

void save_cloud(const std::string& path, const PointCloud& cloud);
/// Reads binary when the file starts with the magic, CSV otherwise.
PointCloud load_cloud(const std::string& path);

} // namespace parajulia
