#pragma once

#include <iosfwd>
#include <string>

#include "c2f/codec.hpp"

namespace c2f {

// ASCII PLY point clouds. Binary PLY files are rejected. Vertex properties
// x, y, z are required; nx, ny, nz are loaded when present and re-normalized.
// Unknown properties and elements are skipped.
PointCloud read_ply(std::istream& in);
PointCloud read_ply(const std::string& path);
void write_ply(const PointCloud& cloud, std::ostream& out);
void write_ply(const PointCloud& cloud, const std::string& path);

// Grasp text format: one grasp per line,
//   x y z rx ry rz quality [confidence]
// with '#' comments and blank lines skipped. quality is "good" or "bad",
// confidence defaults to 1. Angles are canonicalized on load; floats are
// written with 17 significant digits so a rewrite is byte identical.
GraspLabelSet read_grasps(std::istream& in);
GraspLabelSet read_grasps(const std::string& path);
void write_grasps(const GraspLabelSet& set, std::ostream& out);
void write_grasps(const GraspLabelSet& set, const std::string& path);

// Binary volume format, little endian: magic "C2FV", then uint32 version,
// num_points, n_y, n_z, channels (8), then num_points * 3 float32 grasp
// point coordinates, then num_points * n_y * n_z * 8 float32 cell channels.
inline constexpr std::uint32_t kVolumeFormatVersion = 1;

std::vector<C2FVolume> read_volumes(std::istream& in);
std::vector<C2FVolume> read_volumes(const std::string& path);
void write_volumes(const std::vector<C2FVolume>& volumes, std::ostream& out);
void write_volumes(const std::vector<C2FVolume>& volumes,
                   const std::string& path);

}  // namespace c2f
