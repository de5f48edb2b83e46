#pragma once

#include <cstddef>

#include "c2f/geometry.hpp"

namespace c2f {

// One cell of the coarse orientation grid attached to a grasp point. The
// field order is the serialized channel order.
struct C2FCell {
  double confidence = 0.0;
  double dx = 0.0;  // normalized translation along the approach axis
  double dy = 0.0;  // along the closing axis
  double dz = 0.0;  // along the height axis
  double d_ry = 0.0;  // fractional pitch bin residual
  double d_rz = 0.0;  // fractional yaw bin residual
  double theta_cos = 0.0;  // cos(2 rx)
  double theta_sin = 0.0;  // sin(2 rx)
};

inline constexpr int kCellChannels = 8;

double cell_channel(const C2FCell& c, int channel);
double& cell_channel(C2FCell& c, int channel);

// Grid of n_y * n_z cells, row-major in i (pitch bin), then j (yaw bin).
struct C2FVolume {
  Eigen::Vector3d grasp_point = Eigen::Vector3d::Zero();
  int n_y = 24;
  int n_z = 25;
  std::vector<C2FCell> cells;

  C2FVolume() : cells(static_cast<std::size_t>(n_y) * n_z) {}
  C2FVolume(const Eigen::Vector3d& point, int ny, int nz);

  C2FCell& at(int i, int j);
  const C2FCell& at(int i, int j) const;
};

// Bin decode helpers, shared with the loss kernels.
double pitch_from_bin(int i, double d_ry, int n_y);
double yaw_from_bin(int j, double d_rz, int n_z);
// Roll recovered from the doubled-angle pair, in [-pi/2, pi/2). Throws when
// both components are near zero.
double roll_from_theta(double theta_cos, double theta_sin);

struct QuantizedOrientation {
  int i = 0;
  int j = 0;
  double d_ry = 0.0;
  double d_rz = 0.0;
};

// Bins ry in [-pi/2, pi/2] into n_y intervals and rz in [-pi, pi) into n_z
// intervals. Residuals lie in [0, 1); d_ry reaches 1 only at the clamped
// upper boundary ry = pi/2.
QuantizedOrientation quantize_orientation(double ry, double rz, int n_y,
                                          int n_z);

struct PositiveCell {
  int point_index = 0;
  int i = 0;
  int j = 0;
  int gt_index = 0;  // index into the label set that produced the cell
};

struct TargetSet {
  std::vector<C2FVolume> volumes;  // one per grasp point, same order
  std::vector<PositiveCell> positives;  // sorted by (point_index, i, j)
};

// Rebuilds the full pose stored in one cell. Throws InvalidArgumentError on
// out-of-range indices or a zero theta pair.
GraspPose decode_cell(const C2FVolume& volume, int i, int j,
                      const GripperGeometry& gripper);

// Builds regression targets for a set of grasp points from good ground-truth
// grasps. A grasp is assigned to every point its closing region encloses;
// collisions on one cell keep the grasp with the smallest orientation
// residual.
TargetSet encode_labels(const std::vector<Eigen::Vector3d>& grasp_points,
                        const GraspLabelSet& gt, const GripperGeometry& gripper,
                        int n_y = 24, int n_z = 25);

struct DecodedVolume {
  std::vector<GraspPose> poses;  // confidence descending
  std::size_t degenerate_cells = 0;  // cells skipped for a zero theta pair
};

// Decodes every cell at or above conf_threshold, ordered by confidence
// descending with ties broken by (point index, i, j).
DecodedVolume decode_volume(const std::vector<C2FVolume>& volumes,
                            const GripperGeometry& gripper,
                            double conf_threshold);

}  // namespace c2f
