#include "c2f/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace c2f {

namespace {

void check_grid(int n_y, int n_z) {
  if (n_y < 1 || n_z < 1) {
    throw InvalidArgumentError("grid sizes must be positive");
  }
}

// Residual magnitudes used to settle a cell claimed by several grasps.
struct CellClaim {
  double rot = std::numeric_limits<double>::infinity();
  double trans = std::numeric_limits<double>::infinity();
  int gt_index = -1;

  bool beats(const CellClaim& other) const {
    if (rot != other.rot) return rot < other.rot;
    return trans < other.trans;
  }
};

}  // namespace

double cell_channel(const C2FCell& c, int channel) {
  return cell_channel(const_cast<C2FCell&>(c), channel);
}

double& cell_channel(C2FCell& c, int channel) {
  switch (channel) {
    case 0: return c.confidence;
    case 1: return c.dx;
    case 2: return c.dy;
    case 3: return c.dz;
    case 4: return c.d_ry;
    case 5: return c.d_rz;
    case 6: return c.theta_cos;
    case 7: return c.theta_sin;
    default: throw InvalidArgumentError("cell channel out of range");
  }
}

C2FVolume::C2FVolume(const Eigen::Vector3d& point, int ny, int nz)
    : grasp_point(point), n_y(ny), n_z(nz) {
  check_grid(ny, nz);
  cells.assign(static_cast<std::size_t>(ny) * nz, C2FCell{});
}

C2FCell& C2FVolume::at(int i, int j) {
  if (i < 0 || i >= n_y || j < 0 || j >= n_z) {
    throw InvalidArgumentError("cell index out of range");
  }
  return cells[static_cast<std::size_t>(i) * n_z + j];
}

const C2FCell& C2FVolume::at(int i, int j) const {
  return const_cast<C2FVolume*>(this)->at(i, j);
}

double pitch_from_bin(int i, double d_ry, int n_y) {
  return kPi / n_y * (i + d_ry) - kPi / 2.0;
}

double yaw_from_bin(int j, double d_rz, int n_z) {
  return 2.0 * kPi / n_z * (j + d_rz) - kPi;
}

double roll_from_theta(double theta_cos, double theta_sin) {
  if (theta_cos * theta_cos + theta_sin * theta_sin < 1e-18) {
    throw InvalidArgumentError("degenerate theta pair");
  }
  double rx = 0.5 * std::atan2(theta_sin, theta_cos);
  if (rx >= kPi / 2.0) rx -= kPi;
  return rx;
}

QuantizedOrientation quantize_orientation(double ry, double rz, int n_y,
                                          int n_z) {
  check_grid(n_y, n_z);
  if (!(ry >= -kPi / 2.0 && ry <= kPi / 2.0)) {
    throw InvalidArgumentError("ry outside [-pi/2, pi/2]");
  }
  if (!(rz >= -kPi && rz < kPi)) {
    throw InvalidArgumentError("rz outside [-pi, pi)");
  }
  const double u = (ry + kPi / 2.0) * n_y / kPi;
  // rz + pi can round up to exactly 2 pi at the top of the half-open yaw
  // range; the pitch range is closed, so only the yaw residual is clamped
  // below 1.
  const double v = std::min((rz + kPi) * n_z / (2.0 * kPi),
                            std::nextafter(static_cast<double>(n_z), 0.0));
  QuantizedOrientation q;
  q.i = std::min(static_cast<int>(std::floor(u)), n_y - 1);
  q.j = std::min(static_cast<int>(std::floor(v)), n_z - 1);
  q.d_ry = u - q.i;
  q.d_rz = v - q.j;
  return q;
}

GraspPose decode_cell(const C2FVolume& volume, int i, int j,
                      const GripperGeometry& gripper) {
  gripper.validate();
  const C2FCell& cell = volume.at(i, j);
  EulerAngles e;
  e.rx = roll_from_theta(cell.theta_cos, cell.theta_sin);
  e.ry = pitch_from_bin(i, cell.d_ry, volume.n_y);
  e.rz = yaw_from_bin(j, cell.d_rz, volume.n_z);

  GraspPose pose;
  pose.rotation = euler_to_rotmat(e);
  const Eigen::Vector3d local =
      gripper.closing_region_origin +
      Eigen::Vector3d(cell.dx * gripper.finger_depth,
                      (cell.dy - 0.5) * gripper.max_width,
                      (cell.dz - 0.5) * gripper.finger_height);
  pose.translation = volume.grasp_point - pose.rotation * local;
  pose.confidence = cell.confidence;
  return pose;
}

TargetSet encode_labels(const std::vector<Eigen::Vector3d>& grasp_points,
                        const GraspLabelSet& gt, const GripperGeometry& gripper,
                        int n_y, int n_z) {
  check_grid(n_y, n_z);
  gripper.validate();
  if (grasp_points.empty()) {
    throw InvalidArgumentError("grasp_points must be non-empty");
  }
  if (gt.labels.size() != gt.grasps.size()) {
    throw InvalidArgumentError("labels and grasps size mismatch");
  }

  TargetSet out;
  out.volumes.reserve(grasp_points.size());
  for (const auto& p : grasp_points) {
    if (!p.allFinite()) {
      throw InvalidArgumentError("grasp point must be finite");
    }
    out.volumes.emplace_back(p, n_y, n_z);
  }

  std::vector<std::vector<CellClaim>> claims(
      grasp_points.size(),
      std::vector<CellClaim>(static_cast<std::size_t>(n_y) * n_z));

  for (std::size_t gi = 0; gi < gt.grasps.size(); ++gi) {
    if (gt.labels[gi] != GraspQuality::kGood) continue;
    const GraspPose& g = gt.grasps[gi];

    EulerAngles e = canonicalize_roll(rotmat_to_euler(g.rotation));
    e.rz = wrap_angle(e.rz);
    const QuantizedOrientation q = quantize_orientation(e.ry, e.rz, n_y, n_z);

    // Distance from the grasp rotation to its own residual-zeroed rotation.
    EulerAngles coarse = e;
    coarse.ry = pitch_from_bin(q.i, 0.0, n_y);
    coarse.rz = yaw_from_bin(q.j, 0.0, n_z);
    const Eigen::Matrix3d rg = euler_to_rotmat(e);
    const double rot_residual =
        rotation_distance(rg, euler_to_rotmat(coarse));

    const double theta_cos = std::cos(2.0 * e.rx);
    const double theta_sin = std::sin(2.0 * e.rx);

    for (std::size_t pi = 0; pi < grasp_points.size(); ++pi) {
      if (!enclosed(grasp_points[pi], g, gripper)) continue;

      // Translation channels in the frame of the canonicalized rotation, so
      // decode_cell inverts them exactly.
      const Eigen::Vector3d b =
          rg.transpose() * (grasp_points[pi] - g.translation) -
          gripper.closing_region_origin;
      const double dx = b.x() / gripper.finger_depth;
      const double dy = b.y() / gripper.max_width + 0.5;
      const double dz = b.z() / gripper.finger_height + 0.5;
      const double trans_residual =
          (Eigen::Vector3d(dx, dy, dz) - Eigen::Vector3d(0.5, 0.5, 0.5))
              .norm();

      CellClaim claim{rot_residual, trans_residual, static_cast<int>(gi)};
      CellClaim& held =
          claims[pi][static_cast<std::size_t>(q.i) * n_z + q.j];
      if (held.gt_index >= 0 && !claim.beats(held)) continue;
      held = claim;

      C2FCell& cell = out.volumes[pi].at(q.i, q.j);
      cell.confidence = 1.0;
      cell.dx = dx;
      cell.dy = dy;
      cell.dz = dz;
      cell.d_ry = q.d_ry;
      cell.d_rz = q.d_rz;
      cell.theta_cos = theta_cos;
      cell.theta_sin = theta_sin;
    }
  }

  for (std::size_t pi = 0; pi < claims.size(); ++pi) {
    for (int i = 0; i < n_y; ++i) {
      for (int j = 0; j < n_z; ++j) {
        const CellClaim& held = claims[pi][static_cast<std::size_t>(i) * n_z + j];
        if (held.gt_index < 0) continue;
        out.positives.push_back(
            {static_cast<int>(pi), i, j, held.gt_index});
      }
    }
  }
  return out;
}

DecodedVolume decode_volume(const std::vector<C2FVolume>& volumes,
                            const GripperGeometry& gripper,
                            double conf_threshold) {
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw InvalidArgumentError("conf_threshold outside [0, 1]");
  }
  gripper.validate();

  struct Hit {
    double conf;
    int v, i, j;
  };
  std::vector<Hit> hits;
  DecodedVolume out;
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const C2FVolume& vol = volumes[v];
    for (int i = 0; i < vol.n_y; ++i) {
      for (int j = 0; j < vol.n_z; ++j) {
        const C2FCell& cell = vol.at(i, j);
        if (!(cell.confidence >= conf_threshold)) continue;
        if (cell.theta_cos * cell.theta_cos +
                cell.theta_sin * cell.theta_sin < 1e-18) {
          ++out.degenerate_cells;
          continue;
        }
        hits.push_back({cell.confidence, static_cast<int>(v), i, j});
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    if (a.v != b.v) return a.v < b.v;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  out.poses.reserve(hits.size());
  for (const Hit& h : hits) {
    out.poses.push_back(decode_cell(volumes[h.v], h.i, h.j, gripper));
  }
  return out;
}

}  // namespace c2f
