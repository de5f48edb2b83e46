#include "c2f/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace c2f {

void GripperGeometry::validate() const {
  if (!(max_width > 0.0) || !(finger_depth > 0.0) || !(finger_height > 0.0) ||
      !(finger_thickness > 0.0)) {
    throw InvalidArgumentError("gripper dimensions must be positive");
  }
  if (!closing_region_origin.allFinite()) {
    throw InvalidArgumentError("closing_region_origin must be finite");
  }
  // The roll symmetry and the normalized translation channels both assume a
  // closing region centered on the approach axis.
  if (closing_region_origin.y() != 0.0 || closing_region_origin.z() != 0.0) {
    throw InvalidArgumentError(
        "closing_region_origin must lie on the gripper x axis");
  }
}

Eigen::Matrix3d euler_to_rotmat(const EulerAngles& e) {
  if (!std::isfinite(e.rx) || !std::isfinite(e.ry) || !std::isfinite(e.rz)) {
    throw InvalidArgumentError("euler angles must be finite");
  }
  const double ca = std::cos(e.rx), sa = std::sin(e.rx);
  const double cb = std::cos(e.ry), sb = std::sin(e.ry);
  const double cc = std::cos(e.rz), sc = std::sin(e.rz);
  Eigen::Matrix3d r;
  r << cb * cc, sa * sb * cc - ca * sc, ca * sb * cc + sa * sc,
       cb * sc, sa * sb * sc + ca * cc, ca * sb * sc - sa * cc,
       -sb, sa * cb, ca * cb;
  return r;
}

EulerAngles rotmat_to_euler(const Eigen::Matrix3d& r) {
  if (!is_rotation(r)) {
    throw InvalidArgumentError("rotmat_to_euler: not a rotation matrix");
  }
  EulerAngles e;
  const double sy = std::clamp(-r(2, 0), -1.0, 1.0);
  const double cy = std::sqrt(std::max(0.0, 1.0 - sy * sy));
  e.ry = std::asin(sy);
  if (cy < 1e-9) {
    // Only ry +- rz is determined. Force rx = 0; the same extraction covers
    // both signs of ry.
    e.gimbal_lock = true;
    e.rx = 0.0;
    e.rz = std::atan2(-r(0, 1), r(1, 1));
  } else {
    e.rx = std::atan2(r(2, 1), r(2, 2));
    e.rz = std::atan2(r(1, 0), r(0, 0));
  }
  return e;
}

double rotation_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
  if (!is_rotation(r1) || !is_rotation(r2)) {
    throw InvalidArgumentError("rotation_distance: invalid rotation");
  }
  const double fro = (Eigen::Matrix3d::Identity() - r1 * r2.transpose()).norm();
  return std::asin(std::clamp(fro / (2.0 * std::sqrt(2.0)), 0.0, 1.0));
}

double rotation_distance_symmetric(const Eigen::Matrix3d& r1,
                                   const Eigen::Matrix3d& r2) {
  return std::min(rotation_distance(r1, r2),
                  rotation_distance(r1 * roll_flip(), r2));
}

Eigen::Matrix3d roll_flip() {
  Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
  f(1, 1) = -1.0;
  f(2, 2) = -1.0;
  return f;
}

EulerAngles canonicalize_roll(const EulerAngles& e) {
  if (!std::isfinite(e.rx)) {
    throw InvalidArgumentError("canonicalize_roll: non-finite rx");
  }
  EulerAngles out = e;
  out.rx = e.rx - kPi * std::floor((e.rx + kPi / 2.0) / kPi);
  if (out.rx >= kPi / 2.0) out.rx -= kPi;
  if (out.rx < -kPi / 2.0) out.rx += kPi;
  return out;
}

double wrap_angle(double a) {
  if (!std::isfinite(a)) throw InvalidArgumentError("wrap_angle: non-finite");
  double w = a - 2.0 * kPi * std::floor((a + kPi) / (2.0 * kPi));
  if (w >= kPi) w -= 2.0 * kPi;
  if (w < -kPi) w += 2.0 * kPi;
  return w;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const double dev =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  return dev <= tol && r.determinant() > 0.0;
}

bool enclosed(const Eigen::Vector3d& point, const GraspPose& pose,
              const GripperGeometry& gripper) {
  const Eigen::Vector3d b =
      pose.rotation.transpose() * (point - pose.translation) -
      gripper.closing_region_origin;
  return b.x() >= 0.0 && b.x() <= gripper.finger_depth &&
         std::abs(b.y()) <= gripper.max_width / 2.0 &&
         std::abs(b.z()) <= gripper.finger_height / 2.0;
}

}  // namespace c2f
