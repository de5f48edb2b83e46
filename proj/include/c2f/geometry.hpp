#pragma once

#include "c2f/types.hpp"

namespace c2f {

inline constexpr double kPi = 3.14159265358979323846;

// Euler convention used throughout: extrinsic rotations about the fixed x,
// then y, then z axis, composed as R = Rz(rz) * Ry(ry) * Rx(rx). Canonical
// ranges: rx in [-pi/2, pi/2), ry in [-pi/2, pi/2], rz in [-pi, pi).

Eigen::Matrix3d euler_to_rotmat(const EulerAngles& e);

// Inverse of euler_to_rotmat. At gimbal lock (|cos ry| < 1e-9) rx is forced
// to 0, the remaining freedom folds into rz, and gimbal_lock is set. The
// returned angles always rebuild the input matrix.
EulerAngles rotmat_to_euler(const Eigen::Matrix3d& r);

// arcsin(||I - r1 * r2^T||_F / (2 sqrt 2)), in [0, pi/2].
double rotation_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2);

// rotation_distance minimized over the two-fold Rx(pi) gripper symmetry.
double rotation_distance_symmetric(const Eigen::Matrix3d& r1,
                                   const Eigen::Matrix3d& r2);

// Rx(pi), the gripper symmetry flip.
Eigen::Matrix3d roll_flip();

// Maps rx into [-pi/2, pi/2) by adding a multiple of pi. The result denotes
// a gripper-equivalent pose: the two rotations differ by Rx(pi) applied in
// the gripper frame.
EulerAngles canonicalize_roll(const EulerAngles& e);

// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-6);

// True when point lies inside the closed closing-region box of the gripper
// posed at pose.
bool enclosed(const Eigen::Vector3d& point, const GraspPose& pose,
              const GripperGeometry& gripper);

}  // namespace c2f
