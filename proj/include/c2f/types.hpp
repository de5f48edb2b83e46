#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace c2f {

// Bad caller input. The CLI maps this to exit code 1.
struct InvalidArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents. Messages carry a line number where one is known.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated internal postcondition. The CLI maps this to exit code 2.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

struct EulerAngles {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
  // Set by rotmat_to_euler when |cos ry| vanishes and rx was folded into rz.
  bool gimbal_lock = false;
};

struct GraspPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double confidence = 1.0;
};

// Parallel-jaw gripper. In the gripper frame, x is the approach direction,
// y the closing direction, z the finger height axis. The closing region is
// the box [0, finger_depth] x [-max_width/2, max_width/2] x
// [-finger_height/2, finger_height/2] offset by closing_region_origin.
struct GripperGeometry {
  double max_width = 0.0986;
  double finger_depth = 0.06;
  double finger_height = 0.02;
  double finger_thickness = 0.01;
  Eigen::Vector3d closing_region_origin = Eigen::Vector3d::Zero();

  void validate() const;
};

enum class GraspQuality { kGood, kBad };

struct GraspLabelSet {
  std::vector<GraspPose> grasps;
  std::vector<GraspQuality> labels;  // one per grasp
  std::string source;
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  // Empty, or one per point. Unit length, or zero where estimation was
  // degenerate.
  std::vector<Eigen::Vector3d> normals;

  bool has_normals() const { return !normals.empty(); }
  std::size_t size() const { return points.size(); }
};

}  // namespace c2f
