#pragma once

#include <cstdint>

#include "c2f/types.hpp"

namespace c2f {

struct SamplerConfig {
  int neighbors_k = 30;
  int num_seed_points = 500;
  int roll_steps = 8;
  int depth_steps = 5;
  double friction_mu = 0.3;
  int min_contact_points = 5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Estimates one normal per point from the covariance of its k exact nearest
// neighbors, oriented toward the viewpoint. Degenerate neighborhoods (rank
// < 2) get a zero normal and are excluded from seeding.
PointCloud estimate_normals(const PointCloud& cloud, int k,
                            const Eigen::Vector3d& viewpoint);

// Enumerates grasp candidates at seeded surface points: a local frame is
// built from the normal (approach) and the dominant tangential variation of
// the neighboring normals (closing axis), then roll_steps rotations about
// the approach axis and depth_steps standoffs are tried. Candidates keep at
// least min_contact_points points in the closing region and are collision
// free. Deterministic for a fixed cloud and rng_seed.
std::vector<GraspPose> sample_candidates(const PointCloud& cloud,
                                         const GripperGeometry& gripper,
                                         const SamplerConfig& cfg);

// True when any cloud point is inside the gripper body (two fingers and the
// palm slab). Points inside the closing region do not count.
bool collides(const GraspPose& pose, const PointCloud& cloud,
              const GripperGeometry& gripper);

// Antipodal test with friction coefficient mu. Contacts are the enclosed
// points within 2 mm of where each finger meets the object along the closing
// axis; the grasp is good when both contact sets hold a normal inside the
// friction cone, with opposite signs on the two sides.
GraspQuality label_antipodal(const GraspPose& pose, const PointCloud& cloud,
                             const GripperGeometry& gripper, double mu);

// estimate_normals (when the cloud has none), sample_candidates and
// label_antipodal composed into a labeled ground-truth set.
GraspLabelSet generate_dataset(const PointCloud& cloud,
                               const GripperGeometry& gripper,
                               const SamplerConfig& cfg);

}  // namespace c2f
