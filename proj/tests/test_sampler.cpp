#include <cmath>
#include <vector>

#include <doctest.h>

#include "c2f/geometry.hpp"
#include "c2f/random.hpp"
#include "c2f/sampler.hpp"

using c2f::GraspLabelSet;
using c2f::GraspPose;
using c2f::GraspQuality;
using c2f::GripperGeometry;
using c2f::kPi;
using c2f::PointCloud;
using c2f::SamplerConfig;

namespace {

constexpr double kDeg = kPi / 180.0;

PointCloud plane_cloud(int side, double spacing) {
  PointCloud c;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      c.points.emplace_back(i * spacing, j * spacing, 0.0);
    }
  }
  return c;
}

// Six grid-sampled faces with exact outward normals.
PointCloud box_cloud(double edge, int per_face) {
  PointCloud c;
  const double h = edge / 2.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      for (int i = 0; i < per_face; ++i) {
        for (int j = 0; j < per_face; ++j) {
          const double u = -h + edge * i / (per_face - 1);
          const double v = -h + edge * j / (per_face - 1);
          Eigen::Vector3d p;
          p[axis] = sign * h;
          p[(axis + 1) % 3] = u;
          p[(axis + 2) % 3] = v;
          Eigen::Vector3d n = Eigen::Vector3d::Zero();
          n[axis] = sign;
          c.points.push_back(p);
          c.normals.push_back(n);
        }
      }
    }
  }
  return c;
}

// Golden-spiral samples of an ellipsoid with exact outward normals.
PointCloud ellipsoid_cloud(double a, double b, double c, int n) {
  PointCloud cloud;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = golden * k;
    const Eigen::Vector3d u(r * std::cos(t), r * std::sin(t), z);
    cloud.points.emplace_back(a * u.x(), b * u.y(), c * u.z());
    cloud.normals.push_back(
        Eigen::Vector3d(u.x() / a, u.y() / b, u.z() / c).normalized());
  }
  return cloud;
}

int enclosed_count(const PointCloud& cloud, const GraspPose& g,
                   const GripperGeometry& grip) {
  int n = 0;
  for (const Eigen::Vector3d& p : cloud.points) {
    n += c2f::enclosed(p, g, grip) ? 1 : 0;
  }
  return n;
}

bool same_poses(const std::vector<GraspPose>& a,
                const std::vector<GraspPose>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n].rotation != b[n].rotation) return false;
    if (a[n].translation != b[n].translation) return false;
  }
  return true;
}

SamplerConfig small_cfg(std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.neighbors_k = 16;
  cfg.num_seed_points = 200;
  cfg.roll_steps = 4;
  cfg.depth_steps = 3;
  cfg.rng_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("estimate_normals on a plane gives the plane normal") {
  const PointCloud cloud = plane_cloud(20, 0.005);
  const PointCloud out =
      c2f::estimate_normals(cloud, 10, Eigen::Vector3d(0, 0, 1));
  REQUIRE(out.normals.size() == cloud.points.size());
  for (const Eigen::Vector3d& n : out.normals) {
    CHECK((n - Eigen::Vector3d(0, 0, 1)).norm() < 1e-6);
  }
}

TEST_CASE("estimate_normals on a sphere tracks the radial direction") {
  const double radius = 0.05;
  const PointCloud exact = ellipsoid_cloud(radius, radius, radius, 2000);
  PointCloud cloud;
  cloud.points = exact.points;

  const PointCloud out =
      c2f::estimate_normals(cloud, 16, Eigen::Vector3d(0, 0, 0.5));
  REQUIRE(out.normals.size() == cloud.points.size());
  for (std::size_t n = 0; n < out.normals.size(); ++n) {
    const Eigen::Vector3d radial = exact.points[n].normalized();
    CHECK(std::abs(out.normals[n].dot(radial)) > std::cos(2.0 * kDeg));
    CHECK(out.normals[n].norm() == doctest::Approx(1.0).epsilon(1e-9));
  }

  // Every normal points toward the viewpoint side.
  for (std::size_t n = 0; n < out.normals.size(); ++n) {
    const Eigen::Vector3d to_view =
        Eigen::Vector3d(0, 0, 0.5) - cloud.points[n];
    CHECK(out.normals[n].dot(to_view) >= 0.0);
  }
}

TEST_CASE("estimate_normals validates its inputs") {
  const PointCloud cloud = plane_cloud(3, 0.01);  // 9 points
  CHECK_THROWS_AS(c2f::estimate_normals(cloud, 10, Eigen::Vector3d(0, 0, 1)),
                  c2f::InvalidArgumentError);
  CHECK_THROWS_AS(c2f::estimate_normals(cloud, 2, Eigen::Vector3d(0, 0, 1)),
                  c2f::InvalidArgumentError);
  CHECK_THROWS_AS(
      c2f::estimate_normals(
          cloud, 5,
          Eigen::Vector3d(std::numeric_limits<double>::quiet_NaN(), 0, 1)),
      c2f::InvalidArgumentError);
}

TEST_CASE("estimate_normals zeroes degenerate neighborhoods") {
  PointCloud line;
  for (int n = 0; n < 30; ++n) {
    line.points.emplace_back(n * 0.001, 0.0, 0.0);
  }
  const PointCloud out =
      c2f::estimate_normals(line, 5, Eigen::Vector3d(0, 0, 1));
  for (const Eigen::Vector3d& n : out.normals) {
    CHECK(n == Eigen::Vector3d::Zero());
  }
}

TEST_CASE("collides detects the gripper body and spares the closing region") {
  const GripperGeometry grip;
  const GraspPose pose;  // identity
  PointCloud cloud;

  CHECK(!c2f::collides(pose, cloud, grip));

  const double half_w = grip.max_width / 2.0;
  const double half_h = grip.finger_height / 2.0;

  // Inside the right finger.
  cloud.points = {Eigen::Vector3d(grip.finger_depth / 2.0,
                                  half_w + grip.finger_thickness / 2.0, 0.0)};
  CHECK(c2f::collides(pose, cloud, grip));

  // Center of the closing region.
  cloud.points = {Eigen::Vector3d(grip.finger_depth / 2.0, 0.0, 0.0)};
  CHECK(!c2f::collides(pose, cloud, grip));

  // Palm slab behind the closing region.
  cloud.points = {Eigen::Vector3d(-grip.finger_thickness / 2.0, 0.0, 0.0)};
  CHECK(c2f::collides(pose, cloud, grip));

  // Behind the palm.
  cloud.points = {Eigen::Vector3d(-grip.finger_thickness - 1e-4, 0.0, 0.0)};
  CHECK(!c2f::collides(pose, cloud, grip));

  // Beside a finger but above the height slab.
  cloud.points = {Eigen::Vector3d(grip.finger_depth / 2.0,
                                  half_w + grip.finger_thickness / 2.0,
                                  half_h + 1e-4)};
  CHECK(!c2f::collides(pose, cloud, grip));

  // The same point under a rotated pose follows the gripper frame.
  GraspPose rotated;
  rotated.rotation =
      Eigen::AngleAxisd(kPi / 2.0, Eigen::Vector3d::UnitZ())
          .toRotationMatrix();
  cloud.points = {rotated.rotation *
                  Eigen::Vector3d(grip.finger_depth / 2.0,
                                  half_w + grip.finger_thickness / 2.0, 0.0)};
  CHECK(c2f::collides(rotated, cloud, grip));
}

TEST_CASE("label_antipodal accepts opposed plates and rejects the rest") {
  const GripperGeometry grip;
  const GraspPose pose;  // identity, closing axis = world y
  const double y = 0.02;

  auto plates = [&](const Eigen::Vector3d& n_low,
                    const Eigen::Vector3d& n_high) {
    PointCloud c;
    for (int i = 0; i < 6; ++i) {
      for (int jz = -1; jz <= 1; ++jz) {
        const double x = 0.01 + 0.008 * i;
        const double z = jz * 0.005;
        c.points.emplace_back(x, -y, z);
        c.normals.push_back(n_low);
        c.points.emplace_back(x, y, z);
        c.normals.push_back(n_high);
      }
    }
    return c;
  };

  const PointCloud opposed =
      plates(Eigen::Vector3d(0, -1, 0), Eigen::Vector3d(0, 1, 0));
  CHECK(c2f::label_antipodal(pose, opposed, grip, 0.3) ==
        GraspQuality::kGood);

  // 45 degree tilt falls outside the arctan(0.3) cone.
  const double s = std::sqrt(0.5);
  const PointCloud tilted =
      plates(Eigen::Vector3d(s, -s, 0), Eigen::Vector3d(s, s, 0));
  CHECK(c2f::label_antipodal(pose, tilted, grip, 0.3) == GraspQuality::kBad);

  // Tilt within the cone is still antipodal.
  const double t = std::tan(10.0 * kDeg);
  const Eigen::Vector3d in_low =
      Eigen::Vector3d(t, -1, 0).normalized();
  const Eigen::Vector3d in_high = Eigen::Vector3d(t, 1, 0).normalized();
  CHECK(c2f::label_antipodal(pose, plates(in_low, in_high), grip, 0.3) ==
        GraspQuality::kGood);

  // Contacts on one finger only.
  PointCloud one_side;
  for (int i = 0; i < 6; ++i) {
    one_side.points.emplace_back(0.01 + 0.008 * i, -y, 0.0);
    one_side.normals.emplace_back(0, -1, 0);
  }
  CHECK(c2f::label_antipodal(pose, one_side, grip, 0.3) ==
        GraspQuality::kBad);

  // Nothing enclosed.
  GraspPose far_pose;
  far_pose.translation = Eigen::Vector3d(10, 10, 10);
  CHECK(c2f::label_antipodal(far_pose, opposed, grip, 0.3) ==
        GraspQuality::kBad);

  CHECK_THROWS_AS(c2f::label_antipodal(pose, opposed, grip, 0.0),
                  c2f::InvalidArgumentError);
  PointCloud no_normals;
  no_normals.points = opposed.points;
  CHECK_THROWS_AS(c2f::label_antipodal(pose, no_normals, grip, 0.3),
                  c2f::InvalidArgumentError);
}

TEST_CASE("sample_candidates is deterministic and obeys its contract") {
  const GripperGeometry grip;
  const PointCloud cloud = box_cloud(0.05, 12);
  const SamplerConfig cfg = small_cfg(7);

  const std::vector<GraspPose> first =
      c2f::sample_candidates(cloud, grip, cfg);
  const std::vector<GraspPose> second =
      c2f::sample_candidates(cloud, grip, cfg);
  CHECK(!first.empty());
  CHECK(same_poses(first, second));

  SamplerConfig other = cfg;
  other.rng_seed = 8;
  const std::vector<GraspPose> reseeded =
      c2f::sample_candidates(cloud, grip, other);
  CHECK(!same_poses(first, reseeded));

  for (const GraspPose& g : first) {
    CHECK(c2f::is_rotation(g.rotation));
    CHECK(g.translation.allFinite());
    CHECK(enclosed_count(cloud, g, grip) >= cfg.min_contact_points);
    CHECK(!c2f::collides(g, cloud, grip));
  }

  PointCloud bare;
  bare.points = cloud.points;
  CHECK_THROWS_AS(c2f::sample_candidates(bare, grip, cfg),
                  c2f::InvalidArgumentError);
}

TEST_CASE("box candidates close across opposing faces") {
  const GripperGeometry grip;
  const PointCloud cloud = box_cloud(0.05, 12);
  const std::vector<GraspPose> grasps =
      c2f::sample_candidates(cloud, grip, small_cfg(7));
  REQUIRE(!grasps.empty());

  double best = 0.0;
  for (const GraspPose& g : grasps) {
    const Eigen::Vector3d closing = g.rotation.col(1);
    for (int axis = 0; axis < 3; ++axis) {
      best = std::max(best,
                      std::abs(closing[axis]));
    }
  }
  CHECK(best > std::cos(10.0 * kDeg));
}

TEST_CASE("isolated points yield no candidates") {
  PointCloud sparse;
  for (int n = 0; n < 10; ++n) {
    sparse.points.emplace_back(n * 1.0, 0.0, 0.0);
    sparse.normals.emplace_back(0, 0, 1);
  }
  SamplerConfig cfg = small_cfg(1);
  cfg.neighbors_k = 3;
  cfg.num_seed_points = 10;
  CHECK(c2f::sample_candidates(sparse, GripperGeometry{}, cfg).empty());
}

TEST_CASE("generate_dataset labels a box cloud") {
  const GripperGeometry grip;
  PointCloud cloud = box_cloud(0.05, 12);
  SUBCASE("with supplied normals") {}
  SUBCASE("with estimated normals") { cloud.normals.clear(); }

  const SamplerConfig cfg = small_cfg(7);
  const GraspLabelSet set = c2f::generate_dataset(cloud, grip, cfg);
  REQUIRE(!set.grasps.empty());
  REQUIRE(set.labels.size() == set.grasps.size());
  CHECK(set.source.find("7") != std::string::npos);

  int good = 0;
  for (std::size_t n = 0; n < set.grasps.size(); ++n) {
    if (set.labels[n] == GraspQuality::kGood) ++good;
    CHECK(!c2f::collides(set.grasps[n], cloud, grip));
    CHECK(enclosed_count(cloud, set.grasps[n], grip) >=
          cfg.min_contact_points);
  }
  CHECK(good >= 1);

  const GraspLabelSet again = c2f::generate_dataset(cloud, grip, cfg);
  CHECK(same_poses(set.grasps, again.grasps));
  CHECK(set.labels == again.labels);
}

TEST_CASE("generate_dataset tolerates degenerate clouds") {
  PointCloud three;
  three.points = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                  Eigen::Vector3d(0, 1, 0)};
  const GraspLabelSet set =
      c2f::generate_dataset(three, GripperGeometry{}, small_cfg(2));
  CHECK(set.labels.size() == set.grasps.size());
  for (GraspQuality q : set.labels) {
    CHECK(q == GraspQuality::kBad);
  }
}

TEST_CASE("a rigid transform carries the dataset along") {
  const GripperGeometry grip;
  const PointCloud cloud = ellipsoid_cloud(0.04, 0.03, 0.025, 1500);

  SamplerConfig cfg;
  cfg.neighbors_k = 14;
  cfg.num_seed_points = 60;
  cfg.roll_steps = 3;
  cfg.depth_steps = 2;
  cfg.rng_seed = 3;

  c2f::EulerAngles e;
  e.rx = 0.4;
  e.ry = -0.7;
  e.rz = 1.9;
  const Eigen::Matrix3d q = c2f::euler_to_rotmat(e);
  const Eigen::Vector3d shift(0.05, -0.02, 0.03);

  PointCloud moved;
  moved.points.reserve(cloud.points.size());
  for (std::size_t n = 0; n < cloud.points.size(); ++n) {
    moved.points.push_back(q * cloud.points[n] + shift);
    moved.normals.push_back(q * cloud.normals[n]);
  }

  const GraspLabelSet base = c2f::generate_dataset(cloud, grip, cfg);
  const GraspLabelSet turned = c2f::generate_dataset(moved, grip, cfg);
  REQUIRE(!base.grasps.empty());
  REQUIRE(turned.grasps.size() == base.grasps.size());
  CHECK(turned.labels == base.labels);
  for (std::size_t n = 0; n < base.grasps.size(); ++n) {
    CHECK((turned.grasps[n].rotation - q * base.grasps[n].rotation).norm() <
          1e-6);
    CHECK((turned.grasps[n].translation -
           (q * base.grasps[n].translation + shift))
              .norm() < 1e-6);
  }
}

TEST_CASE("SamplerConfig rejects out-of-range settings") {
  SamplerConfig good;
  CHECK_NOTHROW(good.validate());

  SamplerConfig cfg = good;
  cfg.neighbors_k = 2;
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
  cfg = good;
  cfg.num_seed_points = 0;
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
  cfg = good;
  cfg.roll_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
  cfg = good;
  cfg.depth_steps = -1;
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
  cfg = good;
  cfg.friction_mu = 0.0;
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
  cfg = good;
  cfg.friction_mu = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
  cfg = good;
  cfg.min_contact_points = 0;
  CHECK_THROWS_AS(cfg.validate(), c2f::InvalidArgumentError);
}
