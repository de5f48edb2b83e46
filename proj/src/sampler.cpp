#include "c2f/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <Eigen/Eigenvalues>

#include "c2f/geometry.hpp"
#include "c2f/random.hpp"

namespace c2f {

namespace {

// Uniform voxel table over the cloud. Queries are exact; the grid only
// prunes candidates.
class SpatialGrid {
 public:
  explicit SpatialGrid(const std::vector<Eigen::Vector3d>& pts)
      : points_(pts) {
    const std::size_t n = pts.size();
    if (n == 0) return;
    lo_ = pts[0];
    Eigen::Vector3d hi = pts[0];
    for (const auto& p : pts) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d ext = hi - lo_;
    const double diag = ext.norm();
    double cs = 1e-9;
    const double vol = ext.x() * ext.y() * ext.z();
    if (vol > 0.0) cs = std::max(cs, 2.0 * std::cbrt(vol / n));
    cs = std::max(cs, diag / 256.0);
    for (;;) {
      std::size_t total = 1;
      for (int a = 0; a < 3; ++a) {
        dims_[a] = std::max(1, static_cast<int>(std::floor(ext[a] / cs)) + 1);
        total *= dims_[a];
      }
      if (total <= (1u << 22)) break;
      cs *= 2.0;
    }
    cell_size_ = cs;
    cells_.resize(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]);
    for (std::size_t i = 0; i < n; ++i) {
      cells_[flat(coords(pts[i]))].push_back(static_cast<int>(i));
    }
  }

  // k nearest by (distance, index). Returns fewer when the cloud is smaller.
  void knn(const Eigen::Vector3d& q, int k, std::vector<int>& out) const {
    out.clear();
    if (points_.empty() || k <= 0) return;

    struct Ent {
      double d2;
      int idx;
    };
    const auto closer = [](const Ent& a, const Ent& b) {
      if (a.d2 != b.d2) return a.d2 < b.d2;
      return a.idx < b.idx;
    };
    std::vector<Ent> heap;  // max-heap, worst candidate on top

    const Eigen::Vector3i c0 = coords(q);
    int ring_bound = 0;
    for (int a = 0; a < 3; ++a) {
      ring_bound = std::max({ring_bound, c0[a], dims_[a] - 1 - c0[a]});
    }
    for (int ring = 0; ring <= ring_bound; ++ring) {
      if (static_cast<int>(heap.size()) == k && ring > 0) {
        const double bound = (ring - 1) * cell_size_;
        if (bound * bound > heap.front().d2) break;
      }
      visit_ring(c0, ring, [&](const std::vector<int>& cell) {
        for (int idx : cell) {
          const Ent e{(points_[idx] - q).squaredNorm(), idx};
          if (static_cast<int>(heap.size()) < k) {
            heap.push_back(e);
            std::push_heap(heap.begin(), heap.end(), closer);
          } else if (closer(e, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), closer);
            heap.back() = e;
            std::push_heap(heap.begin(), heap.end(), closer);
          }
        }
      });
    }
    std::sort(heap.begin(), heap.end(), closer);
    out.reserve(heap.size());
    for (const Ent& e : heap) out.push_back(e.idx);
  }

  // All points within r of q (closed ball), ascending index.
  void radius(const Eigen::Vector3d& q, double r,
              std::vector<int>& out) const {
    out.clear();
    if (points_.empty() || !(r >= 0.0)) return;
    const Eigen::Vector3i clo = coords(q - Eigen::Vector3d::Constant(r));
    const Eigen::Vector3i chi = coords(q + Eigen::Vector3d::Constant(r));
    const double r2 = r * r;
    for (int x = clo[0]; x <= chi[0]; ++x) {
      for (int y = clo[1]; y <= chi[1]; ++y) {
        for (int z = clo[2]; z <= chi[2]; ++z) {
          for (int idx : cells_[flat({x, y, z})]) {
            if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  Eigen::Vector3i coords(const Eigen::Vector3d& p) const {
    Eigen::Vector3i c;
    for (int a = 0; a < 3; ++a) {
      const int v = static_cast<int>(std::floor((p[a] - lo_[a]) / cell_size_));
      c[a] = std::clamp(v, 0, dims_[a] - 1);
    }
    return c;
  }

  std::size_t flat(const Eigen::Vector3i& c) const {
    return (static_cast<std::size_t>(c[0]) * dims_[1] + c[1]) * dims_[2] +
           c[2];
  }

  template <typename F>
  void visit_ring(const Eigen::Vector3i& c0, int ring, F&& f) const {
    for (int dx = -ring; dx <= ring; ++dx) {
      const int x = c0[0] + dx;
      if (x < 0 || x >= dims_[0]) continue;
      for (int dy = -ring; dy <= ring; ++dy) {
        const int y = c0[1] + dy;
        if (y < 0 || y >= dims_[1]) continue;
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) {
            continue;
          }
          const int z = c0[2] + dz;
          if (z < 0 || z >= dims_[2]) continue;
          f(cells_[flat({x, y, z})]);
        }
      }
    }
  }

  const std::vector<Eigen::Vector3d>& points_;
  Eigen::Vector3d lo_ = Eigen::Vector3d::Zero();
  Eigen::Vector3i dims_ = Eigen::Vector3i::Ones();
  double cell_size_ = 1.0;
  std::vector<std::vector<int>> cells_;
};

Eigen::Matrix3d rot_about_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

bool normal_valid(const Eigen::Vector3d& n) {
  return std::abs(n.norm() - 1.0) <= 1e-6;
}

// Local gripper frame at a seed: approach along -normal, closing axis along
// the dominant tangential variation of the neighboring normals. The closing
// axis sign follows the third moment of the point offsets so the frame moves
// rigidly with the cloud.
Eigen::Matrix3d seed_frame(const PointCloud& cloud,
                           const std::vector<int>& nn, int seed) {
  const Eigen::Vector3d& p0 = cloud.points[seed];
  const Eigen::Vector3d& n = cloud.normals[seed];
  const Eigen::Matrix3d proj =
      Eigen::Matrix3d::Identity() - n * n.transpose();

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  int count = 0;
  for (int idx : nn) {
    if (!normal_valid(cloud.normals[idx])) continue;
    mean += cloud.normals[idx];
    ++count;
  }
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  if (count > 0) {
    mean /= count;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int idx : nn) {
      if (!normal_valid(cloud.normals[idx])) continue;
      const Eigen::Vector3d d = cloud.normals[idx] - mean;
      cov += d * d.transpose();
    }
    const Eigen::Matrix3d tangential = proj * cov * proj;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(tangential);
    if (es.eigenvalues()(2) > 1e-12) {
      y = proj * es.eigenvectors().col(2);
    }
  }
  if (y.norm() < 1e-9) {
    // Flat neighborhood: any tangent direction serves.
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (std::abs(n[a]) < std::abs(n[axis])) axis = a;
    }
    y = proj * Eigen::Vector3d::Unit(axis);
  }
  y.normalize();

  double third = 0.0;
  for (int idx : nn) {
    const double d = (cloud.points[idx] - p0).dot(y);
    third += d * d * d;
  }
  if (third < 0.0) y = -y;

  const Eigen::Vector3d x = -n;
  y = (y - y.dot(x) * x).normalized();
  Eigen::Matrix3d frame;
  frame.col(0) = x;
  frame.col(1) = y;
  frame.col(2) = x.cross(y);
  return frame;
}

}  // namespace

void SamplerConfig::validate() const {
  if (neighbors_k < 3) throw InvalidArgumentError("neighbors_k must be >= 3");
  if (num_seed_points < 1) {
    throw InvalidArgumentError("num_seed_points must be >= 1");
  }
  if (roll_steps < 1) throw InvalidArgumentError("roll_steps must be >= 1");
  if (depth_steps < 1) throw InvalidArgumentError("depth_steps must be >= 1");
  if (!(friction_mu > 0.0) || !std::isfinite(friction_mu)) {
    throw InvalidArgumentError("friction_mu must be positive");
  }
  if (min_contact_points < 1) {
    throw InvalidArgumentError("min_contact_points must be >= 1");
  }
}

PointCloud estimate_normals(const PointCloud& cloud, int k,
                            const Eigen::Vector3d& viewpoint) {
  if (k < 3) throw InvalidArgumentError("estimate_normals: k must be >= 3");
  if (cloud.points.size() < static_cast<std::size_t>(k)) {
    throw InvalidArgumentError("estimate_normals: cloud has fewer than k points");
  }
  if (!viewpoint.allFinite()) {
    throw InvalidArgumentError("estimate_normals: viewpoint must be finite");
  }

  SpatialGrid grid(cloud.points);
  PointCloud out;
  out.points = cloud.points;
  out.normals.assign(cloud.points.size(), Eigen::Vector3d::Zero());

  std::vector<int> nn;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    grid.knn(cloud.points[i], k, nn);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int idx : nn) mean += cloud.points[idx];
    mean /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int idx : nn) {
      const Eigen::Vector3d d = cloud.points[idx] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d ev = es.eigenvalues();
    // Rank below 2 leaves the normal undefined.
    if (!(ev(2) > 0.0) || ev(1) <= 1e-9 * ev(2)) continue;
    Eigen::Vector3d n = es.eigenvectors().col(0).normalized();
    if (n.dot(viewpoint - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

std::vector<GraspPose> sample_candidates(const PointCloud& cloud,
                                         const GripperGeometry& gripper,
                                         const SamplerConfig& cfg) {
  cfg.validate();
  gripper.validate();
  if (!cloud.has_normals() ||
      cloud.normals.size() != cloud.points.size()) {
    throw InvalidArgumentError("sample_candidates: cloud normals required");
  }

  std::vector<int> valid;
  for (std::size_t i = 0; i < cloud.normals.size(); ++i) {
    if (normal_valid(cloud.normals[i])) valid.push_back(static_cast<int>(i));
  }
  std::vector<GraspPose> out;
  if (valid.empty()) return out;

  RandomGen rng(cfg.rng_seed);
  std::vector<int> pool = valid;
  const std::size_t nseeds =
      std::min<std::size_t>(cfg.num_seed_points, pool.size());
  for (std::size_t s = 0; s < nseeds; ++s) {
    const std::size_t j = s + rng.index(pool.size() - s);
    std::swap(pool[s], pool[j]);
  }

  SpatialGrid grid(cloud.points);
  const int k_eff =
      std::min<int>(cfg.neighbors_k, static_cast<int>(cloud.points.size()));

  const double half_w = gripper.max_width / 2.0;
  const double half_h = gripper.finger_height / 2.0;
  const double fd = gripper.finger_depth;
  const double ft = gripper.finger_thickness;
  const double reach =
      Eigen::Vector3d(fd + ft, half_w + ft, half_h).norm() + fd +
      gripper.closing_region_origin.norm();

  std::vector<int> nn;
  std::vector<int> cand;
  std::vector<Eigen::Vector3d> local;
  for (std::size_t s = 0; s < nseeds; ++s) {
    const int seed = pool[s];
    const Eigen::Vector3d& p0 = cloud.points[seed];
    grid.knn(p0, k_eff, nn);
    const Eigen::Matrix3d base = seed_frame(cloud, nn, seed);
    grid.radius(p0, reach, cand);
    PointCloud nearby;
    nearby.points.reserve(cand.size());
    for (int idx : cand) nearby.points.push_back(cloud.points[idx]);

    for (int r = 0; r < cfg.roll_steps; ++r) {
      // Half a turn covers all distinct grasps under the roll symmetry.
      const Eigen::Matrix3d rot = base * rot_about_x(kPi * r / cfg.roll_steps);
      local.clear();
      local.reserve(cand.size());
      for (int idx : cand) {
        local.push_back(rot.transpose() * (cloud.points[idx] - p0));
      }
      for (int dstep = 0; dstep < cfg.depth_steps; ++dstep) {
        const double depth = fd * (dstep + 1) / (cfg.depth_steps + 1);
        int contacts = 0;
        bool hit = false;
        for (const Eigen::Vector3d& q : local) {
          const double bz = q.z();
          if (std::abs(bz) > half_h) continue;
          const double bx = q.x() + depth;
          const double by = q.y();
          if (bx >= 0.0) {
            if (bx > fd) continue;
            if (std::abs(by) <= half_w) {
              ++contacts;
            } else if (by < 0.0 ? by >= -half_w - ft : by <= half_w + ft) {
              hit = true;
              break;
            }
          } else if (bx >= -ft && std::abs(by) <= half_w + ft) {
            hit = true;
            break;
          }
        }
        if (hit || contacts < cfg.min_contact_points) continue;

        GraspPose g;
        g.rotation = rot;
        g.translation =
            p0 - rot * (gripper.closing_region_origin +
                        Eigen::Vector3d(depth, 0.0, 0.0));
        // The voxel pass above is a prefilter; settle boundary cases with
        // the same arithmetic the public predicates use.
        int exact = 0;
        for (const Eigen::Vector3d& p : nearby.points) {
          exact += enclosed(p, g, gripper) ? 1 : 0;
        }
        if (exact >= cfg.min_contact_points && !collides(g, nearby, gripper)) {
          out.push_back(g);
        }
      }
    }
  }
  return out;
}

bool collides(const GraspPose& pose, const PointCloud& cloud,
              const GripperGeometry& gripper) {
  gripper.validate();
  const double half_w = gripper.max_width / 2.0;
  const double half_h = gripper.finger_height / 2.0;
  const double fd = gripper.finger_depth;
  const double ft = gripper.finger_thickness;
  const Eigen::Matrix3d rt = pose.rotation.transpose();
  for (const Eigen::Vector3d& p : cloud.points) {
    const Eigen::Vector3d b =
        rt * (p - pose.translation) - gripper.closing_region_origin;
    if (std::abs(b.z()) > half_h) continue;
    if (b.x() >= 0.0) {
      if (b.x() > fd) continue;
      const double ay = std::abs(b.y());
      if (ay > half_w && ay <= half_w + ft) return true;
    } else if (b.x() >= -ft && std::abs(b.y()) <= half_w + ft) {
      return true;
    }
  }
  return false;
}

GraspQuality label_antipodal(const GraspPose& pose, const PointCloud& cloud,
                             const GripperGeometry& gripper, double mu) {
  gripper.validate();
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidArgumentError("label_antipodal: mu must be positive");
  }
  if (!cloud.has_normals() ||
      cloud.normals.size() != cloud.points.size()) {
    throw InvalidArgumentError("label_antipodal: cloud normals required");
  }

  const Eigen::Matrix3d rt = pose.rotation.transpose();
  std::vector<std::pair<double, int>> inside;  // (closing coordinate, index)
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!enclosed(cloud.points[i], pose, gripper)) continue;
    const Eigen::Vector3d b = rt * (cloud.points[i] - pose.translation) -
                              gripper.closing_region_origin;
    inside.emplace_back(b.y(), static_cast<int>(i));
    ymin = std::min(ymin, b.y());
    ymax = std::max(ymax, b.y());
  }
  if (inside.empty()) return GraspQuality::kBad;

  // Contact bands where the fingers meet the object once closed.
  constexpr double kContactBand = 0.002;
  const double cos_cone = 1.0 / std::sqrt(1.0 + mu * mu);
  const Eigen::Vector3d closing = pose.rotation.col(1);
  bool low_side = false, high_side = false;
  for (const auto& [by, idx] : inside) {
    const Eigen::Vector3d& n = cloud.normals[idx];
    if (!normal_valid(n)) continue;
    const double d = n.dot(closing);
    if (by <= ymin + kContactBand && d <= -cos_cone) low_side = true;
    if (by >= ymax - kContactBand && d >= cos_cone) high_side = true;
  }
  return low_side && high_side ? GraspQuality::kGood : GraspQuality::kBad;
}

GraspLabelSet generate_dataset(const PointCloud& cloud,
                               const GripperGeometry& gripper,
                               const SamplerConfig& cfg) {
  cfg.validate();
  gripper.validate();

  PointCloud working;
  if (cloud.has_normals()) {
    if (cloud.normals.size() != cloud.points.size()) {
      throw InvalidArgumentError("generate_dataset: normal count mismatch");
    }
    working = cloud;
  } else if (cloud.points.size() >= 3) {
    Eigen::Vector3d lo = cloud.points[0], hi = cloud.points[0];
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : cloud.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      centroid += p;
    }
    centroid /= static_cast<double>(cloud.points.size());
    const Eigen::Vector3d viewpoint(centroid.x(), centroid.y(),
                                    hi.z() + (hi - lo).norm() + 1.0);
    const int k =
        std::min<int>(cfg.neighbors_k, static_cast<int>(cloud.points.size()));
    working = estimate_normals(cloud, k, viewpoint);
  } else {
    working.points = cloud.points;
    working.normals.assign(cloud.points.size(), Eigen::Vector3d::Zero());
  }

  GraspLabelSet set;
  set.grasps = sample_candidates(working, gripper, cfg);
  set.labels.reserve(set.grasps.size());
  for (const GraspPose& g : set.grasps) {
    set.labels.push_back(label_antipodal(g, working, gripper,
                                         cfg.friction_mu));
  }
  set.source = "sampler seed=" + std::to_string(cfg.rng_seed);
  return set;
}

}  // namespace c2f
