#include "c2f/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "c2f/random.hpp"

namespace c2f {

namespace {

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void MatchThresholds::validate() const {
  if (!(trans_tol > 0.0) || !std::isfinite(trans_tol)) {
    throw InvalidArgumentError("trans_tol must be positive");
  }
  if (!(rot_tol > 0.0) || !std::isfinite(rot_tol)) {
    throw InvalidArgumentError("rot_tol must be positive");
  }
}

bool pose_match(const GraspPose& pred, const GraspPose& gt,
                const MatchThresholds& th) {
  th.validate();
  if ((pred.translation - gt.translation).norm() >= th.trans_tol) {
    return false;
  }
  return rotation_distance_symmetric(pred.rotation, gt.rotation) < th.rot_tol;
}

std::vector<GraspPose> nms(const std::vector<GraspPose>& poses,
                           double trans_tol, double rot_tol) {
  if (!(trans_tol > 0.0) || !std::isfinite(trans_tol) ||
      !(rot_tol > 0.0) || !std::isfinite(rot_tol)) {
    throw InvalidArgumentError("nms: tolerances must be positive");
  }
  std::vector<std::size_t> order(poses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return poses[a].confidence > poses[b].confidence;
                   });
  std::vector<GraspPose> kept;
  for (std::size_t i : order) {
    const GraspPose& p = poses[i];
    bool overlap = false;
    for (const GraspPose& k : kept) {
      if ((p.translation - k.translation).norm() < trans_tol &&
          rotation_distance_symmetric(p.rotation, k.rotation) < rot_tol) {
        overlap = true;
        break;
      }
    }
    if (!overlap) kept.push_back(p);
  }
  return kept;
}

DifficultyReport average_precision(const std::vector<GraspPose>& preds,
                                   const std::vector<GraspPose>& gts,
                                   const MatchThresholds& th) {
  th.validate();
  if (gts.empty()) {
    throw InvalidArgumentError(
        "average_precision: ground truth list is empty");
  }
  const std::size_t n_eval = std::min<std::size_t>(preds.size(), 10);
  const std::size_t denom = std::min<std::size_t>(gts.size(), 10);

  DifficultyReport rep;
  std::vector<bool> taken(gts.size(), false);
  int matched = 0;
  double precision_sum = 0.0;
  for (std::size_t k = 0; k < n_eval; ++k) {
    const GraspPose& p = preds[k];
    int best = -1;
    double best_rot = std::numeric_limits<double>::infinity();
    double best_trans = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      if (!pose_match(p, gts[g], th)) continue;
      const double dr =
          rotation_distance_symmetric(p.rotation, gts[g].rotation);
      const double dt = (p.translation - gts[g].translation).norm();
      if (best < 0 || dr < best_rot ||
          (dr == best_rot && dt < best_trans)) {
        best = static_cast<int>(g);
        best_rot = dr;
        best_trans = dt;
      }
    }
    RankMatch m;
    m.rank = static_cast<int>(k) + 1;
    m.gt_index = best;
    if (best >= 0) {
      taken[best] = true;
      ++matched;
      precision_sum += static_cast<double>(matched) / (k + 1);
    }
    rep.matches.push_back(m);
    rep.precision_at_rank.push_back(static_cast<double>(matched) / (k + 1));
  }
  rep.ap = precision_sum / static_cast<double>(denom);
  return rep;
}

EvalReport evaluate(const std::vector<GraspPose>& preds,
                    const std::vector<GraspPose>& gts) {
  if (gts.empty()) {
    throw InvalidArgumentError("evaluate: ground truth list is empty");
  }
  EvalReport rep;
  rep.num_predictions = static_cast<int>(preds.size());
  std::vector<GraspPose> kept = nms(preds, 0.02, 5.0 * kPi / 180.0);
  rep.num_after_nms = static_cast<int>(kept.size());
  if (kept.size() > 10) kept.resize(10);
  rep.num_evaluated = static_cast<int>(kept.size());
  rep.num_ground_truth = static_cast<int>(gts.size());
  rep.denominator = std::min<std::size_t>(gts.size(), 10);
  rep.hard = average_precision(kept, gts, hard_thresholds());
  rep.easy = average_precision(kept, gts, easy_thresholds());
  rep.ap_hard = rep.hard.ap;
  rep.ap_easy = rep.easy.ap;
  return rep;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << "grasp evaluation\n";
  os << "  predictions:      " << report.num_predictions << "\n";
  os << "  after nms:        " << report.num_after_nms << "\n";
  os << "  evaluated:        " << report.num_evaluated << " (top 10)\n";
  os << "  ground truth:     " << report.num_ground_truth << "\n";
  os << "  ap denominator:   " << report.denominator
     << " (min of ground truth count and 10)\n";
  os << "  ap_hard (2 cm, 5 deg):  " << fmt4(report.ap_hard) << "\n";
  os << "  ap_easy (2 cm, 10 deg): " << fmt4(report.ap_easy) << "\n";
  const auto dump = [&os](const char* name, const DifficultyReport& d) {
    os << name << " matches:\n";
    for (std::size_t i = 0; i < d.matches.size(); ++i) {
      const RankMatch& m = d.matches[i];
      os << "  rank " << m.rank << " -> ";
      if (m.gt_index >= 0) {
        os << "gt " << m.gt_index;
      } else {
        os << "none";
      }
      os << " (precision " << fmt4(d.precision_at_rank[i]) << ")\n";
    }
  };
  dump("hard", report.hard);
  dump("easy", report.easy);
  return os.str();
}

std::vector<GraspPose> perturb_gt(const GraspLabelSet& gts, double sigma_t,
                                  double sigma_r, std::uint64_t seed) {
  if (!(sigma_t >= 0.0) || !std::isfinite(sigma_t) || !(sigma_r >= 0.0) ||
      !std::isfinite(sigma_r)) {
    throw InvalidArgumentError("perturb_gt: sigmas must be non-negative");
  }
  if (gts.grasps.size() != gts.labels.size()) {
    throw InvalidArgumentError("perturb_gt: label count mismatch");
  }
  RandomGen rng(seed);
  std::vector<GraspPose> out;
  for (std::size_t i = 0; i < gts.grasps.size(); ++i) {
    if (gts.labels[i] != GraspQuality::kGood) continue;
    GraspPose p = gts.grasps[i];
    p.translation += sigma_t * Eigen::Vector3d(rng.gaussian(), rng.gaussian(),
                                               rng.gaussian());
    const Eigen::Vector3d axis = rng.unit_vector();
    // The metric halves geodesic angles, so the applied angle is doubled to
    // put the measured distance at |N(0, sigma_r)|.
    const double angle = 2.0 * sigma_r * std::abs(rng.gaussian());
    p.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix() *
                 p.rotation;
    p.confidence = 1.0 / (1.0 + static_cast<double>(out.size()));
    out.push_back(p);
  }
  return out;
}

}  // namespace c2f
