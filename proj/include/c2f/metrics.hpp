#pragma once

#include <cstdint>

#include "c2f/geometry.hpp"

namespace c2f {

struct MatchThresholds {
  double trans_tol = 0.02;          // meters
  double rot_tol = 5.0 * kPi / 180.0;  // radians

  void validate() const;
};

inline MatchThresholds hard_thresholds() { return {0.02, 5.0 * kPi / 180.0}; }
inline MatchThresholds easy_thresholds() { return {0.02, 10.0 * kPi / 180.0}; }

// Strict thresholds: translation distance and symmetry-aware rotation
// distance must both be below their tolerance.
bool pose_match(const GraspPose& pred, const GraspPose& gt,
                const MatchThresholds& th);

// Greedy pose suppression. Keeps a pose unless it is within trans_tol and
// rot_tol of an already kept one. Input is re-sorted by confidence
// descending (stable) before the sweep.
std::vector<GraspPose> nms(const std::vector<GraspPose>& poses,
                           double trans_tol = 0.02,
                           double rot_tol = 5.0 * kPi / 180.0);

struct RankMatch {
  int rank = 0;      // 1-based prediction rank
  int gt_index = -1;  // matched ground truth, -1 when unmatched
};

struct DifficultyReport {
  double ap = 0.0;
  std::vector<RankMatch> matches;
  std::vector<double> precision_at_rank;
};

// Rank-ordered greedy matching over the top 10 predictions. Each prediction
// takes the nearest unmatched ground truth it matches (rotation distance
// first, then translation, then index), and
// ap = sum over matched ranks of precision@rank / min(|gts|, 10).
DifficultyReport average_precision(const std::vector<GraspPose>& preds,
                                   const std::vector<GraspPose>& gts,
                                   const MatchThresholds& th);

struct EvalReport {
  double ap_hard = 0.0;
  double ap_easy = 0.0;
  DifficultyReport hard;
  DifficultyReport easy;
  int num_predictions = 0;
  int num_after_nms = 0;
  int num_evaluated = 0;   // after truncation to 10
  int num_ground_truth = 0;
  std::size_t denominator = 0;  // min(|gts|, 10)
};

// nms at (2 cm, 5 deg), truncation to the top 10, then average precision at
// the hard (5 deg) and easy (10 deg) thresholds.
EvalReport evaluate(const std::vector<GraspPose>& preds,
                    const std::vector<GraspPose>& gts);

std::string format_report(const EvalReport& report);

// Perturbs every good grasp with Gaussian translation noise (sigma_t per
// axis) and a random-axis rotation whose distance to the source is
// |N(0, sigma_r)|. Output keeps the input order with confidence 1/(1+rank).
std::vector<GraspPose> perturb_gt(const GraspLabelSet& gts, double sigma_t,
                                  double sigma_r, std::uint64_t seed);

}  // namespace c2f
