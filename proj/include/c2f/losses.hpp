#pragma once

#include <array>
#include <cstdint>

#include "c2f/codec.hpp"

namespace c2f {

struct LossConfig {
  double alpha = 0.25;
  double gamma = 2.0;
  double lambda_x = 1.0;
  double lambda_y = 1.0;
  double lambda_z = 1.0;
  double lambda_cls = 1.0;
  double lambda_rot = 1.0;

  void validate() const;
};

using CellGradient = std::array<double, kCellChannels>;

// One gradient entry per cell, same layout as the prediction volumes.
using GradientGrid = std::vector<std::vector<CellGradient>>;

GradientGrid zero_gradients(const std::vector<C2FVolume>& pred);

struct LossTerm {
  double value = 0.0;
  GradientGrid gradients;
};

struct LossReport {
  double cls = 0.0;
  double rot = 0.0;
  double trans = 0.0;
  double total = 0.0;
  GradientGrid gradients;  // of total, per predicted channel
};

// Focal confidence loss over every cell of every volume, normalized by the
// number of positive cells. Confidences are clipped to [1e-7, 1 - 1e-7]
// before the log.
LossTerm focal_loss(const std::vector<C2FVolume>& pred,
                    const std::vector<PositiveCell>& positives,
                    const LossConfig& cfg);

// Mean Frobenius distance ||I - Rhat * R^T||_F over positive cells. Rhat and
// R are rebuilt from the predicted and target orientation channels of each
// cell. Gradients flow through d_ry, d_rz, theta_cos, theta_sin.
LossTerm rotation_loss(const std::vector<C2FVolume>& pred,
                       const TargetSet& targets, const LossConfig& cfg);

// Weighted L1 on the normalized translation channels over positive cells.
LossTerm translation_loss(const std::vector<C2FVolume>& pred,
                          const TargetSet& targets, const LossConfig& cfg);

// total = lambda_cls * cls + lambda_rot * rot + trans.
LossReport total_loss(const std::vector<C2FVolume>& pred,
                      const TargetSet& targets, const LossConfig& cfg);

// Compares the analytic gradients of total_loss against central finite
// differences at a seeded random perturbation of pred, and returns the
// maximum relative error. Channels sitting within 1e-4 of an L1 kink, a
// confidence clip bound, or the roll branch cut are skipped.
double gradcheck(const std::vector<C2FVolume>& pred, const TargetSet& targets,
                 const LossConfig& cfg, double step, std::uint64_t seed);

}  // namespace c2f
