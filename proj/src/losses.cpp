#include "c2f/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "c2f/random.hpp"

namespace c2f {

namespace {

constexpr double kConfClip = 1e-7;

void check_shapes(const std::vector<C2FVolume>& pred,
                  const std::vector<C2FVolume>& target_volumes) {
  if (pred.size() != target_volumes.size()) {
    throw InvalidArgumentError("prediction/target volume count mismatch");
  }
  for (std::size_t v = 0; v < pred.size(); ++v) {
    if (pred[v].n_y != target_volumes[v].n_y ||
        pred[v].n_z != target_volumes[v].n_z ||
        pred[v].cells.size() != target_volumes[v].cells.size()) {
      throw InvalidArgumentError("prediction/target grid shape mismatch");
    }
  }
}

void check_positives(const std::vector<C2FVolume>& pred,
                     const std::vector<PositiveCell>& positives) {
  if (positives.empty()) {
    throw InvalidArgumentError("empty positive set");
  }
  for (const PositiveCell& pc : positives) {
    if (pc.point_index < 0 ||
        static_cast<std::size_t>(pc.point_index) >= pred.size()) {
      throw InvalidArgumentError("positive cell volume index out of range");
    }
    const C2FVolume& vol = pred[pc.point_index];
    if (pc.i < 0 || pc.i >= vol.n_y || pc.j < 0 || pc.j >= vol.n_z) {
      throw InvalidArgumentError("positive cell index out of range");
    }
  }
}

// Focal term for one cell and its derivative with respect to the raw
// confidence. The clip makes the derivative vanish outside [clip, 1-clip].
double focal_term(double c, bool positive, const LossConfig& cfg, double* dc) {
  const double lo = kConfClip;
  const double hi = 1.0 - kConfClip;
  const double cc = std::clamp(c, lo, hi);
  const bool active = c >= lo && c <= hi;
  const double q = positive ? cc : 1.0 - cc;
  const double om = 1.0 - q;
  const double lq = std::log(q);
  const double pw = std::pow(om, cfg.gamma);
  const double value = -cfg.alpha * pw * lq;
  if (dc) {
    double dldq = -cfg.alpha * pw / q;
    if (cfg.gamma != 0.0) {
      dldq += cfg.alpha * cfg.gamma * std::pow(om, cfg.gamma - 1.0) * lq;
    }
    *dc = active ? (positive ? dldq : -dldq) : 0.0;
  }
  return value;
}

Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Eigen::Matrix3d rot_x_d(double a) {
  Eigen::Matrix3d m;
  m << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
  return m;
}

Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Eigen::Matrix3d rot_y_d(double a) {
  Eigen::Matrix3d m;
  m << -std::sin(a), 0, std::cos(a), 0, 0, 0, -std::cos(a), 0, -std::sin(a);
  return m;
}

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d rot_z_d(double a) {
  Eigen::Matrix3d m;
  m << -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a), 0, 0, 0, 0;
  return m;
}

std::string cell_name(int v, int i, int j) {
  return "point " + std::to_string(v) + ", cell (" + std::to_string(i) +
         ", " + std::to_string(j) + ")";
}

struct RotTerm {
  double value = 0.0;
  double g_dry = 0.0;
  double g_drz = 0.0;
  double g_tcos = 0.0;
  double g_tsin = 0.0;
};

// ||I - Rhat R^T||_F for one positive cell, with the chain back to the four
// predicted orientation channels.
RotTerm rotation_term(const C2FCell& pred, const C2FCell& tgt, int v, int i,
                      int j, int n_y, int n_z, bool want_grad) {
  const double tn2 =
      tgt.theta_cos * tgt.theta_cos + tgt.theta_sin * tgt.theta_sin;
  if (tn2 < 1e-18) {
    throw InvalidArgumentError("degenerate target theta pair at " +
                               cell_name(v, i, j));
  }
  const double pn2 =
      pred.theta_cos * pred.theta_cos + pred.theta_sin * pred.theta_sin;
  if (pn2 < 1e-18) {
    throw InvalidArgumentError("degenerate predicted theta pair at " +
                               cell_name(v, i, j));
  }

  EulerAngles et;
  et.rx = roll_from_theta(tgt.theta_cos, tgt.theta_sin);
  et.ry = pitch_from_bin(i, tgt.d_ry, n_y);
  et.rz = yaw_from_bin(j, tgt.d_rz, n_z);
  const Eigen::Matrix3d rt = euler_to_rotmat(et).transpose();

  const double rx = roll_from_theta(pred.theta_cos, pred.theta_sin);
  const double ry = pitch_from_bin(i, pred.d_ry, n_y);
  const double rz = yaw_from_bin(j, pred.d_rz, n_z);

  const Eigen::Matrix3d mx = rot_x(rx), my = rot_y(ry), mz = rot_z(rz);
  const Eigen::Matrix3d m =
      Eigen::Matrix3d::Identity() - mz * my * mx * rt;
  RotTerm out;
  out.value = m.norm();
  if (!want_grad || out.value < 1e-12) return out;

  const double inv_f = 1.0 / out.value;
  const auto angle_grad = [&](const Eigen::Matrix3d& dr) {
    return -inv_f * m.cwiseProduct(dr * rt).sum();
  };
  const double d_rx = angle_grad(mz * my * rot_x_d(rx));
  const double d_ry = angle_grad(mz * rot_y_d(ry) * mx);
  const double d_rz = angle_grad(rot_z_d(rz) * my * mx);

  out.g_dry = d_ry * (kPi / n_y);
  out.g_drz = d_rz * (2.0 * kPi / n_z);
  out.g_tcos = d_rx * (-0.5 * pred.theta_sin / pn2);
  out.g_tsin = d_rx * (0.5 * pred.theta_cos / pn2);
  return out;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgumentError("alpha must be positive");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError("gamma must be non-negative");
  }
  for (double l : {lambda_x, lambda_y, lambda_z, lambda_cls, lambda_rot}) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw InvalidArgumentError("loss weights must be non-negative");
    }
  }
}

GradientGrid zero_gradients(const std::vector<C2FVolume>& pred) {
  GradientGrid g(pred.size());
  for (std::size_t v = 0; v < pred.size(); ++v) {
    g[v].assign(pred[v].cells.size(), CellGradient{});
  }
  return g;
}

LossTerm focal_loss(const std::vector<C2FVolume>& pred,
                    const std::vector<PositiveCell>& positives,
                    const LossConfig& cfg) {
  cfg.validate();
  check_positives(pred, positives);

  std::vector<std::vector<char>> mask(pred.size());
  for (std::size_t v = 0; v < pred.size(); ++v) {
    mask[v].assign(pred[v].cells.size(), 0);
  }
  for (const PositiveCell& pc : positives) {
    mask[pc.point_index]
        [static_cast<std::size_t>(pc.i) * pred[pc.point_index].n_z + pc.j] = 1;
  }

  LossTerm out;
  out.gradients = zero_gradients(pred);
  const double inv_s = 1.0 / static_cast<double>(positives.size());
  double sum = 0.0;
  for (std::size_t v = 0; v < pred.size(); ++v) {
    for (std::size_t c = 0; c < pred[v].cells.size(); ++c) {
      double dc = 0.0;
      sum += focal_term(pred[v].cells[c].confidence, mask[v][c] != 0, cfg, &dc);
      out.gradients[v][c][0] = dc * inv_s;
    }
  }
  out.value = sum * inv_s;
  return out;
}

LossTerm rotation_loss(const std::vector<C2FVolume>& pred,
                       const TargetSet& targets, const LossConfig& cfg) {
  cfg.validate();
  check_shapes(pred, targets.volumes);
  check_positives(pred, targets.positives);

  LossTerm out;
  out.gradients = zero_gradients(pred);
  const double inv_s = 1.0 / static_cast<double>(targets.positives.size());
  double sum = 0.0;
  for (const PositiveCell& pc : targets.positives) {
    const C2FVolume& vol = pred[pc.point_index];
    const std::size_t idx = static_cast<std::size_t>(pc.i) * vol.n_z + pc.j;
    const RotTerm t = rotation_term(
        vol.cells[idx], targets.volumes[pc.point_index].cells[idx],
        pc.point_index, pc.i, pc.j, vol.n_y, vol.n_z, true);
    sum += t.value;
    CellGradient& g = out.gradients[pc.point_index][idx];
    g[4] += t.g_dry * inv_s;
    g[5] += t.g_drz * inv_s;
    g[6] += t.g_tcos * inv_s;
    g[7] += t.g_tsin * inv_s;
  }
  out.value = sum * inv_s;
  return out;
}

LossTerm translation_loss(const std::vector<C2FVolume>& pred,
                          const TargetSet& targets, const LossConfig& cfg) {
  cfg.validate();
  check_shapes(pred, targets.volumes);
  check_positives(pred, targets.positives);

  LossTerm out;
  out.gradients = zero_gradients(pred);
  const double inv_s = 1.0 / static_cast<double>(targets.positives.size());
  const double lambda[3] = {cfg.lambda_x, cfg.lambda_y, cfg.lambda_z};
  double sum = 0.0;
  for (const PositiveCell& pc : targets.positives) {
    const C2FVolume& vol = pred[pc.point_index];
    const std::size_t idx = static_cast<std::size_t>(pc.i) * vol.n_z + pc.j;
    const C2FCell& p = vol.cells[idx];
    const C2FCell& t = targets.volumes[pc.point_index].cells[idx];
    CellGradient& g = out.gradients[pc.point_index][idx];
    for (int ch = 1; ch <= 3; ++ch) {
      const double diff = cell_channel(p, ch) - cell_channel(t, ch);
      sum += lambda[ch - 1] * std::abs(diff);
      g[ch] += lambda[ch - 1] * sign_of(diff) * inv_s;
    }
  }
  out.value = sum * inv_s;
  return out;
}

LossReport total_loss(const std::vector<C2FVolume>& pred,
                      const TargetSet& targets, const LossConfig& cfg) {
  const LossTerm cls = focal_loss(pred, targets.positives, cfg);
  const LossTerm rot = rotation_loss(pred, targets, cfg);
  const LossTerm trans = translation_loss(pred, targets, cfg);

  LossReport rep;
  rep.cls = cls.value;
  rep.rot = rot.value;
  rep.trans = trans.value;
  rep.total = cfg.lambda_cls * cls.value + cfg.lambda_rot * rot.value +
              trans.value;
  rep.gradients = zero_gradients(pred);
  for (std::size_t v = 0; v < rep.gradients.size(); ++v) {
    for (std::size_t c = 0; c < rep.gradients[v].size(); ++c) {
      for (int ch = 0; ch < kCellChannels; ++ch) {
        rep.gradients[v][c][ch] = cfg.lambda_cls * cls.gradients[v][c][ch] +
                                  cfg.lambda_rot * rot.gradients[v][c][ch] +
                                  trans.gradients[v][c][ch];
      }
    }
  }
  return rep;
}

double gradcheck(const std::vector<C2FVolume>& pred, const TargetSet& targets,
                 const LossConfig& cfg, double step, std::uint64_t seed) {
  if (!(step > 0.0 && step <= 1e-3)) {
    throw InvalidArgumentError("step outside (0, 1e-3]");
  }
  cfg.validate();
  check_shapes(pred, targets.volumes);
  check_positives(pred, targets.positives);

  // Evaluate at a perturbed copy so the check never sits exactly on the
  // targets, where the L1 and Frobenius terms kink.
  std::vector<C2FVolume> x = pred;
  RandomGen rng(seed);
  for (C2FVolume& vol : x) {
    for (C2FCell& cell : vol.cells) {
      cell.confidence = std::clamp(
          cell.confidence + 0.2 * (rng.uniform() - 0.5), 0.01, 0.99);
      for (int ch = 1; ch < kCellChannels; ++ch) {
        cell_channel(cell, ch) += 0.2 * (rng.uniform() - 0.5);
      }
      if (cell.theta_cos * cell.theta_cos +
              cell.theta_sin * cell.theta_sin < 0.0025) {
        cell.theta_cos += 0.5;
      }
    }
  }

  const LossReport rep = total_loss(x, targets, cfg);
  const double inv_s = 1.0 / static_cast<double>(targets.positives.size());
  const double lambda[3] = {cfg.lambda_x, cfg.lambda_y, cfg.lambda_z};

  std::vector<std::vector<char>> mask(x.size());
  for (std::size_t v = 0; v < x.size(); ++v) {
    mask[v].assign(x[v].cells.size(), 0);
  }
  for (const PositiveCell& pc : targets.positives) {
    mask[pc.point_index]
        [static_cast<std::size_t>(pc.i) * x[pc.point_index].n_z + pc.j] = 1;
  }

  // Contribution of a single cell to the total. All other terms of the sum
  // cancel in a central difference, so only this needs re-evaluating.
  const auto cell_term = [&](const C2FCell& cell, int v, int i, int j,
                             bool positive) {
    double t = cfg.lambda_cls * focal_term(cell.confidence, positive, cfg,
                                           nullptr) * inv_s;
    if (positive) {
      const C2FCell& tc = targets.volumes[v].at(i, j);
      t += cfg.lambda_rot *
           rotation_term(cell, tc, v, i, j, x[v].n_y, x[v].n_z, false).value *
           inv_s;
      for (int ch = 1; ch <= 3; ++ch) {
        t += lambda[ch - 1] *
             std::abs(cell_channel(cell, ch) - cell_channel(tc, ch)) * inv_s;
      }
    }
    return t;
  };

  const double kink_tol = std::max(1e-4, 4.0 * step);
  double max_rel = 0.0;

  const auto check_channel = [&](int v, int i, int j, int ch, bool positive) {
    const std::size_t idx = static_cast<std::size_t>(i) * x[v].n_z + j;
    const C2FCell& cell = x[v].cells[idx];
    if (ch == 0) {
      if (cell.confidence <= kConfClip + kink_tol ||
          cell.confidence >= 1.0 - kConfClip - kink_tol) {
        return;
      }
    }
    if (positive) {
      const C2FCell& tc = targets.volumes[v].cells[idx];
      if (ch >= 1 && ch <= 3 &&
          std::abs(cell_channel(cell, ch) - cell_channel(tc, ch)) < kink_tol) {
        return;
      }
      if (ch >= 4) {
        const double f =
            rotation_term(cell, tc, v, i, j, x[v].n_y, x[v].n_z, false).value;
        if (f < kink_tol) return;
        if (ch >= 6) {
          const double n2 = cell.theta_cos * cell.theta_cos +
                            cell.theta_sin * cell.theta_sin;
          // Branch cut of the doubled-angle roll.
          if (n2 < 1e-6 ||
              (std::abs(cell.theta_sin) <= kink_tol && cell.theta_cos < 0.0)) {
            return;
          }
        }
      }
    }
    C2FCell plus = cell;
    C2FCell minus = cell;
    cell_channel(plus, ch) += step;
    cell_channel(minus, ch) -= step;
    const double fd = (cell_term(plus, v, i, j, positive) -
                       cell_term(minus, v, i, j, positive)) /
                      (2.0 * step);
    const double a = rep.gradients[v][idx][ch];
    const double rel =
        std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
    max_rel = std::max(max_rel, rel);
  };

  for (const PositiveCell& pc : targets.positives) {
    for (int ch = 0; ch < kCellChannels; ++ch) {
      check_channel(pc.point_index, pc.i, pc.j, ch, true);
    }
  }

  // Seeded sample of negative cells; only their confidence carries gradient.
  const int want = 256;
  for (int attempt = 0, found = 0; attempt < 4 * want && found < want;
       ++attempt) {
    const int v = static_cast<int>(rng.index(x.size()));
    const int i = static_cast<int>(rng.index(x[v].n_y));
    const int j = static_cast<int>(rng.index(x[v].n_z));
    if (mask[v][static_cast<std::size_t>(i) * x[v].n_z + j]) continue;
    ++found;
    for (int ch = 0; ch < kCellChannels; ++ch) {
      check_channel(v, i, j, ch, false);
    }
  }
  return max_rel;
}

}  // namespace c2f
