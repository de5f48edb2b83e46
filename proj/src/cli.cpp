#include "c2f/cli.hpp"

#include <cstdint>
#include <exception>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "c2f/codec.hpp"
#include "c2f/io.hpp"
#include "c2f/losses.hpp"
#include "c2f/metrics.hpp"
#include "c2f/sampler.hpp"

namespace c2f {

namespace {

void add_gripper_flags(CLI::App* cmd, GripperGeometry* g) {
  cmd->add_option("--max-width", g->max_width, "Gripper opening in meters")
      ->capture_default_str();
  cmd->add_option("--finger-depth", g->finger_depth,
                  "Finger depth in meters")
      ->capture_default_str();
  cmd->add_option("--finger-height", g->finger_height,
                  "Finger height in meters")
      ->capture_default_str();
  cmd->add_option("--finger-thickness", g->finger_thickness,
                  "Finger thickness in meters")
      ->capture_default_str();
}

struct SampleArgs {
  std::string cloud;
  std::string out;
  GripperGeometry gripper;
  SamplerConfig cfg;
};

struct EncodeArgs {
  std::string cloud;
  std::string grasps;
  std::string out;
  GripperGeometry gripper;
  int n_y = 24;
  int n_z = 25;
};

struct DecodeArgs {
  std::string volumes;
  std::string out;
  GripperGeometry gripper;
  double conf_threshold = 0.5;
  bool apply_nms = false;
};

struct EvaluateArgs {
  std::string pred;
  std::string gt;
};

struct LosscheckArgs {
  std::string pred;
  std::string target;
  double step = 1e-6;
  std::uint64_t seed = 0;
};

struct PerturbArgs {
  std::string gt;
  std::string out;
  double sigma_t = 0.0;
  double sigma_r = 0.0;
  std::uint64_t seed = 0;
};

void run_sample(const SampleArgs& a) {
  const PointCloud cloud = read_ply(a.cloud);
  const GraspLabelSet set = generate_dataset(cloud, a.gripper, a.cfg);
  write_grasps(set, a.out);
  std::size_t good = 0;
  for (GraspQuality q : set.labels) {
    if (q == GraspQuality::kGood) ++good;
  }
  std::cout << "sampled " << set.grasps.size() << " candidates (" << good
            << " good) -> " << a.out << "\n";
}

void run_encode(const EncodeArgs& a) {
  const PointCloud cloud = read_ply(a.cloud);
  const GraspLabelSet gt = read_grasps(a.grasps);
  const TargetSet targets =
      encode_labels(cloud.points, gt, a.gripper, a.n_y, a.n_z);
  write_volumes(targets.volumes, a.out);
  std::cout << "encoded " << targets.volumes.size() << " grasp points -> "
            << a.out << "\n";
  std::cout << "positives: " << targets.positives.size() << "\n";
}

void run_decode(const DecodeArgs& a) {
  const std::vector<C2FVolume> volumes = read_volumes(a.volumes);
  const DecodedVolume decoded =
      decode_volume(volumes, a.gripper, a.conf_threshold);
  std::vector<GraspPose> poses = decoded.poses;
  if (a.apply_nms) poses = nms(poses);

  GraspLabelSet out;
  out.grasps = poses;
  out.labels.assign(poses.size(), GraspQuality::kGood);
  write_grasps(out, a.out);
  std::cout << "decoded " << poses.size() << " grasps";
  if (decoded.degenerate_cells > 0) {
    std::cout << " (" << decoded.degenerate_cells
              << " degenerate cells skipped)";
  }
  std::cout << " -> " << a.out << "\n";
}

void run_evaluate(const EvaluateArgs& a) {
  const GraspLabelSet pred = read_grasps(a.pred);
  const GraspLabelSet gt = read_grasps(a.gt);
  std::vector<GraspPose> gt_poses;
  for (std::size_t i = 0; i < gt.grasps.size(); ++i) {
    if (gt.labels[i] == GraspQuality::kGood) gt_poses.push_back(gt.grasps[i]);
  }
  const EvalReport report = evaluate(pred.grasps, gt_poses);
  std::cout << format_report(report);
}

void run_losscheck(const LosscheckArgs& a) {
  const std::vector<C2FVolume> pred = read_volumes(a.pred);
  TargetSet targets;
  targets.volumes = read_volumes(a.target);
  for (std::size_t v = 0; v < targets.volumes.size(); ++v) {
    const C2FVolume& vol = targets.volumes[v];
    for (int i = 0; i < vol.n_y; ++i) {
      for (int j = 0; j < vol.n_z; ++j) {
        if (vol.at(i, j).confidence >= 0.5) {
          targets.positives.push_back(
              {static_cast<int>(v), i, j, /*gt_index=*/-1});
        }
      }
    }
  }
  const LossConfig cfg;
  const LossReport report = total_loss(pred, targets, cfg);
  const double max_rel = gradcheck(pred, targets, cfg, a.step, a.seed);
  std::cout << "cls   = " << report.cls << "\n";
  std::cout << "rot   = " << report.rot << "\n";
  std::cout << "trans = " << report.trans << "\n";
  std::cout << "total = " << report.total << "\n";
  std::cout << "gradcheck max relative error = " << max_rel << "\n";
}

void run_perturb(const PerturbArgs& a) {
  const GraspLabelSet gt = read_grasps(a.gt);
  GraspLabelSet out;
  out.grasps = perturb_gt(gt, a.sigma_t, a.sigma_r, a.seed);
  out.labels.assign(out.grasps.size(), GraspQuality::kGood);
  out.source = "perturb seed=" + std::to_string(a.seed);
  write_grasps(out, a.out);
  std::cout << "perturbed " << out.grasps.size() << " good grasps -> "
            << a.out << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"coarse-to-fine grasp detection toolkit"};
  app.require_subcommand(1);

  auto sample = std::make_shared<SampleArgs>();
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "Sample grasp candidates from a cloud");
  sample_cmd->add_option("--cloud", sample->cloud, "Input PLY cloud")
      ->required();
  sample_cmd->add_option("--out", sample->out, "Output grasp file")
      ->required();
  sample_cmd->add_option("--seed", sample->cfg.rng_seed, "RNG seed")
      ->required();
  sample_cmd
      ->add_option("--num-seeds", sample->cfg.num_seed_points,
                   "Seed points to try")
      ->capture_default_str();
  sample_cmd
      ->add_option("--neighbors-k", sample->cfg.neighbors_k,
                   "Neighborhood size for frames and normals")
      ->capture_default_str();
  sample_cmd
      ->add_option("--roll-steps", sample->cfg.roll_steps,
                   "Rolls per seed over half a turn")
      ->capture_default_str();
  sample_cmd
      ->add_option("--depth-steps", sample->cfg.depth_steps,
                   "Depth offsets per roll")
      ->capture_default_str();
  sample_cmd->add_option("--mu", sample->cfg.friction_mu,
                         "Friction coefficient")
      ->capture_default_str();
  sample_cmd
      ->add_option("--min-contacts", sample->cfg.min_contact_points,
                   "Minimum enclosed points per candidate")
      ->capture_default_str();
  add_gripper_flags(sample_cmd, &sample->gripper);
  sample_cmd->callback([sample] { run_sample(*sample); });

  auto encode = std::make_shared<EncodeArgs>();
  CLI::App* encode_cmd = app.add_subcommand(
      "encode", "Encode ground-truth grasps into target volumes");
  encode_cmd->add_option("--cloud", encode->cloud,
                         "PLY cloud whose points become grasp points")
      ->required();
  encode_cmd->add_option("--grasps", encode->grasps,
                         "Ground-truth grasp file")
      ->required();
  encode_cmd->add_option("--out", encode->out, "Output volume file")
      ->required();
  encode_cmd->add_option("--ny", encode->n_y, "Pitch bins")
      ->capture_default_str();
  encode_cmd->add_option("--nz", encode->n_z, "Yaw bins")
      ->capture_default_str();
  add_gripper_flags(encode_cmd, &encode->gripper);
  encode_cmd->callback([encode] { run_encode(*encode); });

  auto decode = std::make_shared<DecodeArgs>();
  CLI::App* decode_cmd =
      app.add_subcommand("decode", "Decode volumes back into grasps");
  decode_cmd->add_option("--volumes", decode->volumes, "Input volume file")
      ->required();
  decode_cmd->add_option("--out", decode->out, "Output grasp file")
      ->required();
  decode_cmd
      ->add_option("--conf-threshold", decode->conf_threshold,
                   "Confidence cutoff in [0, 1]")
      ->capture_default_str();
  decode_cmd->add_flag("--nms", decode->apply_nms,
                       "Suppress overlapping poses (2 cm, 5 deg)");
  add_gripper_flags(decode_cmd, &decode->gripper);
  decode_cmd->callback([decode] { run_decode(*decode); });

  auto evaluate_args = std::make_shared<EvaluateArgs>();
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "Score predictions against ground truth");
  evaluate_cmd->add_option("--pred", evaluate_args->pred,
                           "Predicted grasp file")
      ->required();
  evaluate_cmd->add_option("--gt", evaluate_args->gt,
                           "Ground-truth grasp file")
      ->required();
  evaluate_cmd->callback([evaluate_args] { run_evaluate(*evaluate_args); });

  auto losscheck = std::make_shared<LosscheckArgs>();
  CLI::App* losscheck_cmd = app.add_subcommand(
      "losscheck", "Compute losses and verify gradients numerically");
  losscheck_cmd->add_option("--pred", losscheck->pred,
                            "Predicted volume file")
      ->required();
  losscheck_cmd->add_option("--target", losscheck->target,
                            "Target volume file")
      ->required();
  losscheck_cmd->add_option("--step", losscheck->step,
                            "Finite-difference step")
      ->capture_default_str();
  losscheck_cmd->add_option("--seed", losscheck->seed, "RNG seed")
      ->required();
  losscheck_cmd->callback([losscheck] { run_losscheck(*losscheck); });

  auto perturb = std::make_shared<PerturbArgs>();
  CLI::App* perturb_cmd = app.add_subcommand(
      "perturb", "Turn good ground-truth grasps into noisy predictions");
  perturb_cmd->add_option("--gt", perturb->gt, "Ground-truth grasp file")
      ->required();
  perturb_cmd->add_option("--out", perturb->out, "Output grasp file")
      ->required();
  perturb_cmd
      ->add_option("--sigma-t", perturb->sigma_t,
                   "Translation noise per axis in meters")
      ->capture_default_str();
  perturb_cmd
      ->add_option("--sigma-r", perturb->sigma_r,
                   "Rotation noise in radians")
      ->capture_default_str();
  perturb_cmd->add_option("--seed", perturb->seed, "RNG seed")->required();
  perturb_cmd->callback([perturb] { run_perturb(*perturb); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace c2f
