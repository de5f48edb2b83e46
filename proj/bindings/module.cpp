#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "c2f/codec.hpp"
#include "c2f/io.hpp"
#include "c2f/losses.hpp"
#include "c2f/metrics.hpp"
#include "c2f/sampler.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coarse-to-fine grasp detection toolkit";

  py::class_<c2f::EulerAngles>(m, "EulerAngles")
      .def(py::init<>())
      .def(py::init([](double rx, double ry, double rz) {
             c2f::EulerAngles e;
             e.rx = rx;
             e.ry = ry;
             e.rz = rz;
             return e;
           }),
           py::arg("rx"), py::arg("ry"), py::arg("rz"))
      .def_readwrite("rx", &c2f::EulerAngles::rx)
      .def_readwrite("ry", &c2f::EulerAngles::ry)
      .def_readwrite("rz", &c2f::EulerAngles::rz)
      .def_readonly("gimbal_lock", &c2f::EulerAngles::gimbal_lock);

  py::class_<c2f::GraspPose>(m, "GraspPose")
      .def(py::init<>())
      .def_readwrite("rotation", &c2f::GraspPose::rotation)
      .def_readwrite("translation", &c2f::GraspPose::translation)
      .def_readwrite("confidence", &c2f::GraspPose::confidence);

  py::class_<c2f::GripperGeometry>(m, "GripperGeometry")
      .def(py::init<>())
      .def_readwrite("max_width", &c2f::GripperGeometry::max_width)
      .def_readwrite("finger_depth", &c2f::GripperGeometry::finger_depth)
      .def_readwrite("finger_height", &c2f::GripperGeometry::finger_height)
      .def_readwrite("finger_thickness",
                     &c2f::GripperGeometry::finger_thickness)
      .def_readwrite("closing_region_origin",
                     &c2f::GripperGeometry::closing_region_origin)
      .def("validate", &c2f::GripperGeometry::validate);

  py::enum_<c2f::GraspQuality>(m, "GraspQuality")
      .value("GOOD", c2f::GraspQuality::kGood)
      .value("BAD", c2f::GraspQuality::kBad);

  py::class_<c2f::GraspLabelSet>(m, "GraspLabelSet")
      .def(py::init<>())
      .def_readwrite("grasps", &c2f::GraspLabelSet::grasps)
      .def_readwrite("labels", &c2f::GraspLabelSet::labels)
      .def_readwrite("source", &c2f::GraspLabelSet::source);

  py::class_<c2f::PointCloud>(m, "PointCloud")
      .def(py::init<>())
      .def_readwrite("points", &c2f::PointCloud::points)
      .def_readwrite("normals", &c2f::PointCloud::normals)
      .def("has_normals", &c2f::PointCloud::has_normals)
      .def("size", &c2f::PointCloud::size);

  m.def("euler_to_rotmat", &c2f::euler_to_rotmat, py::arg("angles"));
  m.def("rotmat_to_euler", &c2f::rotmat_to_euler, py::arg("rotation"));
  m.def("rotation_distance", &c2f::rotation_distance, py::arg("a"),
        py::arg("b"));
  m.def("rotation_distance_symmetric", &c2f::rotation_distance_symmetric,
        py::arg("a"), py::arg("b"));
  m.def("canonicalize_roll", &c2f::canonicalize_roll, py::arg("angles"));
  m.def("wrap_angle", &c2f::wrap_angle, py::arg("angle"));
  m.def("is_rotation", &c2f::is_rotation, py::arg("rotation"),
        py::arg("tol") = 1e-6);
  m.def("enclosed", &c2f::enclosed, py::arg("point"), py::arg("pose"),
        py::arg("gripper"));

  py::class_<c2f::C2FCell>(m, "C2FCell")
      .def(py::init<>())
      .def_readwrite("confidence", &c2f::C2FCell::confidence)
      .def_readwrite("dx", &c2f::C2FCell::dx)
      .def_readwrite("dy", &c2f::C2FCell::dy)
      .def_readwrite("dz", &c2f::C2FCell::dz)
      .def_readwrite("d_ry", &c2f::C2FCell::d_ry)
      .def_readwrite("d_rz", &c2f::C2FCell::d_rz)
      .def_readwrite("theta_cos", &c2f::C2FCell::theta_cos)
      .def_readwrite("theta_sin", &c2f::C2FCell::theta_sin);

  py::class_<c2f::C2FVolume>(m, "C2FVolume")
      .def(py::init<>())
      .def(py::init<const Eigen::Vector3d&, int, int>(),
           py::arg("grasp_point"), py::arg("n_y") = 24, py::arg("n_z") = 25)
      .def_readwrite("grasp_point", &c2f::C2FVolume::grasp_point)
      .def_readonly("n_y", &c2f::C2FVolume::n_y)
      .def_readonly("n_z", &c2f::C2FVolume::n_z)
      .def_readwrite("cells", &c2f::C2FVolume::cells)
      .def(
          "at",
          [](c2f::C2FVolume& v, int i, int j) -> c2f::C2FCell& {
            return v.at(i, j);
          },
          py::arg("i"), py::arg("j"), py::return_value_policy::reference_internal)
      .def("set",
           [](c2f::C2FVolume& v, int i, int j, const c2f::C2FCell& cell) {
             v.at(i, j) = cell;
           },
           py::arg("i"), py::arg("j"), py::arg("cell"));

  py::class_<c2f::QuantizedOrientation>(m, "QuantizedOrientation")
      .def_readonly("i", &c2f::QuantizedOrientation::i)
      .def_readonly("j", &c2f::QuantizedOrientation::j)
      .def_readonly("d_ry", &c2f::QuantizedOrientation::d_ry)
      .def_readonly("d_rz", &c2f::QuantizedOrientation::d_rz);

  py::class_<c2f::PositiveCell>(m, "PositiveCell")
      .def_readonly("point_index", &c2f::PositiveCell::point_index)
      .def_readonly("i", &c2f::PositiveCell::i)
      .def_readonly("j", &c2f::PositiveCell::j)
      .def_readonly("gt_index", &c2f::PositiveCell::gt_index);

  py::class_<c2f::TargetSet>(m, "TargetSet")
      .def(py::init<>())
      .def_readwrite("volumes", &c2f::TargetSet::volumes)
      .def_readwrite("positives", &c2f::TargetSet::positives);

  py::class_<c2f::DecodedVolume>(m, "DecodedVolume")
      .def_readonly("poses", &c2f::DecodedVolume::poses)
      .def_readonly("degenerate_cells", &c2f::DecodedVolume::degenerate_cells);

  m.def("quantize_orientation", &c2f::quantize_orientation, py::arg("ry"),
        py::arg("rz"), py::arg("n_y") = 24, py::arg("n_z") = 25);
  m.def("encode_labels", &c2f::encode_labels, py::arg("grasp_points"),
        py::arg("gt"), py::arg("gripper"), py::arg("n_y") = 24,
        py::arg("n_z") = 25);
  m.def("decode_cell", &c2f::decode_cell, py::arg("volume"), py::arg("i"),
        py::arg("j"), py::arg("gripper"));
  m.def("decode_volume", &c2f::decode_volume, py::arg("volumes"),
        py::arg("gripper"), py::arg("conf_threshold") = 0.5);

  py::class_<c2f::LossConfig>(m, "LossConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &c2f::LossConfig::alpha)
      .def_readwrite("gamma", &c2f::LossConfig::gamma)
      .def_readwrite("lambda_x", &c2f::LossConfig::lambda_x)
      .def_readwrite("lambda_y", &c2f::LossConfig::lambda_y)
      .def_readwrite("lambda_z", &c2f::LossConfig::lambda_z)
      .def_readwrite("lambda_cls", &c2f::LossConfig::lambda_cls)
      .def_readwrite("lambda_rot", &c2f::LossConfig::lambda_rot)
      .def("validate", &c2f::LossConfig::validate);

  py::class_<c2f::LossTerm>(m, "LossTerm")
      .def_readonly("value", &c2f::LossTerm::value)
      .def_readonly("gradients", &c2f::LossTerm::gradients);

  py::class_<c2f::LossReport>(m, "LossReport")
      .def_readonly("cls", &c2f::LossReport::cls)
      .def_readonly("rot", &c2f::LossReport::rot)
      .def_readonly("trans", &c2f::LossReport::trans)
      .def_readonly("total", &c2f::LossReport::total)
      .def_readonly("gradients", &c2f::LossReport::gradients);

  m.def("focal_loss", &c2f::focal_loss, py::arg("pred"), py::arg("positives"),
        py::arg("cfg") = c2f::LossConfig{});
  m.def("rotation_loss", &c2f::rotation_loss, py::arg("pred"),
        py::arg("targets"), py::arg("cfg") = c2f::LossConfig{});
  m.def("translation_loss", &c2f::translation_loss, py::arg("pred"),
        py::arg("targets"), py::arg("cfg") = c2f::LossConfig{});
  m.def("total_loss", &c2f::total_loss, py::arg("pred"), py::arg("targets"),
        py::arg("cfg") = c2f::LossConfig{});
  m.def("gradcheck", &c2f::gradcheck, py::arg("pred"), py::arg("targets"),
        py::arg("cfg") = c2f::LossConfig{}, py::arg("step") = 1e-6,
        py::arg("seed") = 0);

  py::class_<c2f::SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("neighbors_k", &c2f::SamplerConfig::neighbors_k)
      .def_readwrite("num_seed_points", &c2f::SamplerConfig::num_seed_points)
      .def_readwrite("roll_steps", &c2f::SamplerConfig::roll_steps)
      .def_readwrite("depth_steps", &c2f::SamplerConfig::depth_steps)
      .def_readwrite("friction_mu", &c2f::SamplerConfig::friction_mu)
      .def_readwrite("min_contact_points",
                     &c2f::SamplerConfig::min_contact_points)
      .def_readwrite("rng_seed", &c2f::SamplerConfig::rng_seed)
      .def("validate", &c2f::SamplerConfig::validate);

  m.def("estimate_normals", &c2f::estimate_normals, py::arg("cloud"),
        py::arg("k"), py::arg("viewpoint"));
  m.def("sample_candidates", &c2f::sample_candidates, py::arg("cloud"),
        py::arg("gripper"), py::arg("cfg") = c2f::SamplerConfig{});
  m.def("collides", &c2f::collides, py::arg("pose"), py::arg("cloud"),
        py::arg("gripper"));
  m.def("label_antipodal", &c2f::label_antipodal, py::arg("pose"),
        py::arg("cloud"), py::arg("gripper"), py::arg("mu") = 0.3);
  m.def("generate_dataset", &c2f::generate_dataset, py::arg("cloud"),
        py::arg("gripper"), py::arg("cfg") = c2f::SamplerConfig{});

  py::class_<c2f::MatchThresholds>(m, "MatchThresholds")
      .def(py::init<>())
      .def_readwrite("trans_tol", &c2f::MatchThresholds::trans_tol)
      .def_readwrite("rot_tol", &c2f::MatchThresholds::rot_tol)
      .def("validate", &c2f::MatchThresholds::validate);

  py::class_<c2f::RankMatch>(m, "RankMatch")
      .def_readonly("rank", &c2f::RankMatch::rank)
      .def_readonly("gt_index", &c2f::RankMatch::gt_index);

  py::class_<c2f::DifficultyReport>(m, "DifficultyReport")
      .def_readonly("ap", &c2f::DifficultyReport::ap)
      .def_readonly("matches", &c2f::DifficultyReport::matches)
      .def_readonly("precision_at_rank",
                    &c2f::DifficultyReport::precision_at_rank);

  py::class_<c2f::EvalReport>(m, "EvalReport")
      .def_readonly("ap_hard", &c2f::EvalReport::ap_hard)
      .def_readonly("ap_easy", &c2f::EvalReport::ap_easy)
      .def_readonly("hard", &c2f::EvalReport::hard)
      .def_readonly("easy", &c2f::EvalReport::easy)
      .def_readonly("num_predictions", &c2f::EvalReport::num_predictions)
      .def_readonly("num_after_nms", &c2f::EvalReport::num_after_nms)
      .def_readonly("num_evaluated", &c2f::EvalReport::num_evaluated)
      .def_readonly("num_ground_truth", &c2f::EvalReport::num_ground_truth)
      .def_readonly("denominator", &c2f::EvalReport::denominator);

  m.def("hard_thresholds", &c2f::hard_thresholds);
  m.def("easy_thresholds", &c2f::easy_thresholds);
  m.def("pose_match", &c2f::pose_match, py::arg("pred"), py::arg("gt"),
        py::arg("th"));
  m.def("nms", &c2f::nms, py::arg("poses"), py::arg("trans_tol") = 0.02,
        py::arg("rot_tol") = 5.0 * c2f::kPi / 180.0);
  m.def("average_precision", &c2f::average_precision, py::arg("preds"),
        py::arg("gts"), py::arg("th"));
  m.def("evaluate", &c2f::evaluate, py::arg("preds"), py::arg("gts"));
  m.def("format_report", &c2f::format_report, py::arg("report"));
  m.def("perturb_gt", &c2f::perturb_gt, py::arg("gts"), py::arg("sigma_t"),
        py::arg("sigma_r"), py::arg("seed"));

  m.def("read_ply",
        [](const std::string& path) { return c2f::read_ply(path); },
        py::arg("path"));
  m.def("write_ply",
        [](const c2f::PointCloud& cloud, const std::string& path) {
          c2f::write_ply(cloud, path);
        },
        py::arg("cloud"), py::arg("path"));
  m.def("read_grasps",
        [](const std::string& path) { return c2f::read_grasps(path); },
        py::arg("path"));
  m.def("write_grasps",
        [](const c2f::GraspLabelSet& set, const std::string& path) {
          c2f::write_grasps(set, path);
        },
        py::arg("set"), py::arg("path"));
  m.def("read_volumes",
        [](const std::string& path) { return c2f::read_volumes(path); },
        py::arg("path"));
  m.def("write_volumes",
        [](const std::vector<c2f::C2FVolume>& volumes,
           const std::string& path) { c2f::write_volumes(volumes, path); },
        py::arg("volumes"), py::arg("path"));
}
