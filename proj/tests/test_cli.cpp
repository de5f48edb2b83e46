#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "c2f/cli.hpp"
#include "c2f/geometry.hpp"
#include "c2f/io.hpp"

using c2f::GraspLabelSet;
using c2f::GraspPose;
using c2f::GraspQuality;
using c2f::GripperGeometry;
using c2f::PointCloud;

namespace {

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::vector<const char*> argv;
  argv.push_back("c2fgrasp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = c2f::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "c2fcli-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    REQUIRE(mkdtemp(buf.data()) != nullptr);
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

PointCloud box_cloud(double edge, int per_face) {
  PointCloud cloud;
  const double h = edge / 2.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      for (int a = 0; a < per_face; ++a) {
        for (int b = 0; b < per_face; ++b) {
          const double u = -h + edge * (a + 0.5) / per_face;
          const double v = -h + edge * (b + 0.5) / per_face;
          Eigen::Vector3d p = Eigen::Vector3d::Zero();
          p[axis] = sign * h;
          p[(axis + 1) % 3] = u;
          p[(axis + 2) % 3] = v;
          Eigen::Vector3d n = Eigen::Vector3d::Zero();
          n[axis] = sign;
          cloud.points.push_back(p);
          cloud.normals.push_back(n);
        }
      }
    }
  }
  return cloud;
}

// A cloud of points strictly inside the closing region of one grasp, so
// every point earns that grasp as a positive when encoded.
void make_encode_fixture(const TempDir& dir, GraspPose* gt_out) {
  GripperGeometry grip;
  c2f::EulerAngles e;
  e.rx = 0.3;
  e.ry = 0.4;
  e.rz = -0.5;
  GraspPose g;
  g.rotation = c2f::euler_to_rotmat(e);
  g.translation = Eigen::Vector3d(0.04, -0.02, 0.05);
  g.confidence = 1.0;

  PointCloud cloud;
  for (double a : {0.25, 0.5, 0.75}) {
    for (double b : {0.25, 0.5, 0.75}) {
      for (double c : {0.25, 0.5, 0.75}) {
        const Eigen::Vector3d local =
            grip.closing_region_origin +
            Eigen::Vector3d(a * grip.finger_depth,
                            (b - 0.5) * grip.max_width,
                            (c - 0.5) * grip.finger_height);
        cloud.points.push_back(g.rotation * local + g.translation);
      }
    }
  }
  c2f::write_ply(cloud, dir.file("region.ply"));

  GraspLabelSet set;
  set.grasps.push_back(g);
  set.labels.push_back(GraspQuality::kGood);
  c2f::write_grasps(set, dir.file("gt.txt"));
  *gt_out = g;
}

}  // namespace

TEST_CASE("cli rejects bad invocations") {
  std::string out;
  std::string err;

  CHECK(run({}) == 1);
  CHECK(run({"frobnicate"}) == 1);
  CHECK(run({"decode", "--bogus", "x"}) == 1);

  CHECK(run({"--help"}, &out) == 0);
  CHECK(out.find("sample") != std::string::npos);
  CHECK(out.find("evaluate") != std::string::npos);

  // --seed has no default anywhere it appears.
  CHECK(run({"sample", "--cloud", "a.ply", "--out", "b.txt"}) == 1);
  CHECK(run({"losscheck", "--pred", "a", "--target", "b"}) == 1);
  CHECK(run({"perturb", "--gt", "a", "--out", "b"}) == 1);

  CHECK(run({"evaluate", "--pred", "/nonexistent/p.txt", "--gt",
             "/nonexistent/g.txt"},
            &out, &err) == 1);
  CHECK(err.find("error:") != std::string::npos);
  CHECK(err.find("cannot open") != std::string::npos);
}

TEST_CASE("cli sample writes a deterministic grasp file") {
  TempDir dir;
  c2f::write_ply(box_cloud(0.05, 12), dir.file("box.ply"));

  const std::vector<std::string> args = {
      "sample",        "--cloud", dir.file("box.ply"),
      "--out",         dir.file("g1.txt"),
      "--seed",        "7",
      "--num-seeds",   "80",
      "--neighbors-k", "12",
      "--roll-steps",  "3",
      "--depth-steps", "2"};
  std::string out;
  REQUIRE(run(args, &out) == 0);
  CHECK(out.find("sampled") != std::string::npos);

  const GraspLabelSet set = c2f::read_grasps(dir.file("g1.txt"));
  CHECK(!set.grasps.empty());
  CHECK(set.source.find("seed=7") != std::string::npos);

  std::vector<std::string> again = args;
  again[4] = dir.file("g2.txt");
  REQUIRE(run(again) == 0);
  CHECK(slurp(dir.file("g2.txt")) == slurp(dir.file("g1.txt")));

  std::vector<std::string> bad = args;
  bad[2] = dir.file("missing.ply");
  CHECK(run(bad) == 1);
}

TEST_CASE("cli encode decode evaluate round trip") {
  TempDir dir;
  GraspPose gt;
  make_encode_fixture(dir, &gt);

  std::string out;
  REQUIRE(run({"encode", "--cloud", dir.file("region.ply"), "--grasps",
               dir.file("gt.txt"), "--out", dir.file("vol.c2fv")},
              &out) == 0);
  CHECK(out.find("encoded 27 grasp points") != std::string::npos);
  CHECK(out.find("positives: 27") != std::string::npos);

  REQUIRE(run({"decode", "--volumes", dir.file("vol.c2fv"), "--out",
               dir.file("dec.txt"), "--conf-threshold", "0.5", "--nms"},
              &out) == 0);
  CHECK(out.find("decoded") != std::string::npos);

  const GraspLabelSet decoded = c2f::read_grasps(dir.file("dec.txt"));
  REQUIRE(decoded.grasps.size() == 1);
  CHECK(c2f::rotation_distance_symmetric(decoded.grasps[0].rotation,
                                         gt.rotation) < 1e-6);
  CHECK((decoded.grasps[0].translation - gt.translation).norm() < 1e-6);

  REQUIRE(run({"evaluate", "--pred", dir.file("dec.txt"), "--gt",
               dir.file("gt.txt")},
              &out) == 0);
  CHECK(out.find("ap_hard (2 cm, 5 deg):  1.0000") != std::string::npos);
  CHECK(out.find("ap_easy (2 cm, 10 deg): 1.0000") != std::string::npos);
  CHECK(out.find("rank 1 -> gt 0") != std::string::npos);

  CHECK(run({"decode", "--volumes", dir.file("vol.c2fv"), "--out",
             dir.file("x.txt"), "--conf-threshold", "1.5"}) == 1);
  CHECK(run({"encode", "--cloud", dir.file("region.ply"), "--grasps",
             dir.file("gt.txt"), "--out", dir.file("y.c2fv"), "--ny",
             "0"}) == 1);
}

TEST_CASE("cli losscheck verifies gradients on encoded targets") {
  TempDir dir;
  GraspPose gt;
  make_encode_fixture(dir, &gt);
  REQUIRE(run({"encode", "--cloud", dir.file("region.ply"), "--grasps",
               dir.file("gt.txt"), "--out", dir.file("vol.c2fv")}) == 0);

  std::string out;
  REQUIRE(run({"losscheck", "--pred", dir.file("vol.c2fv"), "--target",
               dir.file("vol.c2fv"), "--seed", "5"},
              &out) == 0);
  CHECK(out.find("total") != std::string::npos);
  CHECK(out.find("gradcheck max relative error") != std::string::npos);

  CHECK(run({"losscheck", "--pred", dir.file("vol.c2fv"), "--target",
             dir.file("vol.c2fv"), "--seed", "5", "--step", "2e-3"}) == 1);
}

TEST_CASE("cli perturb is seeded and repeatable") {
  TempDir dir;
  GraspPose gt;
  make_encode_fixture(dir, &gt);

  const std::vector<std::string> args = {
      "perturb", "--gt",      dir.file("gt.txt"),
      "--out",   dir.file("p1.txt"),
      "--sigma-t", "0.01",    "--sigma-r", "0.05",
      "--seed",  "11"};
  std::string out;
  REQUIRE(run(args, &out) == 0);
  CHECK(out.find("perturbed 1 good grasps") != std::string::npos);

  std::vector<std::string> again = args;
  again[4] = dir.file("p2.txt");
  REQUIRE(run(again) == 0);
  CHECK(slurp(dir.file("p2.txt")) == slurp(dir.file("p1.txt")));

  std::vector<std::string> other_seed = args;
  other_seed[4] = dir.file("p3.txt");
  other_seed[10] = "12";
  REQUIRE(run(other_seed) == 0);
  CHECK(slurp(dir.file("p3.txt")) != slurp(dir.file("p1.txt")));

  const GraspLabelSet p = c2f::read_grasps(dir.file("p1.txt"));
  REQUIRE(p.grasps.size() == 1);
  CHECK(p.source == "perturb seed=11");
  CHECK((p.grasps[0].translation - gt.translation).norm() < 0.1);
}
