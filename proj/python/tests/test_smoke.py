import math

import numpy as np
import pytest

import c2fgrasp as c2f


def make_grasp(rx=0.3, ry=0.2, rz=-1.1, t=(0.01, -0.02, 0.03)):
    pose = c2f.GraspPose()
    pose.rotation = c2f.euler_to_rotmat(c2f.EulerAngles(rx, ry, rz))
    pose.translation = np.array(t)
    return pose


def test_euler_round_trip():
    e = c2f.EulerAngles(0.4, -0.7, 2.1)
    r = c2f.euler_to_rotmat(e)
    assert c2f.is_rotation(r)
    back = c2f.rotmat_to_euler(r)
    assert back.rx == pytest.approx(0.4, abs=1e-12)
    assert back.ry == pytest.approx(-0.7, abs=1e-12)
    assert back.rz == pytest.approx(2.1, abs=1e-12)


def test_rotation_distance_quarter_turn():
    r = c2f.euler_to_rotmat(c2f.EulerAngles(0.0, 0.0, math.pi / 2))
    d = c2f.rotation_distance(np.eye(3), r)
    assert d == pytest.approx(math.pi / 4, abs=1e-12)


def test_encode_decode_round_trip():
    gripper = c2f.GripperGeometry()
    pose = make_grasp()
    point = pose.translation + pose.rotation @ np.array([0.03, 0.0, 0.0])

    gt = c2f.GraspLabelSet()
    gt.grasps = [pose]
    gt.labels = [c2f.GraspQuality.GOOD]

    targets = c2f.encode_labels([point], gt, gripper)
    assert len(targets.positives) == 1
    cell = targets.positives[0]
    decoded = c2f.decode_cell(targets.volumes[cell.point_index], cell.i,
                              cell.j, gripper)
    assert np.linalg.norm(decoded.translation - pose.translation) < 1e-9
    assert c2f.rotation_distance_symmetric(decoded.rotation,
                                           pose.rotation) < 1e-9


def test_losses_vanish_on_exact_targets():
    gripper = c2f.GripperGeometry()
    pose = make_grasp()
    point = pose.translation + pose.rotation @ np.array([0.03, 0.0, 0.0])
    gt = c2f.GraspLabelSet()
    gt.grasps = [pose]
    gt.labels = [c2f.GraspQuality.GOOD]
    targets = c2f.encode_labels([point], gt, gripper)

    report = c2f.total_loss(targets.volumes, targets)
    assert report.rot < 1e-9
    assert report.trans < 1e-12
    assert report.cls < 1e-5


def test_gradcheck_small_grid():
    gripper = c2f.GripperGeometry()
    pose = make_grasp()
    point = pose.translation + pose.rotation @ np.array([0.03, 0.0, 0.0])
    gt = c2f.GraspLabelSet()
    gt.grasps = [pose]
    gt.labels = [c2f.GraspQuality.GOOD]
    targets = c2f.encode_labels([point], gt, gripper)

    max_rel = c2f.gradcheck(targets.volumes, targets, seed=5)
    assert max_rel < 1e-5


def test_evaluate_ground_truth_against_itself():
    poses = []
    for i in range(5):
        poses.append(make_grasp(rz=-1.1 + 0.4 * i, t=(0.1 * i, 0.0, 0.0)))
    report = c2f.evaluate(poses, poses)
    assert report.ap_hard == 1.0
    assert report.ap_easy == 1.0
    assert "ap_hard" in c2f.format_report(report)


def test_nms_suppresses_duplicates():
    pose = make_grasp()
    kept = c2f.nms([pose, pose])
    assert len(kept) == 1


def test_perturb_matches_thresholds():
    gt = c2f.GraspLabelSet()
    gt.grasps = [make_grasp(t=(0.2 * i, 0.0, 0.0)) for i in range(8)]
    gt.labels = [c2f.GraspQuality.GOOD] * 8
    preds = c2f.perturb_gt(gt, 0.002, 0.01, seed=3)
    assert len(preds) == 8
    report = c2f.evaluate(preds, gt.grasps)
    assert report.ap_hard == 1.0


def test_file_round_trips(tmp_path):
    cloud = c2f.PointCloud()
    cloud.points = [np.array([0.01 * i, 0.0, 0.02]) for i in range(20)]
    ply = tmp_path / "cloud.ply"
    c2f.write_ply(cloud, str(ply))
    again = c2f.read_ply(str(ply))
    assert np.allclose(np.array(again.points), np.array(cloud.points))

    gt = c2f.GraspLabelSet()
    gt.grasps = [make_grasp(rz=0.3 * i) for i in range(4)]
    gt.labels = [c2f.GraspQuality.GOOD, c2f.GraspQuality.BAD,
                 c2f.GraspQuality.GOOD, c2f.GraspQuality.BAD]
    gt.source = "smoke"
    gfile = tmp_path / "grasps.txt"
    c2f.write_grasps(gt, str(gfile))
    loaded = c2f.read_grasps(str(gfile))
    assert loaded.source == "smoke"
    assert [l for l in loaded.labels] == [l for l in gt.labels]
    gfile2 = tmp_path / "grasps2.txt"
    c2f.write_grasps(loaded, str(gfile2))
    assert gfile.read_bytes() == gfile2.read_bytes()

    vol = c2f.C2FVolume(np.array([0.0, 0.1, 0.2]))
    cell = vol.at(3, 4)
    cell.confidence = 0.75
    cell.theta_cos = 1.0
    vfile = tmp_path / "targets.c2fv"
    c2f.write_volumes([vol], str(vfile))
    vols = c2f.read_volumes(str(vfile))
    assert len(vols) == 1
    assert vols[0].at(3, 4).confidence == 0.75


def test_sampler_on_box():
    rng = np.random.default_rng(0)
    pts, normals = [], []
    for _ in range(1500):
        face = rng.integers(6)
        u, v = rng.uniform(-0.025, 0.025, size=2)
        axis, sign = divmod(face, 2)
        coord = 0.025 if sign == 0 else -0.025
        p = np.zeros(3)
        n = np.zeros(3)
        p[axis] = coord
        p[(axis + 1) % 3] = u
        p[(axis + 2) % 3] = v
        n[axis] = 1.0 if sign == 0 else -1.0
        pts.append(p)
        normals.append(n)
    cloud = c2f.PointCloud()
    cloud.points = pts
    cloud.normals = normals

    cfg = c2f.SamplerConfig()
    cfg.num_seed_points = 60
    cfg.rng_seed = 1
    gripper = c2f.GripperGeometry()
    dataset = c2f.generate_dataset(cloud, gripper, cfg)
    assert len(dataset.grasps) > 0
    assert len(dataset.grasps) == len(dataset.labels)
    good = sum(1 for l in dataset.labels if l == c2f.GraspQuality.GOOD)
    assert good > 0
    for g in dataset.grasps[:20]:
        assert not c2f.collides(g, cloud, gripper)


def test_invalid_inputs_raise():
    gripper = c2f.GripperGeometry()
    gripper.max_width = -1.0
    with pytest.raises(ValueError):
        gripper.validate()
    with pytest.raises(ValueError):
        c2f.evaluate([], [])
