"""Coarse-to-fine grasp detection toolkit."""

from c2fgrasp._core import (
    C2FCell,
    C2FVolume,
    DecodedVolume,
    DifficultyReport,
    EulerAngles,
    EvalReport,
    GraspLabelSet,
    GraspPose,
    GraspQuality,
    GripperGeometry,
    LossConfig,
    LossReport,
    LossTerm,
    MatchThresholds,
    PointCloud,
    PositiveCell,
    QuantizedOrientation,
    RankMatch,
    SamplerConfig,
    TargetSet,
    average_precision,
    canonicalize_roll,
    collides,
    decode_cell,
    decode_volume,
    enclosed,
    encode_labels,
    estimate_normals,
    euler_to_rotmat,
    evaluate,
    focal_loss,
    format_report,
    generate_dataset,
    gradcheck,
    hard_thresholds,
    easy_thresholds,
    is_rotation,
    label_antipodal,
    nms,
    perturb_gt,
    pose_match,
    quantize_orientation,
    read_grasps,
    read_ply,
    read_volumes,
    rotation_distance,
    rotation_distance_symmetric,
    rotation_loss,
    rotmat_to_euler,
    sample_candidates,
    total_loss,
    translation_loss,
    wrap_angle,
    write_grasps,
    write_ply,
    write_volumes,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
