"""Needle pose estimation, suturing simulation and experiment metrics."""

from ._stitch import (
    CinchError,
    ConfigError,
    EstimationError,
    ExperimentConfig,
    NeedlePose,
    NeedleSpec,
    NoiseModel,
    ParseError,
    cinch_length,
    compute_metrics,
    estimate_needle_pose,
    load_config,
    make_needle_pose,
    parse_config,
    pose_agreement,
    read_logs,
    report,
    run_experiment,
    run_trial,
    synth_needle_cloud,
    write_logs,
)

__all__ = [
    "CinchError",
    "ConfigError",
    "EstimationError",
    "ExperimentConfig",
    "NeedlePose",
    "NeedleSpec",
    "NoiseModel",
    "ParseError",
    "cinch_length",
    "compute_metrics",
    "estimate_needle_pose",
    "load_config",
    "make_needle_pose",
    "parse_config",
    "pose_agreement",
    "read_logs",
    "report",
    "run_experiment",
    "run_trial",
    "synth_needle_cloud",
    "write_logs",
]
