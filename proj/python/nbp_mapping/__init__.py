"""Python surface over the C++ active-mapping core."""

from ._nbp import (  # noqa: F401
    NUM_YAW,
    CameraModel,
    CellIndex,
    CoverageConfig,
    DepthImage,
    DifficultyParams,
    EpisodeLog,
    NbpNet,
    Pose,
    Prediction,
    Scene,
    SurfelCloud,
    Vec3,
    WindowSpec,
    auc,
    backproject,
    coverage,
    difficulty_preset,
    generate_scene,
    generate_scene_named,
    gt_surface_points,
    load_scene,
    nav_complexity,
    render_depth,
    run_episode,
    save_scene,
)

__all__ = [
    "NUM_YAW",
    "CameraModel",
    "CellIndex",
    "CoverageConfig",
    "DepthImage",
    "DifficultyParams",
    "EpisodeLog",
    "NbpNet",
    "Pose",
    "Prediction",
    "Scene",
    "SurfelCloud",
    "Vec3",
    "WindowSpec",
    "auc",
    "backproject",
    "coverage",
    "difficulty_preset",
    "generate_scene",
    "generate_scene_named",
    "gt_surface_points",
    "load_scene",
    "nav_complexity",
    "render_depth",
    "run_episode",
    "save_scene",
]
