"""Supervision-signal and evaluation core for multi-task scene understanding."""

try:
    # wheel layout: extension lives inside the package
    from ._sceneflowkit import (  # noqa: F401
        SfkError,
        bilinear_warp,
        boundary_mask,
        consistency_mask,
        dynamic_prior_mask,
        eval_depth,
        eval_flow,
        eval_motion_seg,
        eval_semantic,
        final_mask,
        motion_probability,
        motion_segmentation,
        refine_flow,
        render_scene,
        rigid_flow,
        self_distillation_loss,
    )
except ImportError:
    # in-tree build: extension sits on sys.path next to the build dir
    from _sceneflowkit import (  # noqa: F401
        SfkError,
        bilinear_warp,
        boundary_mask,
        consistency_mask,
        dynamic_prior_mask,
        eval_depth,
        eval_flow,
        eval_motion_seg,
        eval_semantic,
        final_mask,
        motion_probability,
        motion_segmentation,
        refine_flow,
        render_scene,
        rigid_flow,
        self_distillation_loss,
    )

__all__ = [
    "SfkError",
    "bilinear_warp",
    "boundary_mask",
    "consistency_mask",
    "dynamic_prior_mask",
    "eval_depth",
    "eval_flow",
    "eval_motion_seg",
    "eval_semantic",
    "final_mask",
    "motion_probability",
    "motion_segmentation",
    "refine_flow",
    "render_scene",
    "rigid_flow",
    "self_distillation_loss",
]
