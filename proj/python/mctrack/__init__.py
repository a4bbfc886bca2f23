"""Python bindings for the mctrack tracking engine."""

from ._core import (
    Box7,
    MctrackError,
    bev_overlap_area,
    clear_counts,
    cli_main,
    corners_3d,
    default_config,
    diou_bev,
    evaluate_motion,
    generate_scenario,
    giou_bev,
    greedy,
    hungarian,
    parse_scene,
    ro_gdiou,
    ro_iou,
    savitzky_golay,
    sdiou_rv,
    track,
    vae,
    vde,
)

__all__ = [
    "Box7",
    "MctrackError",
    "bev_overlap_area",
    "clear_counts",
    "cli_main",
    "corners_3d",
    "default_config",
    "diou_bev",
    "evaluate_motion",
    "generate_scenario",
    "giou_bev",
    "greedy",
    "hungarian",
    "parse_scene",
    "ro_gdiou",
    "ro_iou",
    "savitzky_golay",
    "sdiou_rv",
    "track",
    "vae",
    "vde",
]
