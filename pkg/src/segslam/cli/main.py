"""
segslam - Command Line Interface.

Main entry point for the CLI application.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click
from rich.console import Console
from rich.table import Table

from segslam import __version__
from segslam.dataset import (
    FrameDataset,
    load_dataset,
    read_mask_directory,
    write_dataset,
    write_mask_directory,
)
from segslam.evaluation import (
    AteReport,
    ExperimentSummary,
    ReportWriter,
    SegReport,
    ate,
    read_tum,
    segmentation_report,
    write_tum,
)
from segslam.exceptions import ConfigurationError
from segslam.mapping import save_map
from segslam.pipeline import Mode, PipelineResult, SegSlamConfig, run_experiment, run_pipeline
from segslam.segmentation import ClassTable
from segslam.simulator import generate, load_scene_spec, second_pass

logger = logging.getLogger(__name__)

console = Console()

TRAJECTORY_FILE = "trajectory.txt"
TRACKING_MAP_FILE = "tracking_map.bin"
LONG_TERM_MAP_FILE = "long_term_map.bin"
MASKS_DIR = "masks"


@click.group()
@click.version_option(version=__version__, prog_name="segslam")
@click.option(
    "--verbose",
    "-v",
    is_flag=True,
    help="Enable verbose logging (DEBUG level)",
)
@click.option(
    "--config",
    "-c",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Path to configuration file (default: config/segslam.yaml when present)",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config: Optional[Path]) -> None:
    """
    segslam - SLAM and instance segmentation that refine each other.

    Segmentation masks decide which features drive camera tracking; the
    tracked poses carry refined masks into the next frame.

    \b
    Quick Start:
        1. Simulate a scene:     segslam simulate --scene scene.yaml -o data/
        2. Track it:             segslam track --dataset data/ -o out/
        3. Compare modes:        segslam experiment --scene scene.yaml --runs 10

    \b
    Examples:
        # Second pass against a stored long-term map
        $ segslam relocalize --dataset data2/ --map out/long_term_map.bin -o out2/

        # Score a trajectory against ground truth
        $ segslam evaluate --trajectory out/trajectory.txt --groundtruth data/groundtruth.txt

    For more help on each command, run:
        segslam <command> --help
    """
    log_level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config
    ctx.obj["verbose"] = verbose

    logger.debug("segslam CLI v%s initialized", __version__)
    if config:
        logger.debug("Using config file: %s", config)


# ----------------------------------------------------------------------
# Shared options
# ----------------------------------------------------------------------
_PIPELINE_OPTIONS = [
    click.option("--seed", type=int, help="Base random seed (run r uses seed + r)"),
    click.option(
        "--mask-dir",
        type=click.Path(exists=True, file_okay=False, path_type=Path),
        help="Read coarse masks from this directory instead of corrupting ground truth",
    ),
    click.option(
        "--class-table",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="CSV class table (class_id,name,moveable)",
    ),
    click.option("--drop-rate", type=float, help="Probability of dropping a ground-truth region"),
    click.option("--dilate-rate", type=float, help="Probability of dilating a ground-truth region"),
    click.option("--keyframe-interval", type=int, help="Frames between map updates"),
    click.option("--merge-radius", type=float, help="Map point merge radius in metres"),
    click.option("--match-threshold", type=float, help="Region similarity threshold"),
    click.option("--huber-delta", type=float, help="Huber threshold in pixels"),
    click.option("--max-iterations", type=int, help="Pose solver iteration cap"),
    click.option("--match-dist-3d", type=float, help="Static/moving distance threshold in metres"),
    click.option("--moving-fraction", type=float, help="Moving-feature fraction for a moving instance"),
    click.option("--pixel-match-radius", type=float, help="Projection search radius in pixels"),
]


def pipeline_options(func: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(_PIPELINE_OPTIONS):
        func = option(func)
    return func


def _overrides(**flags: Any) -> dict[str, Any]:
    """Lay out flag values the way the YAML file is laid out."""

    return {
        "pipeline": {
            key: flags.get(key)
            for key in ("dataset", "mode", "seed", "mask_dir", "class_table", "map_path", "workers")
        },
        "tracking": {
            key: flags.get(key)
            for key in (
                "huber_delta",
                "max_iterations",
                "match_dist_3d",
                "moving_fraction",
                "pixel_match_radius",
            )
        },
        "corruption": {"drop_rate": flags.get("drop_rate"), "dilate_rate": flags.get("dilate_rate")},
        "mapping": {
            "keyframe_interval": flags.get("keyframe_interval"),
            "merge_radius": flags.get("merge_radius"),
        },
        "similarity": {"match_threshold": flags.get("match_threshold")},
    }


def _config(ctx: click.Context) -> SegSlamConfig:
    return SegSlamConfig(ctx.obj.get("config_path") if ctx.obj else None)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------
@cli.command()
@click.option(
    "--scene",
    "-s",
    "scene_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Scene spec YAML file",
)
@click.option(
    "--output",
    "-o",
    "output_dir",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory to write",
)
@click.option("--seed", type=int, help="Override the scene seed")
@click.option(
    "--second-pass",
    "replay",
    is_flag=True,
    help="Write the replay pass (relocated objects, shifted camera) instead",
)
def simulate(scene_path: Path, output_dir: Path, seed: Optional[int], replay: bool) -> None:
    """
    Generate a synthetic dataset from a scene spec.

    \b
    Example:
        $ segslam simulate --scene scene.yaml --output data/
        $ segslam simulate -s scene.yaml -o data2/ --second-pass
    """
    spec = load_scene_spec(scene_path)
    if seed is not None:
        spec = spec.model_copy(update={"seed": seed})
    bundle = second_pass(spec) if replay else generate(spec)
    write_dataset(bundle, output_dir)

    click.echo("🎬 Scene Simulation")
    click.echo(f"📂 Scene: {scene_path}")
    click.echo(f"🔁 Pass: {'second' if replay else 'first'}")
    click.echo(f"🖼️  Frames: {len(bundle)}")
    click.echo(f"📁 Output: {output_dir}")


@cli.command()
@click.option(
    "--dataset",
    "-d",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory",
)
@click.option(
    "--output",
    "-o",
    "output_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("./output"),
    help="Output directory (default: ./output)",
)
@click.option(
    "--mode",
    "-m",
    type=click.Choice([Mode.FULL.value, Mode.TRACK_ONLY.value, Mode.BASELINE.value]),
    help="Pipeline mode (default: full)",
)
@pipeline_options
@click.pass_context
def track(ctx: click.Context, output_dir: Path, **flags: Any) -> None:
    """
    Track a dataset; write the trajectory, both maps and refined masks.

    \b
    Example:
        $ segslam track --dataset data/ --output out/
        $ segslam track -d data/ -o out/ --mode baseline --drop-rate 0.2
    """
    cfg = _config(ctx).pipeline_config(_overrides(**flags))
    dataset = load_dataset(cfg.dataset)
    result = run_pipeline(cfg, dataset)

    output_dir.mkdir(parents=True, exist_ok=True)
    write_tum(result.trajectory, output_dir / TRAJECTORY_FILE)
    save_map(result.tracking_map, output_dir / TRACKING_MAP_FILE)
    save_map(result.long_term_map, output_dir / LONG_TERM_MAP_FILE)
    write_mask_directory(output_dir / MASKS_DIR, result.segmentations)

    click.echo("🛰️  Tracking")
    click.echo(f"📂 Dataset: {cfg.dataset}")
    click.echo(f"⚙️  Mode: {cfg.mode.value}")
    _echo_run(result)
    _report_against_truth(output_dir, cfg.mode.value, result, dataset)
    click.echo(f"📁 Output: {output_dir}")


@cli.command()
@click.option(
    "--dataset",
    "-d",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory of the second pass",
)
@click.option(
    "--map",
    "map_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Map file written by `segslam track`",
)
@click.option(
    "--output",
    "-o",
    "output_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("./output"),
    help="Output directory (default: ./output)",
)
@pipeline_options
@click.pass_context
def relocalize(ctx: click.Context, output_dir: Path, **flags: Any) -> None:
    """
    Track a dataset against a stored map without updating it.

    \b
    Example:
        $ segslam relocalize --dataset data2/ --map out/long_term_map.bin -o out2/
    """
    cfg = _config(ctx).pipeline_config(_overrides(mode=Mode.SECOND_PASS.value, **flags))
    dataset = load_dataset(cfg.dataset)
    result = run_pipeline(cfg, dataset)

    output_dir.mkdir(parents=True, exist_ok=True)
    write_tum(result.trajectory, output_dir / TRAJECTORY_FILE)

    click.echo("🧭 Relocalization")
    click.echo(f"📂 Dataset: {cfg.dataset}")
    click.echo(f"🗺️  Map: {cfg.map_path}")
    _echo_run(result)
    _report_against_truth(output_dir, "relocalize", result, dataset)
    click.echo(f"📁 Output: {output_dir}")


@cli.command()
@click.option(
    "--trajectory",
    "-t",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Estimated trajectory (TUM format)",
)
@click.option(
    "--groundtruth",
    "-g",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Ground-truth trajectory (TUM format)",
)
@click.option(
    "--masks",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Predicted mask directory",
)
@click.option(
    "--gt-masks",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Ground-truth mask directory",
)
@click.option(
    "--class-table",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="CSV class table for the mask directories",
)
@click.option("--label", default="estimate", help="Row label in the reports (default: estimate)")
@click.option(
    "--output",
    "-o",
    "output_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("./output"),
    help="Output directory (default: ./output)",
)
def evaluate(
    trajectory: Optional[Path],
    groundtruth: Optional[Path],
    masks: Optional[Path],
    gt_masks: Optional[Path],
    class_table: Optional[Path],
    label: str,
    output_dir: Path,
) -> None:
    """
    Score a trajectory and/or mask directory against ground truth.

    \b
    Example:
        $ segslam evaluate -t out/trajectory.txt -g data/groundtruth.txt
        $ segslam evaluate --masks out/masks --gt-masks data/masks -o scores/
    """
    if (trajectory is None) != (groundtruth is None):
        raise click.UsageError("--trajectory and --groundtruth go together")
    if (masks is None) != (gt_masks is None):
        raise click.UsageError("--masks and --gt-masks go together")
    if trajectory is None and masks is None:
        raise click.UsageError("nothing to evaluate")

    ate_reports: dict[str, AteReport] = {}
    seg_reports: dict[str, SegReport] = {}
    if trajectory is not None and groundtruth is not None:
        ate_reports[label] = ate(read_tum(trajectory), read_tum(groundtruth))
    if masks is not None and gt_masks is not None:
        table = ClassTable.from_csv(class_table) if class_table else ClassTable.coco_default()
        n_frames = len(sorted(gt_masks.glob("*.pgm")))
        seg_reports[label] = segmentation_report(
            read_mask_directory(masks, n_frames, table),
            read_mask_directory(gt_masks, n_frames, table),
        )

    summary = ExperimentSummary(ate=ate_reports, segmentation=seg_reports)
    ReportWriter(output_dir).write_summary(summary)
    click.echo("📏 Evaluation")
    _print_summary(summary)
    click.echo(f"📁 Output: {output_dir}")


@cli.command()
@click.option(
    "--scene",
    "-s",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Scene spec YAML file (simulated runs)",
)
@click.option(
    "--dataset",
    "-d",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Dataset directory (runs differ only in corruption seed)",
)
@click.option("--runs", "-n", type=int, help="Number of runs per mode (default: 10)")
@click.option(
    "--mode",
    "-m",
    "modes",
    multiple=True,
    type=click.Choice([Mode.FULL.value, Mode.TRACK_ONLY.value, Mode.BASELINE.value]),
    help="Mode to run; repeat for several (default: full, track_only, baseline)",
)
@click.option(
    "--relocalization/--no-relocalization",
    default=None,
    help="Also run the two-pass relocalization comparison",
)
@click.option("--workers", "-p", type=int, help="Parallel worker processes (default: 1)")
@click.option(
    "--output",
    "-o",
    "output_dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Report directory (default: results)",
)
@pipeline_options
@click.pass_context
def experiment(
    ctx: click.Context,
    scene: Optional[Path],
    runs: Optional[int],
    modes: tuple[str, ...],
    relocalization: Optional[bool],
    output_dir: Optional[Path],
    **flags: Any,
) -> None:
    """
    Run every mode repeatedly and write the comparison reports.

    \b
    Example:
        $ segslam experiment --scene scene.yaml --runs 10 -o results/
        $ segslam experiment -s two_pass.yaml --relocalization --workers 4
    """
    config = _config(ctx)
    exp_cfg = config.experiment_config(
        {
            "runs": runs,
            "modes": list(modes) or None,
            "relocalization": relocalization,
            "output_dir": output_dir,
            "scene": scene,
        }
    )
    cfg = config.pipeline_config(_overrides(**flags))
    spec = load_scene_spec(exp_cfg.scene) if exp_cfg.scene is not None else None
    if spec is None and cfg.dataset is None:
        raise ConfigurationError("experiment needs --scene or --dataset")

    click.echo("🧪 Experiment")
    click.echo(f"📂 Source: {exp_cfg.scene or cfg.dataset}")
    click.echo(f"🔁 Runs: {exp_cfg.runs}")
    click.echo(f"⚙️  Modes: {', '.join(m.value for m in exp_cfg.modes)}")
    click.echo(f"⚡ Parallelism: {cfg.workers} workers")
    click.echo()

    report = run_experiment(
        cfg,
        exp_cfg.runs,
        scene=spec,
        modes=exp_cfg.modes,
        relocalization=exp_cfg.relocalization,
        output_dir=exp_cfg.output_dir,
        workers=cfg.workers,
    )
    _print_summary(report.summary)
    click.echo(f"📁 Output: {exp_cfg.output_dir}")


# ----------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------
def _echo_run(result: PipelineResult) -> None:
    click.echo(f"🖼️  Frames: {len(result.frames)}")
    click.echo(f"📍 Tracked: {len(result.trajectory)}")
    if result.lost_frames:
        click.echo(f"⚠️  Lost frames: {', '.join(str(i) for i in result.lost_frames)}")
    click.echo(f"🗺️  Tracking map: {len(result.tracking_map)} points")
    click.echo(f"🏛️  Long-term map: {len(result.long_term_map)} points")


def _report_against_truth(
    output_dir: Path, label: str, result: PipelineResult, dataset: FrameDataset
) -> None:
    writer = ReportWriter(output_dir)
    writer.write_points(result.points_frame())
    writer.write_timing(result.timings)
    ate_reports: dict[str, AteReport] = {}
    seg_reports: dict[str, SegReport] = {}
    if dataset.groundtruth is not None and len(result.trajectory) >= 3:
        ate_reports[label] = ate(result.trajectory, dataset.groundtruth)
    truth = dataset.ground_truth_segmentations()
    if truth is not None:
        seg_reports[label] = segmentation_report(result.segmentations, truth)
    if ate_reports or seg_reports:
        summary = ExperimentSummary(ate=ate_reports, segmentation=seg_reports)
        writer.write_summary(summary)
        _print_summary(summary)


def _print_summary(summary: ExperimentSummary) -> None:
    table = Table(title="Results")
    table.add_column("Label", style="cyan")
    table.add_column("Runs", justify="right")
    table.add_column("ATE RMSE (m)", justify="right")
    table.add_column("Median", justify="right")
    table.add_column("Min", justify="right")
    table.add_column("Max", justify="right")
    table.add_column("mIoU", justify="right")
    table.add_column("mAP@0.5", justify="right")
    for label in summary.labels:
        report = summary.ate.get(label)
        seg = summary.segmentation.get(label)
        ate_cells = (
            [str(report.n_runs)]
            + [f"{v:.4f}" for v in (report.rmse, report.median, report.min, report.max)]
            if report is not None
            else ["-"] * 5
        )
        seg_cells = [f"{seg.miou:.4f}", f"{seg.map50:.4f}"] if seg is not None else ["-", "-"]
        table.add_row(label, *ate_cells, *seg_cells)
    console.print(table)


def main() -> None:
    """Main entry point for CLI."""
    try:
        cli(obj={})
    except Exception as e:
        logger.error("Fatal error: %s", e, exc_info=True)
        click.echo(f"❌ Error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
