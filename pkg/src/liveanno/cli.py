"""Command-line client. All real work lives in the package modules; commands
parse arguments, read files, call the module and print JSON."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analysis as _analysis
from . import evalbridge as _bridge
from . import synth as _synth
from .model import (
    Dataset,
    dumps,
    parse_dataset_index,
    parse_video_doc,
    track_to_dict,
    video_doc_to_dict,
)
from .session import SessionLog, finalize_session


def _echo_json(payload) -> None:
    click.echo(dumps(payload))


def load_dataset_dir(path: str | Path) -> Dataset:
    """Dataset directory: videos.json index plus tracks/<video_id>.json docs."""
    root = Path(path)
    ds = parse_dataset_index((root / "videos.json").read_text(encoding="utf-8"))
    tracks_dir = root / "tracks"
    if tracks_dir.is_dir():
        for doc in sorted(tracks_dir.glob("*.json")):
            meta, otf, box = parse_video_doc(doc.read_text(encoding="utf-8"))
            if otf:
                ds.otf_tracks.setdefault(meta.video_id, []).extend(otf)
            if box:
                ds.box_tracks.setdefault(meta.video_id, []).extend(box)
    return ds


@click.group()
def main() -> None:
    """Live video annotation toolkit."""


# -- annotate ----------------------------------------------------------------

@main.group()
def annotate() -> None:
    """Session log tools."""


@annotate.command("replay")
@click.argument("log_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--speed", type=float, default=0.2, show_default=True, help="Playback speed for unstamped events.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the track document here.")
def annotate_replay(log_file: str, speed: float, out: str | None) -> None:
    """Replay a JSONL session log; print the track and its timing."""
    log = SessionLog.from_jsonl(Path(log_file).read_text(encoding="utf-8"))
    track, timing = finalize_session(log, speed=speed)
    payload = {"track": track_to_dict(track), "timing": timing}
    if out:
        Path(out).write_text(dumps(payload) + "\n", encoding="utf-8")
    _echo_json(payload)


# -- analyze -----------------------------------------------------------------

@main.group()
def analyze() -> None:
    """Timing and density analyses."""


@analyze.command("timing")
@click.argument("records_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-json", type=click.Path(dir_okay=False), default=None)
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None, help="Write the cleaned pair CSV here.")
def analyze_timing(records_csv: str, out_json: str | None, out_csv: str | None) -> None:
    """Speedup statistics for a video_id,t_otf_s,t_bbox_s CSV."""
    records = _analysis.load_timing_csv(Path(records_csv).read_text(encoding="utf-8"))
    report = _analysis.speedup_stats(records)
    if out_json:
        Path(out_json).write_text(dumps(report.to_dict()) + "\n", encoding="utf-8")
    if out_csv:
        Path(out_csv).write_text(_analysis.timing_records_csv(records), encoding="utf-8")
    _echo_json(report.to_dict())


@analyze.command("density")
@click.argument("annotations", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--resolution", type=int, default=64, show_default=True)
@click.option("--bandwidth", type=str, default=None, help="Fixed per-axis bandwidth 'h_u,h_v'.")
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None, help="Write the grid as a CSV matrix.")
def analyze_density(annotations: tuple[str, ...], resolution: int, bandwidth: str | None, out_csv: str | None) -> None:
    """Density of point locations normalized by the matching box tracks."""
    pts = []
    for doc in annotations:
        meta, otf, box = parse_video_doc(Path(doc).read_text(encoding="utf-8"))
        pts.extend(_analysis.normalized_otf_points(meta, otf, box))
    bw = None
    if bandwidth:
        h_u, h_v = (float(v) for v in bandwidth.split(","))
        bw = (h_u, h_v)
    grid = _analysis.kde_density(pts, resolution=resolution, bandwidth=bw)
    if out_csv:
        Path(out_csv).write_text(grid.to_csv(), encoding="utf-8")
    _echo_json(
        {
            "resolution": grid.resolution,
            "bandwidth": list(grid.bandwidth),
            "n_points": len(pts),
            "argmax_center": list(grid.argmax_center()),
            "cells": [[float(v) for v in row] for row in grid.cells],
        }
    )


# -- budget -------------------------------------------------------------------

@main.group()
def budget() -> None:
    """Annotation budget arithmetic."""


@budget.command("plan")
@click.option("--t-bbox", type=float, required=True, help="Minutes per box-annotated video.")
@click.option("--t-otf", type=float, required=True, help="Minutes per point-annotated video.")
@click.option("--n-box", type=int, required=True)
@click.option("--n-weak", type=int, required=True)
@click.option("--match", is_flag=True, help="Also match the box-only budget.")
def budget_plan(t_bbox: float, t_otf: float, n_box: int, n_weak: int, match: bool) -> None:
    """Budget of the mixed scenario, optionally matched to box-only."""
    model = _analysis.BudgetModel(t_bbox, t_otf, n_box, n_weak)
    out = {"b_otf_min": _analysis.budget_otf(model)}
    if match:
        matched = _analysis.match_budget(model)
        out["n_box_bbox"] = matched.n_box_bbox
        out["residual_minutes"] = matched.residual_minutes
        out["b_bbox_min"] = matched.n_box_bbox * model.t_bbox_per_video
    _echo_json(out)


# -- eval ----------------------------------------------------------------------

@main.group(name="eval")
def eval_group() -> None:
    """Detection scoring."""


@eval_group.command("ap50")
@click.option("--gt", "gt_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help='JSON {"frames": [{"frame_idx": i, "boxes": [[x0,y0,x1,y1], ...]}]}')
@click.option("--det", "det_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help='JSON {"detections": [{"frame_idx": i, "box": [...], "score": s}]}')
@click.option("--interpolation", type=click.Choice(["all_point", "101_point"]), default="all_point",
              show_default=True)
def eval_ap50(gt_file: str, det_file: str, interpolation: str) -> None:
    """AP@50 of a detection file against a ground-truth file."""
    gt_doc = json.loads(Path(gt_file).read_text(encoding="utf-8"))
    det_doc = json.loads(Path(det_file).read_text(encoding="utf-8"))
    gts = {int(f["frame_idx"]): [tuple(map(float, b)) for b in f["boxes"]] for f in gt_doc["frames"]}
    dets = [
        _bridge.Detection(int(d["frame_idx"]), tuple(map(float, d["box"])), float(d["score"]),
                          int(d.get("class_id", 0)))
        for d in det_doc["detections"]
    ]
    report = _bridge.ap50(gts, dets, interpolation=interpolation)
    _echo_json(report.to_dict())


# -- bridge ---------------------------------------------------------------------

@main.group()
def bridge() -> None:
    """Pseudo-label exchange with point-to-box teachers."""


@bridge.command("export")
@click.option("--dataset-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--stride", type=int, default=1, show_default=True)
def bridge_export(dataset_dir: str, out: str, stride: int) -> None:
    """Write the weak frames of a dataset as a teacher exchange file."""
    ds = load_dataset_dir(dataset_dir)
    rows = _bridge.export_weak_frames(ds, stride=stride)
    Path(out).write_text(_bridge.dumps_exchange(rows) + "\n", encoding="utf-8")
    _echo_json({"exported_frames": len(rows), "out": out})


@bridge.command("import")
@click.option("--dataset-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--pseudo", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--stride", type=int, default=1, show_default=True,
              help="Must match the stride used at export time.")
def bridge_import(dataset_dir: str, pseudo: str, out: str, stride: int) -> None:
    """Merge teacher pseudo-boxes back into a training frame list."""
    ds = load_dataset_dir(dataset_dir)
    exported = _bridge.export_weak_frames(ds, stride=stride)
    labels = _bridge.parse_pseudo_labels(Path(pseudo).read_text(encoding="utf-8"))
    annos, warnings = _bridge.import_pseudo_labels(labels, exported)
    merged = _bridge.merge_training_frames(ds, annos, stride=stride)
    payload = {
        "frames": [
            {
                "video_id": a.video_id,
                "frame_idx": a.frame_idx,
                "point": list(a.point) if a.point else None,
                "box": list(a.box) if a.box else None,
                "source": a.source,
            }
            for a in merged
        ],
        "warnings": warnings,
    }
    Path(out).write_text(dumps(payload) + "\n", encoding="utf-8")
    _echo_json({"merged_frames": len(merged), "warnings": warnings, "out": out})


# -- export ----------------------------------------------------------------------

@main.group()
def export() -> None:
    """Training-set exports."""


@export.command("coco")
@click.option("--dataset-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--pseudo", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Optional pseudo-label file to merge before exporting.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--stride", type=int, default=1, show_default=True)
def export_coco_cmd(dataset_dir: str, pseudo: str | None, out: str, stride: int) -> None:
    """COCO-style detection JSON from box tracks (plus optional pseudo boxes)."""
    ds = load_dataset_dir(dataset_dir)
    pseudo_annos = []
    if pseudo:
        exported = _bridge.export_weak_frames(ds, stride=stride)
        labels = _bridge.parse_pseudo_labels(Path(pseudo).read_text(encoding="utf-8"))
        pseudo_annos, _ = _bridge.import_pseudo_labels(labels, exported)
    frames = _bridge.merge_training_frames(ds, pseudo_annos, stride=stride)
    metas = {m.video_id: m for m in ds.videos}
    doc, skipped = _bridge.export_coco(metas, frames)
    Path(out).write_text(dumps(doc) + "\n", encoding="utf-8")
    _echo_json({"images": len(doc["images"]), "annotations": len(doc["annotations"]),
                "skipped": skipped, "out": out})


# -- simulate ----------------------------------------------------------------------

def _load_config(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@main.group()
def simulate() -> None:
    """Synthetic scenes, simulated annotators and experiments."""


@simulate.command("scene")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def simulate_scene(config_file: str, out: str) -> None:
    """Generate a scene's ground truth into <out>/scene.json."""
    config = _load_config(config_file)
    scene = _synth.generate_scene(_synth.scene_spec_from_dict(config.get("scene", config)))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "scene.json").write_text(dumps(_synth.scene_to_dict(scene)) + "\n", encoding="utf-8")
    _echo_json({"video_id": scene.meta.video_id, "frames": scene.meta.frame_count,
                "objects": len(scene.gt), "out": str(out_dir / "scene.json")})


def _simulate_session(config_file: str, out: str, mode: str) -> None:
    config = _load_config(config_file)
    scene = _synth.generate_scene(_synth.scene_spec_from_dict(config.get("scene", {})))
    annot = _synth.annotator_spec_from_dict(config.get("annotator", {}))
    seed = int(config.get("seed", 0))
    if mode == "OTF":
        track, log = _synth.simulate_otf(scene, annot, seed=seed)
    else:
        track, log = _synth.simulate_bbox(scene, annot, seed=seed)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc_path = out_dir / f"{scene.meta.video_id}.json"
    otf_tracks, box_tracks = [], []
    if doc_path.exists():
        _, otf_tracks, box_tracks = parse_video_doc(doc_path.read_text(encoding="utf-8"))
    (otf_tracks if mode == "OTF" else box_tracks).append(track)
    doc = video_doc_to_dict(scene.meta, otf_tracks, box_tracks)
    doc_path.write_text(dumps(doc) + "\n", encoding="utf-8")
    (out_dir / f"{scene.meta.video_id}.{mode.lower()}.log.jsonl").write_text(log.to_jsonl(), encoding="utf-8")
    _echo_json({"video_id": scene.meta.video_id, "mode": mode,
                "wall_s": log.total_wall_s, "active_s": log.active_annotation_s,
                "out": str(out_dir)})


@simulate.command("otf")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def simulate_otf_cmd(config_file: str, out: str) -> None:
    """Simulate a point-annotation session on a synthetic scene."""
    _simulate_session(config_file, out, "OTF")


@simulate.command("bbox")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def simulate_bbox_cmd(config_file: str, out: str) -> None:
    """Simulate a keyframed box session on a synthetic scene."""
    _simulate_session(config_file, out, "BBox")


@simulate.command("experiment")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def simulate_experiment(config_file: str, out: str) -> None:
    """Run the budget-matched sweep; write report.json and report.csv."""
    config = _synth.experiment_config_from_dict(_load_config(config_file))
    report = _synth.run_experiment(config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dumps(report.to_dict()) + "\n", encoding="utf-8")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    failed = [c for c in report.cells if c.error]
    _echo_json({"cells": len(report.cells), "failed": len(failed), "out": str(out_dir)})
    if failed:
        sys.exit(1)


# -- serve -----------------------------------------------------------------------

@main.command("serve")
@click.option("--data-dir", type=click.Path(file_okay=False), required=True)
@click.option("--bind", type=str, default="127.0.0.1:8000", show_default=True)
@click.option("--default-speed", type=float, default=0.2, show_default=True)
def serve(data_dir: str, bind: str, default_speed: float) -> None:
    """Run the annotation server."""
    import uvicorn

    from .server import create_app

    host, _, port = bind.partition(":")
    app = create_app(data_dir, default_speed=default_speed)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
