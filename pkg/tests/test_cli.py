import json

import pytest
from click.testing import CliRunner

from liveanno.cli import main
from liveanno.model import Dataset, dumps, dumps_dataset_index, dumps_video_doc
from liveanno.session import SessionEvent, SessionLog
from liveanno.synth import SceneSpec, SimAnnotatorSpec, generate_scene, simulate_bbox, simulate_otf


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def dataset_dir(tmp_path):
    """Dataset dir with one weak video (point track) and one box video."""
    scene_w = generate_scene(SceneSpec(duration_s=2.0, fps=10.0, video_id="vw", seed=1))
    scene_b = generate_scene(SceneSpec(duration_s=2.0, fps=10.0, video_id="vb", seed=2))
    annot = SimAnnotatorSpec(sampling_hz=30.0, jitter_frac=0.0, reaction_lag_s=0.0)
    otf_track, _ = simulate_otf(scene_w, annot, seed=1)
    box_track, _ = simulate_bbox(scene_b, annot, seed=2)
    ds = Dataset(videos=[scene_w.meta, scene_b.meta], split={"vw": "train_weak", "vb": "train_box"})
    (tmp_path / "videos.json").write_text(dumps_dataset_index(ds), encoding="utf-8")
    tracks = tmp_path / "tracks"
    tracks.mkdir()
    (tracks / "vw.json").write_text(dumps_video_doc(scene_w.meta, [otf_track], []), encoding="utf-8")
    (tracks / "vb.json").write_text(dumps_video_doc(scene_b.meta, [], [box_track]), encoding="utf-8")
    return tmp_path


class TestReplay:
    def test_replay_prints_track_and_timing(self, runner, tmp_path):
        events = [
            SessionEvent(0.0, "play"),
            SessionEvent(1.0, "cursor", x=5.0, y=6.0),
            SessionEvent(2.0, "stop_annotation"),
            SessionEvent(2.0, "end_session"),
        ]
        log = SessionLog("v0", "OTF", events=events)
        path = tmp_path / "session.jsonl"
        path.write_text(log.to_jsonl(), encoding="utf-8")
        result = runner.invoke(main, ["annotate", "replay", str(path), "--speed", "1.0"])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["timing"]["wall_s"] == 2.0
        assert len(body["track"]["samples"]) == 1


class TestAnalyze:
    def test_timing(self, runner, tmp_path):
        csv = tmp_path / "t.csv"
        csv.write_text("video_id,t_otf_s,t_bbox_s\nv0,10,32\nv1,20,64\nv2,30,96\n", encoding="utf-8")
        out_csv = tmp_path / "pairs.csv"
        result = runner.invoke(main, ["analyze", "timing", str(csv), "--out-csv", str(out_csv)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["mean_ratio"] == 3.2
        assert out_csv.read_text().startswith("video_id,t_otf_s,t_bbox_s")

    def test_density(self, runner, tmp_path):
        scene = generate_scene(SceneSpec(duration_s=2.0, fps=10.0, video_id="v0"))
        annot = SimAnnotatorSpec(sampling_hz=30.0)
        otf_track, _ = simulate_otf(scene, annot, seed=3)
        box_track, _ = simulate_bbox(scene, annot, seed=3)
        doc = tmp_path / "v0.json"
        doc.write_text(dumps_video_doc(scene.meta, [otf_track], [box_track]), encoding="utf-8")
        out_csv = tmp_path / "grid.csv"
        result = runner.invoke(
            main, ["analyze", "density", str(doc), "--resolution", "8", "--out-csv", str(out_csv)]
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["resolution"] == 8
        assert len(out_csv.read_text().splitlines()) == 8


class TestBudget:
    def test_plan_with_match(self, runner):
        result = runner.invoke(main, [
            "budget", "plan", "--t-bbox", "10", "--t-otf", "2",
            "--n-box", "3", "--n-weak", "5", "--match",
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body == {"b_otf_min": 40.0, "n_box_bbox": 4, "residual_minutes": 0.0, "b_bbox_min": 40.0}


class TestEval:
    def test_ap50(self, runner, tmp_path):
        gt = tmp_path / "gt.json"
        det = tmp_path / "det.json"
        gt.write_text(dumps({"frames": [{"frame_idx": 0, "boxes": [[0.0, 0.0, 10.0, 10.0]]}]}))
        det.write_text(dumps({"detections": [
            {"frame_idx": 0, "box": [20.0, 20.0, 28.0, 28.0], "score": 0.9},
            {"frame_idx": 0, "box": [0.0, 0.0, 10.0, 9.0], "score": 0.1},
        ]}))
        result = runner.invoke(main, ["eval", "ap50", "--gt", str(gt), "--det", str(det)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["ap50"] == 0.5


class TestBridgeAndExport:
    def test_export_import_coco_chain(self, runner, dataset_dir, tmp_path):
        exchange = tmp_path / "exchange.json"
        result = runner.invoke(main, [
            "bridge", "export", "--dataset-dir", str(dataset_dir), "--out", str(exchange), "--stride", "2",
        ])
        assert result.exit_code == 0, result.output
        n_rows = json.loads(result.output)["exported_frames"]
        assert n_rows > 0

        # teacher turn-around: answer every exported point with a box around it
        doc = json.loads(exchange.read_text())
        for f in doc["frames"]:
            x, y = f["point"]
            f["box"] = [x - 10, y - 10, x + 10, y + 10]
            f["teacher_id"] = "external"
        pseudo = tmp_path / "pseudo.json"
        pseudo.write_text(dumps(doc), encoding="utf-8")

        merged = tmp_path / "merged.json"
        result = runner.invoke(main, [
            "bridge", "import", "--dataset-dir", str(dataset_dir),
            "--pseudo", str(pseudo), "--out", str(merged), "--stride", "2",
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["warnings"] == []
        merged_doc = json.loads(merged.read_text())
        sources = {f["source"] for f in merged_doc["frames"]}
        assert sources == {"human_box", "pseudo_box"}

        coco = tmp_path / "coco.json"
        result = runner.invoke(main, [
            "export", "coco", "--dataset-dir", str(dataset_dir),
            "--pseudo", str(pseudo), "--out", str(coco), "--stride", "2",
        ])
        assert result.exit_code == 0, result.output
        coco_doc = json.loads(coco.read_text())
        assert len(coco_doc["images"]) == len(coco_doc["annotations"])
        assert len(coco_doc["annotations"]) == len(merged_doc["frames"])


class TestSimulate:
    def test_scene_command(self, runner, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(dumps({"scene": {"duration_s": 1.0, "fps": 10.0, "video_id": "s0"}}))
        result = runner.invoke(main, ["simulate", "scene", "--config", str(config), "--out", str(tmp_path / "out")])
        assert result.exit_code == 0, result.output
        scene_doc = json.loads((tmp_path / "out" / "scene.json").read_text())
        assert scene_doc["meta"]["frame_count"] == 10
        assert "0" in scene_doc["gt"]

    def test_otf_and_bbox_commands(self, runner, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(dumps({
            "scene": {"duration_s": 1.0, "fps": 10.0, "video_id": "s0"},
            "annotator": {"sampling_hz": 30.0, "playback_speed": 0.2},
            "seed": 5,
        }))
        for mode, key in (("otf", "OTF"), ("bbox", "BBox")):
            result = runner.invoke(main, ["simulate", mode, "--config", str(config), "--out", str(tmp_path / mode)])
            assert result.exit_code == 0, result.output
            body = json.loads(result.output)
            assert body["mode"] == key
            assert (tmp_path / mode / "s0.json").exists()
            assert (tmp_path / mode / f"s0.{mode}.log.jsonl").exists()

    def test_experiment_command(self, runner, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(dumps({
            "n_videos": 12,
            "box_fractions": [0.2],
            "seeds": [0],
            "stride": 4,
            "scene": {"duration_s": 2.0, "fps": 8.0},
            "annotator": {"sampling_hz": 30.0, "jitter_frac": 0.0, "reaction_lag_s": 0.0},
        }))
        result = runner.invoke(main, ["simulate", "experiment", "--config", str(config), "--out", str(tmp_path / "exp")])
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "exp" / "report.json").read_text())
        assert report["cells"][0]["ap50_otf"] == 1.0
        csv_text = (tmp_path / "exp" / "report.csv").read_text()
        assert csv_text.splitlines()[0] == "fraction,seed,b_otf_min,b_bbox_min,n_box_bbox,ap50_otf,ap50_bbox"
