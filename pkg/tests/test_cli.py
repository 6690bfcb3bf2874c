"""CLI subcommands, exit codes, and file outputs."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from envlabel.cli import main
from envlabel.labels import serialize
from envlabel.store import AnnotationStore
from envlabel.synthetic import write_dataset_fixture
from envlabel.trainer import load_checkpoint, make_separable_dataset, save_samples

from test_autolabel import final_annotation
from test_labels import full_annotation
from envlabel.labels import (
    Daytime,
    Fog,
    Infrastructure,
    Intensity,
    PrecipitationKind,
    SurfaceCondition,
)


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def dataset(tmp_path):
    manifest = write_dataset_fixture(
        tmp_path / "data",
        {"frame-a": 0.0, "frame-b": 0.12, "frame-c": 0.03},
        n_points=2000,
        seed=30,
    )
    return manifest, tmp_path / "store.jsonl"


class TestAutolabelCommand:
    def test_clean_run_exits_zero(self, runner, dataset):
        manifest, store = dataset
        result = runner.invoke(main, ["autolabel", "--manifest", str(manifest), "--store", str(store)])
        assert result.exit_code == 0, result.output
        assert "processed=3 failed=0" in result.output
        assert store.exists()

    def test_dry_run_writes_nothing(self, runner, dataset):
        manifest, store = dataset
        result = runner.invoke(
            main, ["autolabel", "--manifest", str(manifest), "--store", str(store), "--dry-run"]
        )
        assert result.exit_code == 0
        assert not store.exists()

    def test_failure_sets_exit_one(self, runner, dataset, tmp_path):
        manifest, store = dataset
        (tmp_path / "data" / "clouds" / "frame-b.bin").unlink()
        result = runner.invoke(main, ["autolabel", "--manifest", str(manifest), "--store", str(store)])
        assert result.exit_code == 1
        assert "failed=1" in result.output
        assert "frame-b" in result.output

    def test_unknown_flag_is_usage_error(self, runner, dataset):
        manifest, store = dataset
        result = runner.invoke(
            main, ["autolabel", "--manifest", str(manifest), "--store", str(store), "--bogus"]
        )
        assert result.exit_code == 2

    def test_missing_manifest_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["autolabel", "--manifest", str(tmp_path / "nope.tsv"), "--store", str(tmp_path / "s")]
        )
        assert result.exit_code == 2

    def test_spec_flags_are_honored(self, runner, dataset):
        manifest, store = dataset
        # A sky-high threshold turns every suggestion Light.
        result = runner.invoke(
            main,
            ["autolabel", "--manifest", str(manifest), "--store", str(store),
             "--clutter-threshold", "0.99"],
        )
        assert result.exit_code == 0
        current = AnnotationStore(store).load()
        assert all(
            a.precipitation_intensity is Intensity.LIGHT for a in current.values()
        )


class TestValidateCommand:
    def test_clean_store_exits_zero(self, runner, tmp_path):
        store = AnnotationStore(tmp_path / "s.jsonl")
        store.append(full_annotation("f1"))
        result = runner.invoke(main, ["validate", "--store", str(tmp_path / "s.jsonl")])
        assert result.exit_code == 0
        assert "ok" in result.output

    def test_injected_violation_exits_one_and_names_frame(self, runner, tmp_path):
        store_path = tmp_path / "s.jsonl"
        store = AnnotationStore(store_path)
        store.append(full_annotation("good-frame"))
        bad = serialize(full_annotation("bad-frame")).replace(
            '"precipitation_kind":"Snow"', '"precipitation_kind":"None"'
        )
        with open(store_path, "a", encoding="utf-8") as fh:
            fh.write(bad + "\n")
        result = runner.invoke(main, ["validate", "--store", str(store_path)])
        assert result.exit_code == 1
        assert "bad-frame" in result.output

    def test_missing_store_exits_two(self, runner, tmp_path):
        result = runner.invoke(main, ["validate", "--store", str(tmp_path / "absent.jsonl")])
        assert result.exit_code == 2

    def test_final_mode_flags_drafts(self, runner, tmp_path):
        store_path = tmp_path / "s.jsonl"
        store = AnnotationStore(store_path)
        draft = full_annotation("draft-frame")
        draft.fog = None
        draft.provenance = draft.provenance.with_value("fog", __import__("envlabel").Provenance.UNSET)
        store.append(draft)
        assert runner.invoke(main, ["validate", "--store", str(store_path)]).exit_code == 0
        result = runner.invoke(main, ["validate", "--store", str(store_path), "--final"])
        assert result.exit_code == 1


class TestStatsCommand:
    def test_table_and_json(self, runner, tmp_path):
        store_path = tmp_path / "s.jsonl"
        store = AnnotationStore(store_path)
        store.append(final_annotation(
            "f1", Daytime.DAY, PrecipitationKind.NONE, None, Fog.NONE,
            SurfaceCondition.DRY, SurfaceCondition.DRY, Infrastructure.URBAN,
        ))
        json_path = tmp_path / "hist.json"
        result = runner.invoke(
            main, ["stats", "--store", str(store_path), "--json", str(json_path)]
        )
        assert result.exit_code == 0
        assert "final-labeled frames: 1" in result.output
        payload = json.loads(json_path.read_text())
        assert payload["counts"]["daytime"] == {"Day": 1}

    def test_missing_store_exits_two(self, runner, tmp_path):
        assert runner.invoke(main, ["stats", "--store", str(tmp_path / "x")]).exit_code == 2


def write_truth_store(path, frames):
    store = AnnotationStore(path)
    for frame_id, values in frames.items():
        store.append(final_annotation(frame_id, *values))


# Covers every class of every category once, so macro self-prediction is 1.0.
TRUTH_ROWS = {
    "f1": (Daytime.DAY, PrecipitationKind.NONE, None, Fog.NONE,
           SurfaceCondition.DRY, SurfaceCondition.DRY, Infrastructure.URBAN),
    "f2": (Daytime.NIGHT, PrecipitationKind.RAIN, Intensity.LIGHT, Fog.LIGHT_FOG,
           SurfaceCondition.WET, SurfaceCondition.WET, Infrastructure.SUBURBAN),
    "f3": (Daytime.TWILIGHT, PrecipitationKind.SNOW, Intensity.HEAVY, Fog.DENSE_FOG,
           SurfaceCondition.PARTIAL_SNOW, SurfaceCondition.FULL_SNOW, Infrastructure.HIGHWAY),
    "f4": (Daytime.DAY, PrecipitationKind.SNOW, Intensity.LIGHT, Fog.NONE,
           SurfaceCondition.FULL_SNOW, SurfaceCondition.PARTIAL_SNOW, Infrastructure.RURAL),
}


def self_prediction_line(frame_id, values):
    daytime, kind, _, fog, road, roadside, infra = values
    return json.dumps({
        "frame_id": frame_id,
        "daytime": daytime.value,
        "precipitation": kind.value,
        "fog": fog.value,
        "road": road.value,
        "roadside": roadside.value,
        "infrastructure": infra.value,
    })


class TestEvalCommand:
    def test_self_prediction_is_all_ones(self, runner, tmp_path):
        store_path = tmp_path / "truth.jsonl"
        write_truth_store(store_path, TRUTH_ROWS)
        predictions = tmp_path / "preds.jsonl"
        predictions.write_text(
            "".join(self_prediction_line(fid, vals) + "\n" for fid, vals in TRUTH_ROWS.items())
        )
        json_path = tmp_path / "report.jsonl"
        result = runner.invoke(
            main,
            ["eval", "--predictions", str(predictions), "--store", str(store_path),
             "--json", str(json_path)],
        )
        assert result.exit_code == 0, result.output
        assert "Daytime" in result.output and "Roadside Condition" in result.output
        records = [json.loads(l) for l in json_path.read_text().splitlines()]
        per_category = [r for r in records if r["category"] != "overall"]
        assert all(r["accuracy"] == 1.0 and r["f1"] == 1.0 for r in per_category)
        overall = [r for r in records if r["category"] == "overall"][0]
        assert overall["accuracy"] == 1.0

    def test_missing_category_column_is_format_error(self, runner, tmp_path):
        store_path = tmp_path / "truth.jsonl"
        write_truth_store(store_path, TRUTH_ROWS)
        predictions = tmp_path / "preds.jsonl"
        line = json.loads(self_prediction_line("f1", TRUTH_ROWS["f1"]))
        del line["fog"]
        predictions.write_text(json.dumps(line) + "\n")
        result = runner.invoke(
            main, ["eval", "--predictions", str(predictions), "--store", str(store_path)]
        )
        assert result.exit_code == 1
        assert "format error" in result.output
        assert "fog" in result.output

    def test_missing_files_are_usage_errors(self, runner, tmp_path):
        result = runner.invoke(
            main, ["eval", "--predictions", str(tmp_path / "a"), "--store", str(tmp_path / "b")]
        )
        assert result.exit_code == 2


class TestTrainToyCommand:
    def test_writes_checkpoint_and_loss_log(self, runner, tmp_path):
        dataset_path = tmp_path / "toy.jsonl"
        save_samples(make_separable_dataset(120, seed=1), dataset_path)
        checkpoint = tmp_path / "model.json"
        loss_log = tmp_path / "loss.csv"
        result = runner.invoke(
            main,
            ["train-toy", "--dataset", str(dataset_path), "--checkpoint", str(checkpoint),
             "--loss-log", str(loss_log), "--epochs", "10", "--seed", "3"],
        )
        assert result.exit_code == 0, result.output
        model = load_checkpoint(checkpoint)
        assert model.config.epochs == 10
        lines = loss_log.read_text().splitlines()
        assert lines[0] == "epoch,loss"
        assert len(lines) == 11

    def test_deterministic_given_seed(self, runner, tmp_path):
        dataset_path = tmp_path / "toy.jsonl"
        save_samples(make_separable_dataset(60, seed=2), dataset_path)
        outputs = []
        for name in ("a.json", "b.json"):
            checkpoint = tmp_path / name
            result = runner.invoke(
                main,
                ["train-toy", "--dataset", str(dataset_path), "--checkpoint", str(checkpoint),
                 "--epochs", "5", "--seed", "9"],
            )
            assert result.exit_code == 0
            outputs.append(checkpoint.read_text())
        assert outputs[0] == outputs[1]

    def test_missing_dataset_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["train-toy", "--dataset", str(tmp_path / "x"), "--checkpoint", str(tmp_path / "c")]
        )
        assert result.exit_code == 2


class TestCompactCommand:
    def test_compacts_duplicates(self, runner, tmp_path):
        store_path = tmp_path / "s.jsonl"
        store = AnnotationStore(store_path)
        store.append(full_annotation("f1"))
        store.append(full_annotation("f1"))
        result = runner.invoke(main, ["compact", "--store", str(store_path)])
        assert result.exit_code == 0
        assert "kept 1" in result.output
        assert len(store_path.read_text().splitlines()) == 1
