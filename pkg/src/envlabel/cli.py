"""Command-line surface for the labeling toolkit.

Subcommands: autolabel, validate, stats, eval, train-toy, compact, serve.
Exit codes: 0 success, 1 domain failure (violations, failed frames), 2 usage
or input-format errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import autolabel as pipeline
from . import metrics as metrics_mod
from . import trainer as trainer_mod
from .labels import CATEGORIES, Mode, validate
from .pointcloud import LidarSpec
from .store import AnnotationStore, StoreError


def _lidar_options(fn):
    defaults = LidarSpec()
    fn = click.option("--alpha", type=float, default=defaults.alpha, show_default=True,
                      help="Horizontal angular resolution of the scanner, degrees.")(fn)
    fn = click.option("--beta", type=float, default=defaults.beta, show_default=True,
                      help="Multiplier on the range-proportional search radius.")(fn)
    fn = click.option("--min-neighbors", type=int, default=defaults.min_neighbors,
                      show_default=True, help="Fewer in-radius neighbors than this = clutter.")(fn)
    fn = click.option("--clutter-threshold", type=float, default=defaults.clutter_threshold,
                      show_default=True, help="Clutter fraction strictly above this = heavy.")(fn)
    fn = click.option("--min-radius", type=float, default=defaults.min_radius, show_default=True,
                      help="Lower clamp on the search radius, meters.")(fn)
    return fn


def _build_spec(alpha: float, beta: float, min_neighbors: int,
                clutter_threshold: float, min_radius: float) -> LidarSpec:
    try:
        return LidarSpec(alpha=alpha, beta=beta, min_neighbors=min_neighbors,
                         clutter_threshold=clutter_threshold, min_radius=min_radius)
    except ValueError as exc:
        raise click.UsageError(str(exc))


@click.group()
def main() -> None:
    """Semi-automated environment-condition labeling toolkit."""


@main.command("autolabel")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path),
              help="Tab-separated manifest: frame_id, image path, cloud path.")
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path),
              help="Annotation store to merge suggestions into.")
@click.option("--dry-run", is_flag=True, help="Report what would be written without writing.")
@_lidar_options
def autolabel_cmd(manifest_path: Path, store_path: Path, dry_run: bool, alpha: float, beta: float,
                  min_neighbors: int, clutter_threshold: float, min_radius: float) -> None:
    """Suggest precipitation intensity for every frame in the manifest."""
    if not manifest_path.exists():
        raise click.UsageError(f"manifest not found: {manifest_path}")
    spec = _build_spec(alpha, beta, min_neighbors, clutter_threshold, min_radius)
    try:
        manifest = pipeline.load_manifest(manifest_path)
    except pipeline.ManifestError as exc:
        raise click.UsageError(str(exc))
    store = AnnotationStore(store_path)
    report = pipeline.run_batch(manifest, spec, store, dry_run=dry_run)
    for line in report.to_lines():
        click.echo(line)
    click.echo(report.summary())
    if report.failed:
        sys.exit(1)


@main.command("validate")
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path))
@click.option("--final", "final_mode", is_flag=True,
              help="Require complete labels, not just draft consistency.")
def validate_cmd(store_path: Path, final_mode: bool) -> None:
    """List hierarchy violations in a store; exit 0 only when clean."""
    if not store_path.exists():
        raise click.UsageError(f"store not found: {store_path}")
    store = AnnotationStore(store_path)
    mode = Mode.FINAL if final_mode else Mode.DRAFT
    n_violations = 0
    try:
        for annotation in store.load().values():
            for violation in validate(annotation, mode):
                n_violations += 1
                click.echo(f"{annotation.frame_id}\t{violation}")
    except StoreError as exc:
        # A record that cannot even be parsed is itself a violation listing.
        click.echo(str(exc))
        sys.exit(1)
    if n_violations:
        click.echo(f"{n_violations} violation(s)")
        sys.exit(1)
    click.echo("ok")


@main.command("stats")
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path))
@click.option("--json", "json_out", type=click.Path(path_type=Path),
              help="Also write the histogram as JSON to this path ('-' for stdout).")
def stats_cmd(store_path: Path, json_out: Path | None) -> None:
    """Print the label distribution over finally-labeled frames."""
    if not store_path.exists():
        raise click.UsageError(f"store not found: {store_path}")
    histogram = pipeline.stats(AnnotationStore(store_path))
    click.echo(pipeline.render_histogram(histogram))
    if json_out is not None:
        payload = json.dumps(histogram.to_dict(), indent=2)
        if str(json_out) == "-":
            click.echo(payload)
        else:
            json_out.write_text(payload + "\n", encoding="utf-8")


@main.command("eval")
@click.option("--predictions", "predictions_path", required=True, type=click.Path(path_type=Path),
              help="JSON-line records: frame_id, per-category value, optional scores.")
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path),
              help="Store holding the ground-truth (final) annotations.")
@click.option("--average", type=click.Choice(metrics_mod.AVERAGES), default="macro",
              show_default=True)
@click.option("--json", "json_out", type=click.Path(path_type=Path),
              help="Also write per-category metric records ('-' for stdout).")
def eval_cmd(predictions_path: Path, store_path: Path, average: str, json_out: Path | None) -> None:
    """Score a prediction file against the store's final labels."""
    if not predictions_path.exists():
        raise click.UsageError(f"predictions not found: {predictions_path}")
    if not store_path.exists():
        raise click.UsageError(f"store not found: {store_path}")
    try:
        predictions = metrics_mod.load_predictions(str(predictions_path))
    except metrics_mod.PredictionFormatError as exc:
        click.echo(f"prediction format error: {exc}", err=True)
        sys.exit(1)

    truth_records = {
        fid: a for fid, a in AnnotationStore(store_path).load().items() if a.is_final()
    }
    missing = sorted(set(predictions) - set(truth_records))
    if missing:
        click.echo(f"predictions for frames without final labels: {', '.join(missing)}", err=True)
        sys.exit(1)
    if not predictions:
        click.echo("no predictions to evaluate", err=True)
        sys.exit(1)

    frame_ids = sorted(predictions)
    truth: dict[str, list[str]] = {c: [] for c in CATEGORIES}
    predicted: dict[str, list[str]] = {c: [] for c in CATEGORIES}
    scores: dict[str, list] = {}
    for fid in frame_ids:
        annotation = truth_records[fid]
        for category in CATEGORIES:
            if category == "precipitation":
                truth[category].append(annotation.precipitation_kind.value)
            else:
                truth[category].append(getattr(annotation, category).value)
            predicted[category].append(predictions[fid]["values"][category])
        vecs = predictions[fid]["scores"]
        if vecs:
            for category, vec in vecs.items():
                scores.setdefault(category, []).append([float(x) for x in vec])
    for category, vecs in scores.items():
        if len(vecs) != len(frame_ids):
            click.echo(f"prediction format error: partial scores for {category!r}", err=True)
            sys.exit(1)

    try:
        report = metrics_mod.evaluate(truth, predicted, scores or None, average=average)
    except metrics_mod.PredictionFormatError as exc:
        click.echo(f"prediction format error: {exc}", err=True)
        sys.exit(1)
    click.echo(metrics_mod.render_table(report))
    if json_out is not None:
        payload = "\n".join(metrics_mod.report_to_records(report)) + "\n"
        if str(json_out) == "-":
            click.echo(payload, nl=False)
        else:
            json_out.write_text(payload, encoding="utf-8")


@main.command("train-toy")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(path_type=Path),
              help="JSON-line synthetic samples: feature vector + six labels.")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(path_type=Path))
@click.option("--loss-log", "loss_log_path", type=click.Path(path_type=Path),
              help="Write per-epoch mean loss as CSV.")
@click.option("--epochs", type=int, default=120, show_default=True)
@click.option("--learning-rate", type=float, default=0.5, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--trunk", type=str, default="32", show_default=True,
              help="Comma-separated trunk layer widths.")
@click.option("--head-hidden", type=int, default=16, show_default=True)
@click.option("--gamma", type=float, default=2.0, show_default=True)
@click.option("--inverse-frequency-weights/--unit-weights", "use_ifw", default=True,
              show_default=True, help="Weight classes by inverse frequency.")
@click.option("--seed", type=int, default=0, show_default=True)
def train_toy_cmd(dataset_path: Path, checkpoint_path: Path, loss_log_path: Path | None,
                  epochs: int, learning_rate: float, batch_size: int, trunk: str,
                  head_hidden: int, gamma: float, use_ifw: bool, seed: int) -> None:
    """Train the six-head toy classifier on a synthetic dataset."""
    if not dataset_path.exists():
        raise click.UsageError(f"dataset not found: {dataset_path}")
    try:
        samples = trainer_mod.load_samples(dataset_path)
    except ValueError as exc:
        click.echo(f"dataset format error: {exc}", err=True)
        sys.exit(1)
    if not samples:
        click.echo("dataset is empty", err=True)
        sys.exit(1)
    try:
        trunk_widths = tuple(int(w) for w in trunk.split(",") if w.strip())
    except ValueError:
        raise click.UsageError(f"bad --trunk value: {trunk!r}")

    import numpy as np

    from .focal import FocalLossParams, inverse_frequency_weights

    input_dim = len(samples[0].features)
    config = trainer_mod.ToyModelConfig(
        input_dim=input_dim,
        trunk_widths=trunk_widths,
        head_hidden=head_hidden,
        learning_rate=learning_rate,
        epochs=epochs,
        batch_size=batch_size,
        seed=seed,
    )
    if use_ifw:
        targets = np.array([s.targets for s in samples])
        weights = tuple(
            inverse_frequency_weights(targets[:, c], k)
            for c, k in enumerate(config.class_counts)
        )
        params = FocalLossParams(gamma=gamma, class_weights=weights)
    else:
        params = FocalLossParams(gamma=gamma)

    try:
        result = trainer_mod.train(samples, config, params)
    except trainer_mod.TrainingDivergedError as exc:
        click.echo(f"training diverged: {exc}", err=True)
        sys.exit(1)
    trainer_mod.save_checkpoint(result.model, checkpoint_path)
    if loss_log_path is not None:
        lines = [f"{e},{loss:.6f}" for e, loss in enumerate(result.loss_history)]
        loss_log_path.write_text("epoch,loss\n" + "\n".join(lines) + "\n", encoding="utf-8")
    accuracy = trainer_mod.per_category_accuracy(result.model, samples)
    for category, acc in zip(CATEGORIES, accuracy):
        click.echo(f"train accuracy {category}: {acc:.3f}")
    final_loss = result.loss_history[-1] if result.loss_history else float("nan")
    click.echo(f"checkpoint written to {checkpoint_path} (final loss {final_loss:.4f})")


@main.command("compact")
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path))
def compact_cmd(store_path: Path) -> None:
    """Rewrite the store down to one record per frame."""
    if not store_path.exists():
        raise click.UsageError(f"store not found: {store_path}")
    kept = AnnotationStore(store_path).compact()
    click.echo(f"kept {kept} record(s)")


@main.command("serve")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path))
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path))
@click.option("--listen", default="127.0.0.1:8080", show_default=True,
              help="host:port to bind.")
@click.option("--read-only", is_flag=True, help="Reject annotation writes.")
@click.option("--ui-dir", type=click.Path(path_type=Path),
              help="Directory with the built review UI to serve at /.")
@_lidar_options
def serve_cmd(manifest_path: Path, store_path: Path, listen: str, read_only: bool,
              ui_dir: Path | None, alpha: float, beta: float, min_neighbors: int,
              clutter_threshold: float, min_radius: float) -> None:
    """Run the annotation HTTP service."""
    if not manifest_path.exists():
        raise click.UsageError(f"manifest not found: {manifest_path}")
    host, _, port_str = listen.rpartition(":")
    if not host or not port_str.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    spec = _build_spec(alpha, beta, min_neighbors, clutter_threshold, min_radius)

    from .service import ServiceConfig, run_server

    config = ServiceConfig(
        manifest_path=manifest_path,
        store_path=store_path,
        lidar=spec,
        read_only=read_only,
        ui_dir=ui_dir,
        host=host,
        port=int(port_str),
    )
    run_server(config)


if __name__ == "__main__":
    main()
