"""roadwatch command line.

Thin wrappers over the library: every subcommand parses arguments, calls one
pipeline function, and prints or writes the result.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import yaml

from . import __version__
from .datasets import load_split_data, split_images
from .dedup import dedup_scan
from .evaluate import evaluate_split, render_report
from .explain.cam import cam, render_overlay
from .explain.tsne import TsneConfig, collect_embeddings, tsne
from .harvest import BlobStore, download, get_provider, harvest_report, run_query
from .manifest import (
    Manifest,
    NegativesSpec,
    RegionMap,
    assign_splits,
    build_negatives,
    geo_stratify,
)
from .manifest.records import ImageRecord
from .preprocess import NormStats, compute_norm_stats, decode_bytes, prepare_for_model
from .querygen import load_plan
from .taxonomy import DEFAULT_CLASS_ORDER, INCIDENT_CLASS_IDS
from .trainer import Checkpoint, TrainConfig, train

_DATA_DIR = Path(__file__).parent / "data"


@click.group()
@click.version_option(__version__)
def main():
    """Road-incident dataset and model toolkit."""


# -- queries -------------------------------------------------------------------


@main.group()
def queries():
    """Query planning."""


@queries.command("plan")
@click.option("--plan", "plan_path", type=click.Path(exists=True), default=None,
              help="Query plan YAML; defaults to the packaged plan.")
@click.option("--class", "class_id", default=None, help="Limit to one incident class.")
@click.option("--langs", default="en", help="Comma-separated language codes.")
@click.option("--out", type=click.Path(), default=None, help="Write JSON instead of stdout.")
def queries_plan(plan_path, class_id, langs, out):
    """Expand synonym pairs (and translations) into concrete queries."""
    plan = load_plan(plan_path or _DATA_DIR / "queryplan.yaml")
    languages = tuple(l.strip() for l in langs.split(",") if l.strip())
    class_ids = [class_id] if class_id else list(plan.class_ids())
    rows = []
    for cid in class_ids:
        for q in plan.queries_for(cid, languages=languages):
            rows.append(
                {"class": q.class_id, "language": q.language, "text": q.text,
                 "origin": list(q.origin)}
            )
    if out:
        Path(out).write_text(json.dumps(rows, indent=2, ensure_ascii=False))
        click.echo(f"wrote {len(rows)} queries to {out}")
    else:
        for row in rows:
            click.echo(f"{row['class']:<16} {row['language']:<3} {row['text']}")


# -- harvest --------------------------------------------------------------------


@main.command()
@click.option("--plan", "plan_path", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", type=click.Path(), required=True)
@click.option("--blobs", "blob_root", type=click.Path(), required=True)
@click.option("--provider", "provider_id", default="local-fixture")
@click.option("--fixture-file", type=click.Path(exists=True), default=None,
              help="YAML mapping query text to result URLs (fixture provider).")
@click.option("--langs", default="en")
@click.option("--class", "class_id", default=None)
@click.option("--skip-download", is_flag=True, help="Record candidates without fetching bytes.")
def harvest(plan_path, manifest_path, blob_root, provider_id, fixture_file, langs, class_id,
            skip_download):
    """Run the query plan against a provider and ingest candidates."""
    plan = load_plan(plan_path or _DATA_DIR / "queryplan.yaml")
    kwargs = {}
    if provider_id == "local-fixture" and fixture_file:
        kwargs["results"] = yaml.safe_load(Path(fixture_file).read_text())
    provider = get_provider(provider_id, **kwargs)
    store = BlobStore(blob_root)
    languages = tuple(l.strip() for l in langs.split(",") if l.strip())
    class_ids = [class_id] if class_id else list(plan.class_ids())

    added, failed = 0, 0
    with Manifest(manifest_path) as manifest:
        existing = set(manifest.ids())
        for cid in class_ids:
            for query in plan.queries_for(cid, languages=languages):
                for candidate in run_query(provider, query):
                    if candidate.record_id in existing:
                        continue
                    if skip_download:
                        checksum = f"pending-{candidate.record_id}"
                    else:
                        try:
                            checksum = download(candidate, store)
                        except Exception as exc:
                            click.echo(f"download failed: {candidate.url}: {exc}", err=True)
                            failed += 1
                            continue
                    manifest.add_record(
                        ImageRecord(
                            id=candidate.record_id,
                            blob_checksum=checksum,
                            provider=candidate.provider,
                            label=query.class_id,
                            query_text=query.text,
                            query_language=query.language,
                            origin=query.origin,
                            rank=candidate.rank,
                            fetched_at=candidate.fetched_at,
                            geotag=candidate.geotag,
                        )
                    )
                    existing.add(candidate.record_id)
                    added += 1
    click.echo(f"added {added} candidates ({failed} downloads failed)")


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--blobs", "blob_root", type=click.Path(exists=True), required=True)
@click.option("--threshold", default=10, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--apply/--no-apply", "apply_marks", default=True,
              help="Mark cluster non-representatives as duplicates in the manifest.")
def dedup(manifest_path, blob_root, threshold, report_path, apply_marks):
    """Find exact and near-duplicate images."""
    store = BlobStore(blob_root)
    with Manifest(manifest_path) as manifest:
        records = [
            r for r in manifest.records()
            if r.curation_status != "rejected" and store.has(r.blob_checksum)
        ]
        result = dedup_scan(records, threshold=threshold, fetch_bytes=store.read)
        if apply_marks:
            manifest.mark_duplicates(result.duplicates)
    lines = [
        f"scanned {len(records)} records: {len(result.clusters)} clusters, "
        f"{len(result.duplicates)} duplicates, {len(result.quarantined)} quarantined"
    ]
    for cluster in result.clusters:
        lines.append(
            f"[{cluster.reason}] keep {cluster.representative} of {', '.join(cluster.members)}"
        )
    text = "\n".join(lines)
    if report_path:
        Path(report_path).write_text(text + "\n")
    click.echo(text)


# -- manifest -------------------------------------------------------------------


@main.group("manifest")
def manifest_group():
    """Dataset bookkeeping."""


@manifest_group.command("counts")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
def manifest_counts(manifest_path):
    """Accepted positives per class and gathering type."""
    with Manifest(manifest_path) as manifest:
        table = manifest.class_counts()
        report = harvest_report(manifest)
    click.echo(f"{'class':<16} {'english':>8} {'non-english':>12} {'geograph':>9} {'total':>7}")
    for cid in INCIDENT_CLASS_IDS:
        row = table.row(cid)
        click.echo(
            f"{cid:<16} {row['english']:>8} {row['non_english']:>12}"
            f" {row['geograph']:>9} {table.row_total(cid):>7}"
        )
    eng, non_eng, geo, total = table.totals()
    click.echo(f"{'total':<16} {eng:>8} {non_eng:>12} {geo:>9} {total:>7}")
    click.echo(f"retrieved (all statuses): {report.retrieved_total()}")


@manifest_group.command("split")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--ratios", default="0.70,0.20,0.10", show_default=True)
@click.option("--seed", default=0, show_default=True)
def manifest_split(manifest_path, ratios, seed):
    """Per-class stratified train/val/test assignment."""
    parts = tuple(float(r) for r in ratios.split(","))
    with Manifest(manifest_path) as manifest:
        sizes = assign_splits(manifest, ratios=parts, seed=seed)
    for label, row in sorted(sizes.items()):
        click.echo(f"{label:<16} train={row['train']} val={row['val']} test={row['test']}")


@manifest_group.command("geo-split")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--regions", "region_path", type=click.Path(exists=True), default=None)
@click.option("--seed", default=0, show_default=True)
def manifest_geo_split(manifest_path, region_path, seed):
    """Region-held-out split (Wales to test) for the geotagged classes."""
    region_map = RegionMap.load(region_path)
    with Manifest(manifest_path) as manifest:
        report = geo_stratify(manifest, region_map=region_map, seed=seed)
    for label, row in sorted(report.sizes.items()):
        click.echo(f"{label:<16} train={row['train']} val={row['val']} test={row['test']}")
    fractions = ", ".join(f"{f * 100:.1f}%" for f in report.geograph_split_fractions)
    click.echo(f"geograph split achieved: {fractions} (train/val/test)")
    click.echo(f"holdout n={report.holdout_n}; ungeotagged routed to train: "
               f"{report.ungeotagged_to_train}")


@manifest_group.command("negatives")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--listing", "listings", multiple=True,
              help="source=path-to-listing (text file of paths, or JSONL with geotags)")
@click.option("--quota", "quotas", multiple=True, help="source=count override")
@click.option("--seed", default=0, show_default=True)
def manifest_negatives(manifest_path, listings, quotas, seed):
    """Sample negative examples from local dataset listings."""
    listing_map = {}
    for item in listings:
        source, _, path = item.partition("=")
        entries = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            entries.append(json.loads(line) if line.startswith("{") else line)
        listing_map[source] = entries
    defaults = dict(NegativesSpec().quotas)
    quota_map = {
        source: defaults.get(source, len(listing_map[source])) for source in listing_map
    }
    for item in quotas:
        source, _, count = item.partition("=")
        quota_map[source] = int(count)
    spec = NegativesSpec(quotas=quota_map)
    with Manifest(manifest_path) as manifest:
        added = build_negatives(manifest, spec, listing_map, seed=seed)
    click.echo(f"added {added} negatives")


@manifest_group.command("export")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def manifest_export(manifest_path, out):
    """Dump records as line-delimited JSON."""
    with Manifest(manifest_path) as manifest:
        n = manifest.export_jsonl(out)
    click.echo(f"exported {n} records to {out}")


# -- preprocess / train / eval ----------------------------------------------------


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--blobs", "blob_root", type=click.Path(exists=True), required=True)
@click.option("--split", default="train", show_default=True)
@click.option("--size", default=224, show_default=True)
@click.option("--stats-out", type=click.Path(), required=True)
def preprocess(manifest_path, blob_root, split, size, stats_out):
    """Compute training-split normalization statistics."""
    store = BlobStore(blob_root)
    with Manifest(manifest_path) as manifest:
        stats = compute_norm_stats(split_images(manifest, store, split, size=size))
    stats.save(stats_out)
    click.echo(f"mean={stats.mean} std={stats.std} -> {stats_out}")


@main.command("train")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--blobs", "blob_root", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--stats", "stats_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML overriding TrainConfig fields.")
@click.option("--size", default=224, show_default=True)
def train_cmd(manifest_path, blob_root, out_path, stats_path, config_path, size):
    """Train the classifier on the manifest's train/val splits."""
    overrides = yaml.safe_load(Path(config_path).read_text()) if config_path else {}
    config = TrainConfig(**overrides)
    store = BlobStore(blob_root)
    with Manifest(manifest_path) as manifest:
        train_data = load_split_data(manifest, store, "train", size=size)
        val_data = load_split_data(manifest, store, "val", size=size)
    stats = NormStats.load(stats_path) if stats_path else None
    checkpoint = train(config, train_data, val_data, norm_stats=stats)
    checkpoint.save(out_path)
    click.echo(
        f"trained {config.max_epochs} epochs; best epoch {checkpoint.best_epoch} "
        f"(val loss {checkpoint.curves['val_loss'][checkpoint.best_epoch - 1]:.4f}) -> {out_path}"
    )


@main.command("eval")
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True), required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--blobs", "blob_root", type=click.Path(exists=True), required=True)
@click.option("--split", default="test", show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def eval_cmd(ckpt_path, manifest_path, blob_root, split, report_path):
    """Evaluate a checkpoint on one split and print the metric table."""
    checkpoint = Checkpoint.load(ckpt_path)
    store = BlobStore(blob_root)
    with Manifest(manifest_path) as manifest:
        report, matrix = evaluate_split(checkpoint, manifest, split, store)
    text = render_report(matrix, report)
    if report_path:
        Path(report_path).write_text(text + "\n")
    click.echo(text)


# -- explain ------------------------------------------------------------------------


@main.group()
def explain():
    """Model diagnostics."""


@explain.command("cam")
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True), required=True)
@click.option("--image", "image_path", type=click.Path(exists=True), required=True)
@click.option("--class", "class_id", required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--crop", is_flag=True, help="Apply the ego crop before inference.")
def explain_cam(ckpt_path, image_path, class_id, out_path, crop):
    """Render a class activation overlay for one image."""
    from PIL import Image

    checkpoint = Checkpoint.load(ckpt_path)
    raw = Path(image_path).read_bytes()
    prepared = prepare_for_model(
        raw, crop=crop, size=checkpoint.architecture.input_size, stats=checkpoint.norm_stats
    )
    activation = cam(checkpoint, prepared, class_id)
    display = prepare_for_model(raw, crop=crop, size=checkpoint.architecture.input_size)
    overlay = render_overlay(display, activation)
    Image.fromarray(overlay).save(out_path)
    click.echo(f"wrote {out_path}")


@explain.command("tsne")
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True), required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--blobs", "blob_root", type=click.Path(exists=True), required=True)
@click.option("--split", default=None, help="Limit to one split (default: all accepted).")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--perplexity", default=50.0, show_default=True)
@click.option("--learning-rate", default=500.0, show_default=True)
@click.option("--iterations", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def explain_tsne(ckpt_path, manifest_path, blob_root, split, out_path, perplexity,
                 learning_rate, iterations, seed):
    """Project embeddings to 2-D and write id,x,y,true,predicted CSV."""
    checkpoint = Checkpoint.load(ckpt_path)
    store = BlobStore(blob_root)
    with Manifest(manifest_path) as manifest:
        embeddings = collect_embeddings(checkpoint, manifest, store, split=split)
    config = TsneConfig(
        perplexity=perplexity, learning_rate=learning_rate, iterations=iterations, seed=seed
    )
    result = tsne(embeddings, config)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "true_label", "predicted_label"])
        for i in range(len(embeddings)):
            writer.writerow(
                [
                    embeddings.ids[i],
                    f"{result.coords[i, 0]:.6f}",
                    f"{result.coords[i, 1]:.6f}",
                    embeddings.true_labels[i],
                    embeddings.predicted_labels[i],
                ]
            )
    click.echo(f"wrote {len(embeddings)} points to {out_path} "
               f"(final KL {result.kl_history[-1]:.4f})")


# -- service -----------------------------------------------------------------------


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--blobs", "blob_root", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(manifest_path, blob_root, host, port):
    """Run the curation HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(manifest_path, blob_root), host=host, port=port)


if __name__ == "__main__":
    main()
