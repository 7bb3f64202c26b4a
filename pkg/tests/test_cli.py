import json

import numpy as np
import yaml
from click.testing import CliRunner

from roadwatch.cli import main
from roadwatch.harvest import BlobStore
from roadwatch.manifest import Manifest

from conftest import encode_png, make_record, textured_image


def write_fixture_world(tmp_path, n_images=6):
    """A plan with one class, a fixture results file pointing at real PNGs."""
    images_dir = tmp_path / "images"
    images_dir.mkdir()
    urls = []
    for i in range(n_images):
        path = images_dir / f"img{i}.png"
        path.write_bytes(encode_png(textured_image(100 + i, size=64)))
        urls.append(str(path))
    # one exact duplicate of the first image and one half-scale copy
    dup = images_dir / "dup.png"
    dup.write_bytes((images_dir / "img0.png").read_bytes())
    urls.append(str(dup))
    from PIL import Image

    small = Image.open(images_dir / "img1.png").resize((32, 32), Image.Resampling.BILINEAR)
    small_path = images_dir / "small.png"
    small.save(small_path)
    urls.append(str(small_path))

    plan_path = tmp_path / "plan.yaml"
    plan_path.write_text(
        yaml.safe_dump(
            {"context": {"default": ["road"]}, "incidents": {"snow": ["snow"]}}
        )
    )
    fixture_path = tmp_path / "results.yaml"
    fixture_path.write_text(yaml.safe_dump({"road snow": urls}))
    return plan_path, fixture_path


class TestQueriesPlan:
    def test_prints_expansions(self):
        runner = CliRunner()
        result = runner.invoke(main, ["queries", "plan", "--class", "snow", "--langs", "en,nl"])
        assert result.exit_code == 0, result.output
        assert "road snow" in result.output
        assert "weg sneeuw" in result.output

    def test_json_output(self, tmp_path):
        runner = CliRunner()
        out = tmp_path / "queries.json"
        result = runner.invoke(
            main, ["queries", "plan", "--class", "fire", "--langs", "en", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        rows = json.loads(out.read_text())
        assert all(r["class"] == "fire" for r in rows)


class TestHarvestDedupCounts:
    def test_end_to_end(self, tmp_path):
        plan_path, fixture_path = write_fixture_world(tmp_path)
        manifest_path = tmp_path / "m.db"
        blobs = tmp_path / "blobs"
        runner = CliRunner()

        result = runner.invoke(
            main,
            ["harvest", "--plan", str(plan_path), "--manifest", str(manifest_path),
             "--blobs", str(blobs), "--fixture-file", str(fixture_path)],
        )
        assert result.exit_code == 0, result.output
        assert "added 8 candidates" in result.output

        with Manifest(manifest_path) as m:
            records = list(m.records())
            assert len(records) == 8
            assert all(r.label == "snow" and r.curation_status == "pending" for r in records)
            store = BlobStore(blobs)
            assert all(store.has(r.blob_checksum) for r in records)
            # exact duplicate shares its blob
            assert len({r.blob_checksum for r in records}) == 7

        # threshold 6: the exact copy (distance 0) and the half-scale copy
        # (distance <= 2 on this fixture family) cluster; distinct base
        # images sit at distance >= 9 and stay apart
        result = runner.invoke(
            main,
            ["dedup", "--manifest", str(manifest_path), "--blobs", str(blobs),
             "--threshold", "6", "--report", str(tmp_path / "dedup.report")],
        )
        assert result.exit_code == 0, result.output
        assert "2 duplicates" in result.output
        assert (tmp_path / "dedup.report").exists()
        with Manifest(manifest_path) as m:
            rejected = [r for r in m.records(status="rejected")]
            assert len(rejected) == 2
            assert all(r.rejection_reason == "duplicate" for r in rejected)

    def test_counts_table(self, tmp_path):
        manifest_path = tmp_path / "m.db"
        with Manifest(manifest_path) as m:
            m.add_records(
                [make_record(f"s{i}", label="snow", status="accepted") for i in range(3)]
                + [make_record("f0", label="fire", provider="bing", language="fa",
                               status="accepted")]
            )
        runner = CliRunner()
        result = runner.invoke(main, ["manifest", "counts", "--manifest", str(manifest_path)])
        assert result.exit_code == 0, result.output
        assert "snow" in result.output
        assert "total" in result.output


class TestSplitCommands:
    def test_split_and_geo_split(self, tmp_path):
        manifest_path = tmp_path / "m.db"
        with Manifest(manifest_path) as m:
            m.add_records(
                [make_record(f"r{i}", label="snow", status="accepted") for i in range(10)]
                + [make_record(f"g{i}", label="snow", provider="geograph", language=None,
                               status="accepted", region="wales" if i < 2 else "england")
                   for i in range(6)]
            )
        runner = CliRunner()
        result = runner.invoke(
            main, ["manifest", "split", "--manifest", str(manifest_path), "--seed", "3"]
        )
        assert result.exit_code == 0, result.output
        assert "train=" in result.output

        result = runner.invoke(
            main, ["manifest", "geo-split", "--manifest", str(manifest_path), "--seed", "3"]
        )
        assert result.exit_code == 0, result.output
        assert "holdout n=2" in result.output

    def test_negatives_listing(self, tmp_path):
        manifest_path = tmp_path / "m.db"
        Manifest(manifest_path).close()
        listing = tmp_path / "bdd.txt"
        listing.write_text("\n".join(f"/data/bdd/{i}.jpg" for i in range(40)))
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["manifest", "negatives", "--manifest", str(manifest_path),
             "--listing", f"bdd={listing}", "--quota", "bdd=15"],
        )
        assert result.exit_code == 0, result.output
        assert "added 15 negatives" in result.output
        with Manifest(manifest_path) as m:
            assert m.count(label="negative") == 15

    def test_export(self, tmp_path):
        manifest_path = tmp_path / "m.db"
        with Manifest(manifest_path) as m:
            m.add_record(make_record("r0", status="accepted"))
        out = tmp_path / "records.jsonl"
        runner = CliRunner()
        result = runner.invoke(
            main, ["manifest", "export", "--manifest", str(manifest_path), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["id"] == "r0"
